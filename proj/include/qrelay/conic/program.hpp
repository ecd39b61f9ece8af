#pragma once

#include <qrelay/types.hpp>

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace qrelay::conic {

enum class ConeType { Zero, Nonneg, SOC, PSD };

/// A cone tag. `size` is the vector dimension for Zero/Nonneg/SOC and the
/// matrix order for PSD (whose vectorized dimension is size*(size+1)/2).
struct Cone {
  ConeType type = ConeType::Nonneg;
  int size = 0;

  static Cone zero(int k) { return {ConeType::Zero, k}; }
  static Cone nonneg(int k) { return {ConeType::Nonneg, k}; }
  static Cone soc(int k) { return {ConeType::SOC, k}; }
  static Cone psd(int k) { return {ConeType::PSD, k}; }

  int dim() const {
    return type == ConeType::PSD ? size * (size + 1) / 2 : size;
  }
};

inline const char* to_string(ConeType t) {
  switch (t) {
    case ConeType::Zero: return "Zero";
    case ConeType::Nonneg: return "Nonneg";
    case ConeType::SOC: return "SOC";
    case ConeType::PSD: return "PSD";
  }
  return "?";
}

// Symmetric-matrix vectorization: lower triangle, column by column,
// off-diagonal entries scaled by sqrt(2) so that svec(A).svec(B) = tr(AB).

inline int svec_dim(int k) { return k * (k + 1) / 2; }

inline int svec_index(int i, int j, int k) {
  if (i < j) std::swap(i, j);
  // column j starts after columns 0..j-1 of lengths k, k-1, ...
  return j * k - j * (j - 1) / 2 + (i - j);
}

template <typename Derived>
RVec svec(const Eigen::MatrixBase<Derived>& S) {
  const int k = static_cast<int>(S.rows());
  RVec v(svec_dim(k));
  int idx = 0;
  for (int j = 0; j < k; ++j)
    for (int i = j; i < k; ++i)
      v(idx++) = (i == j) ? S(i, i) : std::numbers::sqrt2 * 0.5 * (S(i, j) + S(j, i));
  return v;
}

template <typename Derived>
RMat smat(const Eigen::MatrixBase<Derived>& v, int k) {
  RMat S(k, k);
  int idx = 0;
  for (int j = 0; j < k; ++j)
    for (int i = j; i < k; ++i) {
      const double val = v(idx++);
      if (i == j) {
        S(i, i) = val;
      } else {
        S(i, j) = S(j, i) = val * (1.0 / std::numbers::sqrt2);
      }
    }
  return S;
}

/// Affine constraint block: A x + b must lie in `cone`.
struct AffineBlock {
  Cone cone;
  RMat A;
  RVec b;
  std::string label;
};

/// Solver-agnostic conic program: minimize c^T x + offset subject to a list
/// of affine-map-into-cone blocks.
class ConicProgram {
 public:
  explicit ConicProgram(int n = 0)
      : n_(n), c_(RVec::Zero(n)), names_(static_cast<std::size_t>(n)) {
    for (int i = 0; i < n; ++i) names_[i] = "x" + std::to_string(i);
  }

  int num_vars() const { return n_; }
  const RVec& objective() const { return c_; }
  double objective_offset() const { return offset_; }
  const std::vector<AffineBlock>& blocks() const { return blocks_; }
  const std::vector<std::string>& var_names() const { return names_; }

  void set_objective(RVec c, double offset = 0.0) {
    if (c.size() != n_)
      throw InvalidArgument("ConicProgram: objective length must equal n");
    c_ = std::move(c);
    offset_ = offset;
  }

  void set_var_name(int i, std::string name) {
    if (i < 0 || i >= n_) throw InvalidArgument("ConicProgram: bad variable index");
    names_[i] = std::move(name);
  }

  /// Appends a block; returns its index.
  int add_block(Cone cone, RMat A, RVec b, std::string label = {}) {
    if (cone.size <= 0) throw InvalidArgument("ConicProgram: empty cone");
    if (A.rows() != cone.dim() || b.size() != cone.dim())
      throw InvalidArgument("ConicProgram: block '" + label +
                            "' output dimension does not match its cone");
    if (A.cols() != n_)
      throw InvalidArgument("ConicProgram: block '" + label +
                            "' has wrong number of columns");
    blocks_.push_back({cone, std::move(A), std::move(b), std::move(label)});
    return static_cast<int>(blocks_.size()) - 1;
  }

  /// Evaluates block k at x.
  RVec block_value(int k, const RVec& x) const {
    const auto& blk = blocks_.at(static_cast<std::size_t>(k));
    return blk.A * x + blk.b;
  }

 private:
  int n_;
  RVec c_;
  double offset_ = 0.0;
  std::vector<AffineBlock> blocks_;
  std::vector<std::string> names_;
};

/// Distance-style violation of v with respect to cone membership
/// (0 when inside).
inline double cone_violation(const Cone& cone, const RVec& v) {
  switch (cone.type) {
    case ConeType::Zero:
      return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
    case ConeType::Nonneg:
      return std::max(0.0, -v.minCoeff());
    case ConeType::SOC:
      return std::max(0.0, v.tail(v.size() - 1).norm() - v(0));
    case ConeType::PSD: {
      Eigen::SelfAdjointEigenSolver<RMat> es(smat(v, cone.size),
                                             Eigen::EigenvaluesOnly);
      return std::max(0.0, -es.eigenvalues()(0));
    }
  }
  return 0.0;
}

}  // namespace qrelay::conic
