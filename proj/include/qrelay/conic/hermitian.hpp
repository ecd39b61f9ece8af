#pragma once

// Real parametrization of an L x L Hermitian matrix and its real symmetric
// embedding [Re W, -Im W; Im W, Re W], which is PSD iff W is.

#include <qrelay/conic/program.hpp>

namespace qrelay::conic {

/// theta layout: [W_00, ..., W_{L-1,L-1}] followed by (Re W_ij, Im W_ij)
/// for each i < j in row-major order. L^2 reals in total.
class HermitianParam {
 public:
  explicit HermitianParam(int L) : L_(L) {
    if (L < 1) throw InvalidArgument("HermitianParam: L must be >= 1");
  }

  int order() const { return L_; }
  int num_vars() const { return L_ * L_; }

  /// Index of Re(W_ij) (i < j); Im(W_ij) is the next slot.
  int offdiag_index(int i, int j) const {
    if (i >= j) throw InvalidArgument("HermitianParam: need i < j");
    // pairs before row i: sum_{r<i} (L-1-r)
    const int before = i * (L_ - 1) - i * (i - 1) / 2;
    return L_ + 2 * (before + (j - i - 1));
  }

  CMat to_matrix(const Eigen::Ref<const RVec>& theta) const {
    if (theta.size() != num_vars())
      throw InvalidArgument("HermitianParam: theta has wrong length");
    CMat W = CMat::Zero(L_, L_);
    for (int i = 0; i < L_; ++i) W(i, i) = theta(i);
    for (int i = 0; i < L_; ++i)
      for (int j = i + 1; j < L_; ++j) {
        const int k = offdiag_index(i, j);
        W(i, j) = cplx(theta(k), theta(k + 1));
        W(j, i) = std::conj(W(i, j));
      }
    return W;
  }

  RVec from_matrix(const CMat& W) const {
    if (W.rows() != L_ || W.cols() != L_)
      throw InvalidArgument("HermitianParam: W must be L x L");
    RVec theta(num_vars());
    for (int i = 0; i < L_; ++i) theta(i) = W(i, i).real();
    for (int i = 0; i < L_; ++i)
      for (int j = i + 1; j < L_; ++j) {
        const cplx v = 0.5 * (W(i, j) + std::conj(W(j, i)));
        const int k = offdiag_index(i, j);
        theta(k) = v.real();
        theta(k + 1) = v.imag();
      }
    return theta;
  }

  /// Hermitian basis element for coordinate k.
  CMat basis(int k) const {
    RVec e = RVec::Zero(num_vars());
    e(k) = 1.0;
    return to_matrix(e);
  }

 private:
  int L_;
};

/// [Re W, -Im W; Im W, Re W].
inline RMat hermitian_embed(const CMat& W) {
  const int L = static_cast<int>(W.rows());
  RMat E(2 * L, 2 * L);
  E.topLeftCorner(L, L) = W.real();
  E.topRightCorner(L, L) = -W.imag();
  E.bottomLeftCorner(L, L) = W.imag();
  E.bottomRightCorner(L, L) = W.real();
  return E;
}

/// Inverse of hermitian_embed (averages the redundant blocks).
inline CMat hermitian_unembed(const RMat& E) {
  const int L = static_cast<int>(E.rows()) / 2;
  const RMat re = 0.5 * (E.topLeftCorner(L, L) + E.bottomRightCorner(L, L));
  const RMat im = 0.5 * (E.bottomLeftCorner(L, L) - E.topRightCorner(L, L));
  CMat W(L, L);
  W.real() = re;
  W.imag() = im;
  return W;
}

/// Linear map theta -> svec(hermitian_embed(W(theta))), as a matrix with
/// svec_dim(2L) rows and L^2 columns. Suitable as the A of a PSD(2L) block.
inline RMat embed_operator(const HermitianParam& param) {
  const int L = param.order();
  RMat A(svec_dim(2 * L), param.num_vars());
  for (int k = 0; k < param.num_vars(); ++k)
    A.col(k) = svec(hermitian_embed(param.basis(k)));
  return A;
}

}  // namespace qrelay::conic
