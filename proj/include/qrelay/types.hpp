#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>

namespace qrelay {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

/// Thrown for malformed inputs: shape mismatches and out-of-range parameters.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Network-wide constants. All powers and SNRs are linear.
struct SystemParams {
  int L = 4;
  double P_t = 10.0;
  double gamma = 1.0;
  double rho = 0.1;
  double sigma_v2 = 0.25;
  RVec sigma2 = RVec::Constant(4, 0.25);

  /// Uniform per-relay noise helper.
  static SystemParams uniform(int L, double P_t, double gamma, double rho,
                              double sigma_v2, double sigma_relay2) {
    SystemParams p;
    p.L = L;
    p.P_t = P_t;
    p.gamma = gamma;
    p.rho = rho;
    p.sigma_v2 = sigma_v2;
    p.sigma2 = RVec::Constant(L, sigma_relay2);
    p.validate();
    return p;
  }

  void validate() const {
    if (L < 1) throw InvalidArgument("SystemParams: L must be >= 1");
    if (!(P_t > 0.0)) throw InvalidArgument("SystemParams: P_t must be > 0");
    if (!(gamma > 0.0)) throw InvalidArgument("SystemParams: gamma must be > 0");
    if (!(rho > 0.0 && rho < 1.0))
      throw InvalidArgument("SystemParams: rho must lie in (0,1)");
    if (!(sigma_v2 > 0.0))
      throw InvalidArgument("SystemParams: sigma_v2 must be > 0");
    if (sigma2.size() != L)
      throw InvalidArgument("SystemParams: sigma2 length must equal L");
    if ((sigma2.array() <= 0.0).any())
      throw InvalidArgument("SystemParams: relay noise variances must be > 0");
  }

  double p_over_gamma() const { return P_t / gamma; }
};

/// Estimated channels plus the error scales (Delta f = eps x, Delta g = eta y).
struct ChannelScenario {
  CVec f_bar;
  CVec g_bar;
  double eps = 0.0;
  double eta = 0.0;

  int size() const { return static_cast<int>(f_bar.size()); }

  void validate(const SystemParams& p) const {
    if (f_bar.size() != p.L || g_bar.size() != p.L)
      throw InvalidArgument("ChannelScenario: channel length must equal L");
    if (eps < 0.0 || eta < 0.0)
      throw InvalidArgument("ChannelScenario: error scales must be >= 0");
  }
};

/// Standard complex Gaussian channel perturbation directions.
struct Perturbation {
  CVec x;
  CVec y;

  static Perturbation zero(int L) {
    return {CVec::Zero(L), CVec::Zero(L)};
  }
  Perturbation scaled(double t) const { return {x * t, y * t}; }
};

/// Complex Hermitian matrix. Construction symmetrizes (M + M^H)/2.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(int n) : m_(CMat::Zero(n, n)) {}
  explicit HermitianMatrix(const CMat& m) : m_(symmetrize(m)) {}

  static HermitianMatrix zero(int n) { return HermitianMatrix(n); }
  static HermitianMatrix identity(int n) {
    return HermitianMatrix(CMat(CMat::Identity(n, n)));
  }
  static HermitianMatrix outer(const CVec& w) {
    return HermitianMatrix(CMat(w * w.adjoint()));
  }
  static HermitianMatrix diagonal(const RVec& d) {
    return HermitianMatrix(CMat(d.cast<cplx>().asDiagonal()));
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMat& matrix() const { return m_; }
  cplx operator()(int i, int j) const { return m_(i, j); }

  /// Largest |M - M^H| entry.
  double hermitian_defect() const {
    if (m_.size() == 0) return 0.0;
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
  }

  /// Eigenvalues in ascending order.
  RVec eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<CMat> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

  HermitianMatrix operator+(const HermitianMatrix& o) const {
    return HermitianMatrix(CMat(m_ + o.m_));
  }
  HermitianMatrix operator-(const HermitianMatrix& o) const {
    return HermitianMatrix(CMat(m_ - o.m_));
  }
  HermitianMatrix operator*(double a) const {
    return HermitianMatrix(CMat(m_ * a));
  }

 private:
  static CMat symmetrize(const CMat& m) {
    if (m.rows() != m.cols())
      throw InvalidArgument("HermitianMatrix: matrix must be square");
    return 0.5 * (m + m.adjoint());
  }

  CMat m_;
};

/// Real inner product W . M = Re sum_ij conj(W_ij) M_ij (= tr(WM) for
/// Hermitian arguments).
inline double inner(const CMat& W, const CMat& M) {
  return (W.conjugate().cwiseProduct(M)).sum().real();
}
inline double inner(const HermitianMatrix& W, const HermitianMatrix& M) {
  return inner(W.matrix(), M.matrix());
}

/// Row-major vectorization index: vec(W)_{(i,j)} = W_{i,j}.
inline int vec_index(int i, int j, int L) { return i * L + j; }

inline CVec vec(const CMat& W) {
  const int L = static_cast<int>(W.rows());
  CVec v(L * L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) v(vec_index(i, j, L)) = W(i, j);
  return v;
}

inline CMat unvec(const CVec& v, int L) {
  if (v.size() != L * L) throw InvalidArgument("unvec: length must be L^2");
  CMat W(L, L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) W(i, j) = v(vec_index(i, j, L));
  return W;
}

/// FNV-1a over the raw bytes of the scenario and parameters; used to tag
/// emitted programs so results can be matched to their inputs.
inline std::uint64_t scenario_hash(const ChannelScenario& sc,
                                   const SystemParams& p) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  auto feed = [&h](double d) {
    unsigned char b[sizeof(double)];
    std::memcpy(b, &d, sizeof d);
    for (unsigned char c : b) {
      h ^= c;
      h *= 0x100000001B3ull;
    }
  };
  for (int i = 0; i < sc.size(); ++i) {
    feed(sc.f_bar(i).real());
    feed(sc.f_bar(i).imag());
    feed(sc.g_bar(i).real());
    feed(sc.g_bar(i).imag());
  }
  feed(sc.eps);
  feed(sc.eta);
  feed(p.P_t);
  feed(p.gamma);
  feed(p.rho);
  feed(p.sigma_v2);
  for (int i = 0; i < p.sigma2.size(); ++i) feed(p.sigma2(i));
  return h;
}

}  // namespace qrelay
