#pragma once

// Moment-inequality safe approximations of the outage constraint:
// coefficient tables, the perturbation matrix M(x, y), the second-moment
// matrix U = E[vec(M) vec(M)^H] and the resulting SOC-restricted SDPs.

#include <qrelay/conic/hermitian.hpp>
#include <qrelay/conic/program.hpp>
#include <qrelay/model.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qrelay {

enum class MomentOrder { Fourth = 4, Second = 2 };

inline const char* to_string(MomentOrder o) {
  return o == MomentOrder::Fourth ? "M4" : "M2";
}

inline void check_rho(double rho, const char* who) {
  if (!(rho > 0.0 && rho < 1.0))
    throw InvalidArgument(std::string(who) + ": rho must lie in (0,1)");
}

/// Moment order q(rho) of the Markov bound.
inline double q_of_rho(double rho) {
  check_rho(rho, "q_of_rho");
  const double lr = std::log(rho);
  if (rho <= std::exp(-8.0)) return (-lr + std::sqrt(lr * lr - 8.0 * lr)) / 4.0;
  return 2.0;
}

/// Safety factor c(rho); 1/sqrt(rho) on the q = 2 branch.
inline double c_of_rho(double rho) {
  const double q = q_of_rho(rho);
  if (q > 2.0) return (q - 1.0) * (q - 1.0) * std::exp(2.0 * q / (q - 1.0));
  return 1.0 / std::sqrt(rho);
}

struct MomentCoefficients {
  MomentOrder order = MomentOrder::Fourth;
  int L = 0;
  CMat C;               // L x 9, column m-1 holds C_m(i)
  std::vector<CMat> D;  // D[n-1](k, l) = D_n(k, l); 15 (order 4) or 10 (order 2)
  // Extra variance of M_ii that the nine-term sum does not capture: the
  // |x_i|^2, |y_i|^2 factors inside C_1..C_4 and C_9 are not unit-variance.
  RVec diag_extra;

  int num_d() const { return static_cast<int>(D.size()); }
};

inline MomentCoefficients coefficients(const ChannelScenario& sc,
                                       const SystemParams& params,
                                       MomentOrder order) {
  sc.validate(params);
  const int L = params.L;
  const double pg = params.p_over_gamma();
  const double e = sc.eps, h = sc.eta;
  const double e2 = e * e, h2 = h * h;
  const bool full = order == MomentOrder::Fourth;
  const CVec& f = sc.f_bar;
  const CVec& g = sc.g_bar;

  MomentCoefficients mc;
  mc.order = order;
  mc.L = L;
  mc.C = CMat::Zero(L, 9);
  mc.diag_extra = RVec::Zero(L);
  for (int i = 0; i < L; ++i) {
    const double s2 = params.sigma2(i);
    const double af = std::norm(f(i)), ag = std::norm(g(i));
    const cplx fi = f(i), gi = g(i), fc = std::conj(fi), gc = std::conj(gi);
    const double k4 = full ? 1.0 : 0.0;
    mc.C(i, 0) = h * s2 * gi - pg * (h * af * gi + k4 * h * e2 * gi);
    mc.C(i, 1) = h * s2 * gc - pg * (h * af * gc + k4 * h * e2 * gc);
    mc.C(i, 2) = -pg * (e * ag * fc + k4 * e * h2 * fc);
    mc.C(i, 3) = -pg * (e * ag * fi + k4 * e * h2 * fi);
    mc.C(i, 4) = -pg * e * h * fc * gi;
    mc.C(i, 5) = -pg * e * h * fc * gc;
    mc.C(i, 6) = -pg * e * h * fi * gi;
    mc.C(i, 7) = -pg * e * h * fi * gc;
    mc.C(i, 8) = h2 * s2 - pg * (h2 * af + e2 * ag + k4 * e2 * h2);

    const double a = h2 * s2 - pg * h2 * af;
    const double b = -pg * e2 * ag;
    if (full) {
      const double c = -pg * e2 * h2;
      mc.diag_extra(i) = 2.0 * pg * pg * h2 * e2 * e2 * ag +
                         2.0 * pg * pg * e2 * h2 * h2 * af + (a + c) * (a + c) +
                         (b + c) * (b + c) + c * c;
    } else {
      mc.diag_extra(i) = a * a + b * b;
    }
  }

  const int nd = full ? 15 : 10;
  mc.D.assign(nd, CMat::Zero(L, L));
  for (int k = 0; k < L; ++k)
    for (int l = 0; l < L; ++l) {
      if (k == l) continue;
      const cplx fk = f(k), flc = std::conj(f(l)), gl = g(l), gkc = std::conj(g(k));
      auto& D = mc.D;
      D[0](k, l) = -pg * h * fk * flc * gl;
      D[1](k, l) = -pg * h * fk * flc * gkc;
      D[2](k, l) = -pg * e * gkc * gl * flc;
      D[3](k, l) = -pg * e * gkc * gl * fk;
      D[4](k, l) = -pg * e * h * flc * gl;
      D[5](k, l) = -pg * e * h * flc * gkc;
      D[6](k, l) = -pg * e * h * fk * gl;
      D[7](k, l) = -pg * e * h * fk * gkc;
      D[8](k, l) = -pg * h2 * fk * flc;
      D[9](k, l) = -pg * e2 * gkc * gl;
      if (full) {
        D[10](k, l) = -pg * e * h2 * flc;
        D[11](k, l) = -pg * e * h2 * fk;
        D[12](k, l) = -pg * e2 * h * gl;
        D[13](k, l) = -pg * e2 * h * gkc;
        D[14](k, l) = -pg * e2 * h2;
      }
    }
  return mc;
}

/// Perturbation matrix with W.M(x, y) = Q(W, x, y) + a0(W) (order 4) or its
/// degree-2 truncation (order 2).
inline HermitianMatrix m_matrix(const Perturbation& p, const ChannelScenario& sc,
                                const SystemParams& params, MomentOrder order) {
  sc.validate(params);
  const int L = params.L;
  if (p.x.size() != L || p.y.size() != L)
    throw InvalidArgument("m_matrix: perturbation length must equal L");
  const double pg = params.p_over_gamma();
  const double e = sc.eps, h = sc.eta;
  const bool full = order == MomentOrder::Fourth;
  const CVec& f = sc.f_bar;
  const CVec& g = sc.g_bar;
  const CVec& x = p.x;
  const CVec& y = p.y;

  CMat M(L, L);
  for (int k = 0; k < L; ++k)
    for (int l = 0; l < L; ++l) {
      const cplx fy = std::conj(y(k)) * g(l) + std::conj(g(k)) * y(l);
      const cplx fx = x(k) * std::conj(f(l)) + f(k) * std::conj(x(l));
      const cplx ff = f(k) * std::conj(f(l));
      const cplx gg = std::conj(g(k)) * g(l);
      const cplx xx = x(k) * std::conj(x(l));
      const cplx yy = std::conj(y(k)) * y(l);
      cplx br = h * ff * fy + e * gg * fx + h * h * ff * yy + e * e * gg * xx +
                e * h * fx * fy;
      if (full)
        br += e * h * h * fx * yy + h * e * e * xx * fy + e * e * h * h * xx * yy;
      M(k, l) = -pg * br;
    }
  for (int i = 0; i < L; ++i) {
    const double s2 = params.sigma2(i);
    M(i, i) += h * s2 * (y(i) * std::conj(g(i)) + g(i) * std::conj(y(i))) +
               h * h * s2 * std::norm(y(i));
  }
  return HermitianMatrix(M);
}

/// Diagonal entry of U: the nine-term sum as tabulated, or the exact second
/// moment including the fluctuation of the |x_i|^2, |y_i|^2 factors.
enum class UForm { Exact, Printed };

struct UMatrix {
  MomentOrder order = MomentOrder::Fourth;
  CMat U;         // L^2 x L^2, row-major pair index (i, j) -> i*L + j
  CMat sqrt_U;    // Hermitian PSD square root
  int clamped = 0;
  double min_eig = 0.0;
  double max_eig = 0.0;
};

/// Thrown when U is indefinite beyond rounding, i.e. the tables were
/// assembled inconsistently.
class ConstructionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline CMat assemble_U(const MomentCoefficients& mc, UForm form = UForm::Exact) {
  const int L = mc.L;
  const auto& C = mc.C;
  const auto& D = mc.D;
  const int nd = mc.num_d();
  auto Cc = [&](int i, int m) { return std::conj(C(i, m)); };
  auto Dc = [&](int n, int k, int l) { return std::conj(D[n](k, l)); };

  CMat U = CMat::Zero(L * L, L * L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j)
      for (int k = 0; k < L; ++k)
        for (int l = 0; l < L; ++l) {
          cplx u = 0.0;
          if (i == j && k == l) {
            if (i == k) {
              for (int m = 0; m < 9; ++m) u += std::norm(C(i, m));
              if (form == UForm::Exact) u += mc.diag_extra(i);
            } else {
              u = C(i, 8) * Cc(k, 8);
            }
          } else if (i == j) {  // k != l
            if (i == k)
              u = C(i, 0) * Dc(0, i, l) + C(i, 2) * Dc(2, i, l) + C(i, 4) * Dc(4, i, l);
            else if (i == l)
              u = C(i, 1) * Dc(1, k, i) + C(i, 3) * Dc(3, k, i) + C(i, 7) * Dc(7, k, i);
          } else if (k == l) {  // i != j
            if (i == k)
              u = D[0](i, j) * Cc(i, 0) + D[2](i, j) * Cc(i, 2) + D[4](i, j) * Cc(i, 4);
            else if (j == k)
              u = D[1](i, j) * Cc(j, 1) + D[3](i, j) * Cc(j, 3) + D[7](i, j) * Cc(j, 7);
          } else {  // i != j, k != l
            if (i == k && j == l) {
              for (int n = 0; n < nd; ++n) u += std::norm(D[n](i, j));
            } else if (i == k) {
              u = D[0](k, j) * Dc(0, k, l) + D[2](k, j) * Dc(2, k, l) +
                  D[4](k, j) * Dc(4, k, l);
            } else if (j == l) {
              u = D[1](i, l) * Dc(1, k, l) + D[3](i, l) * Dc(3, k, l) +
                  D[7](i, l) * Dc(7, k, l);
            }
          }
          U(vec_index(i, j, L), vec_index(k, l, L)) = u;
        }
  return U;
}

/// U and its PSD square root. Eigenvalues below 1e-9 * lambda_max are
/// clamped to zero; anything below -1e-6 * lambda_max throws.
inline UMatrix build_U(const MomentCoefficients& mc, UForm form = UForm::Exact) {
  UMatrix um;
  um.order = mc.order;
  const CMat raw = assemble_U(mc, form);
  um.U = 0.5 * (raw + raw.adjoint());
  const int n = static_cast<int>(um.U.rows());
  Eigen::SelfAdjointEigenSolver<CMat> es(um.U);
  RVec ev = es.eigenvalues();
  um.min_eig = ev(0);
  um.max_eig = ev(n - 1);
  const double scale = std::max(um.max_eig, 0.0);
  if (um.min_eig < -1e-6 * scale)
    throw ConstructionError("build_U: U is indefinite beyond rounding");
  for (int k = 0; k < n; ++k) {
    if (ev(k) < 1e-9 * scale) {
      if (ev(k) < 0.0) ++um.clamped;
      ev(k) = 0.0;
    }
  }
  um.sqrt_U = es.eigenvectors() * ev.cwiseSqrt().cast<cplx>().asDiagonal() *
              es.eigenvectors().adjoint();
  um.sqrt_U = (0.5 * (um.sqrt_U + um.sqrt_U.adjoint())).eval();
  return um;
}

/// Linear coefficients of a Hermitian-parametrized functional W -> W.M.
inline RVec linear_coefficients(const conic::HermitianParam& par, const CMat& M) {
  RVec c(par.num_vars());
  for (int k = 0; k < par.num_vars(); ++k) c(k) = inner(par.basis(k), M);
  return c;
}

/// a0(W) = a0_const + a0_lin . theta.
inline RVec a0_linear(const conic::HermitianParam& par, const ChannelScenario& sc,
                      const SystemParams& params) {
  RVec c(par.num_vars());
  for (int k = 0; k < par.num_vars(); ++k)
    c(k) = a0(HermitianMatrix(par.basis(k)), sc, params) + params.sigma_v2;
  return c;
}

struct SafeSOCProblem {
  conic::ConicProgram program;
  conic::HermitianParam param{1};
  MomentOrder order = MomentOrder::Fourth;
  double c = 0.0;
  std::uint64_t scenario_hash = 0;
  UMatrix U;
  double sigma_v2 = 0.0;
  RVec a0_lin;  // a0(W) + sigma_v^2 = a0_lin . theta

  CMat W_of(const RVec& x) const { return param.to_matrix(x); }

  /// Homogeneous part a0(W) + sigma_v^2 - c ||U^{1/2} vec W||.
  double homogeneous(const HermitianMatrix& W) const {
    return linear_part(W) - c * (U.sqrt_U * vec(W.matrix())).norm();
  }
  double linear_part(const HermitianMatrix& W) const {
    return a0_lin.dot(param.from_matrix(W.matrix()));
  }
  /// a0(W) - c ||U^{1/2} vec W||; nonnegative iff W meets the restriction.
  double margin(const HermitianMatrix& W) const {
    return homogeneous(W) - sigma_v2;
  }
};

/// minimize E[D].W  s.t.  a0(W) >= c(rho) ||U^{1/2} vec W||,  W PSD.
inline SafeSOCProblem build_problem(const ChannelScenario& sc,
                                    const SystemParams& params, MomentOrder order,
                                    UForm form = UForm::Exact) {
  params.validate();
  sc.validate(params);
  const int L = params.L;
  SafeSOCProblem sp;
  sp.param = conic::HermitianParam(L);
  sp.order = order;
  sp.c = c_of_rho(params.rho);
  sp.scenario_hash = scenario_hash(sc, params);
  sp.U = build_U(coefficients(sc, params, order), form);
  sp.sigma_v2 = params.sigma_v2;
  sp.a0_lin = a0_linear(sp.param, sc, params);

  const int n = sp.param.num_vars();
  const int L2 = L * L;
  conic::ConicProgram prog(n);
  for (int i = 0; i < L; ++i) prog.set_var_name(i, "W" + std::to_string(i) + std::to_string(i));
  for (int i = 0; i < L; ++i)
    for (int j = i + 1; j < L; ++j) {
      const int k = sp.param.offdiag_index(i, j);
      const std::string ij = std::to_string(i) + std::to_string(j);
      prog.set_var_name(k, "reW" + ij);
      prog.set_var_name(k + 1, "imW" + ij);
    }
  prog.set_objective(linear_coefficients(sp.param, avg_power_matrix(sc, params).matrix()));

  RMat A = RMat::Zero(2 * L2 + 1, n);
  RVec b = RVec::Zero(2 * L2 + 1);
  A.row(0) = sp.a0_lin.transpose();
  b(0) = -params.sigma_v2;
  for (int k = 0; k < n; ++k) {
    const CVec col = sp.c * (sp.U.sqrt_U * vec(sp.param.basis(k)));
    A.block(1, k, L2, 1) = col.real();
    A.block(1 + L2, k, L2, 1) = col.imag();
  }
  prog.add_block(conic::Cone::soc(2 * L2 + 1), A, b, "moment");
  prog.add_block(conic::Cone::psd(2 * L), conic::embed_operator(sp.param),
                 RVec::Zero(conic::svec_dim(2 * L)), "W_psd");
  sp.program = std::move(prog);
  return sp;
}

}  // namespace qrelay
