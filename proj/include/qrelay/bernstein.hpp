#pragma once

// Real Gaussian quadratic form of the truncated outage margin and the
// Bernstein-type restriction built on it.
//
// With xi = sqrt(2) [Re x; Im x; Re y; Im y] ~ N(0, I_{4L}), the degree-2
// truncation of -Q(W, x, y) is s + v^T xi + xi^T R_bar xi, and the design
// needs it to be positive with probability at least 1 - rho.

#include <qrelay/conic/hermitian.hpp>
#include <qrelay/conic/program.hpp>
#include <qrelay/model.hpp>
#include <qrelay/moment.hpp>

#include <cmath>
#include <numbers>

namespace qrelay {

inline RVec xi_from_pert(const Perturbation& p) {
  const int L = static_cast<int>(p.x.size());
  if (p.y.size() != L) throw InvalidArgument("xi_from_pert: x and y lengths differ");
  RVec xi(4 * L);
  xi << p.x.real(), p.x.imag(), p.y.real(), p.y.imag();
  return std::numbers::sqrt2 * xi;
}

inline Perturbation pert_from_xi(const RVec& xi) {
  const int L = static_cast<int>(xi.size()) / 4;
  if (xi.size() != 4 * L) throw InvalidArgument("pert_from_xi: length must be 4L");
  const RVec h = xi / std::numbers::sqrt2;
  Perturbation p{CVec(L), CVec(L)};
  p.x.real() = h.segment(0, L);
  p.x.imag() = h.segment(L, L);
  p.y.real() = h.segment(2 * L, L);
  p.y.imag() = h.segment(3 * L, L);
  return p;
}

struct QuadraticForm {
  double s = 0.0;
  RVec v;
  RMat R_bar;
  // unscaled blocks as displayed, kept for inspection
  RMat K1, K2, K3, K4_1, K4_2;

  int dim() const { return static_cast<int>(v.size()); }

  double evaluate(const RVec& xi) const {
    if (xi.size() != v.size()) throw InvalidArgument("QuadraticForm: xi has wrong length");
    return s + v.dot(xi) + xi.dot(R_bar * xi);
  }
};

namespace detail {

// [[Re P, Im P], [-Im P, Re P]]
inline RMat realify(const CMat& P) {
  const int L = static_cast<int>(P.rows());
  RMat K(2 * L, 2 * L);
  K << P.real(), P.imag(), -P.imag(), P.real();
  return K;
}

inline RMat diag_of(const RVec& d) { return d.asDiagonal(); }

}  // namespace detail

/// Builds (s, v, R_bar) for W. s = a0(W); v and R_bar are linear in W.
inline QuadraticForm decompose(const HermitianMatrix& Wh, const ChannelScenario& sc,
                               const SystemParams& params) {
  detail::check_dims(Wh, params, "decompose");
  sc.validate(params);
  const int L = params.L;
  const double pg = params.p_over_gamma();
  const double e = sc.eps, h = sc.eta;
  const CMat& W = Wh.matrix();
  const CMat Wc = W.conjugate();
  const CVec& f = sc.f_bar;
  const CVec& g = sc.g_bar;
  const CMat F = f * f.adjoint();
  const CMat G = g.conjugate() * g.transpose();  // (g*)(g*)^H
  const CMat Sig = params.sigma2.cast<cplx>().asDiagonal();
  const CMat WS = W.cwiseProduct(Sig);

  QuadraticForm qf;
  qf.s = a0(Wh, sc, params);

  qf.K1 = detail::realify(Wc.cwiseProduct(G));
  qf.K4_1 = RMat::Zero(2 * L, 2 * L);
  qf.K4_1.topLeftCorner(L, L) = WS.real();
  qf.K4_1.bottomRightCorner(L, L) = WS.real();
  qf.K4_2 = detail::realify(W.cwiseProduct(F.conjugate()));

  const CVec a = W * f.cwiseProduct(g.conjugate());
  const CVec b = Wc * f.conjugate().cwiseProduct(g);
  const CMat Hgf = W.cwiseProduct(g * f.transpose());
  const CMat Hfg = Wc.cwiseProduct(f * g.transpose());
  using detail::diag_of;
  qf.K2.resize(2 * L, 2 * L);
  qf.K2 << diag_of(a.real()) + Hgf.real(), diag_of(b.imag()) + Hgf.imag(),
      diag_of(a.imag()) + Hgf.imag(), diag_of(b.real()) - Hgf.real();
  qf.K3.resize(2 * L, 2 * L);
  qf.K3 << diag_of(a.real()) + Hfg.real(), diag_of(a.imag()) + Hfg.imag(),
      diag_of(b.imag()) + Hfg.imag(), diag_of(b.real()) - Hfg.real();

  RMat R(4 * L, 4 * L);
  R << e * e * pg * qf.K1, e * h * pg * qf.K2, e * h * pg * qf.K3,
      -h * h * qf.K4_1 + h * h * pg * qf.K4_2;
  R *= 0.5;
  qf.R_bar = 0.5 * (R + R.transpose());

  const CVec vx = W.cwiseProduct(G.conjugate()) * f;
  const CVec vy = Wc.cwiseProduct(F) * g;
  const RVec ws = WS.diagonal().real();
  qf.v.resize(4 * L);
  qf.v << e * pg * vx.real(), e * pg * vx.imag(),
      -h * ws.cwiseProduct(g.real()) + h * pg * vy.real(),
      -h * ws.cwiseProduct(g.imag()) + h * pg * vy.imag();
  qf.v *= std::numbers::sqrt2;
  return qf;
}

/// Smallest lambda >= 0 with lambda I + R_bar PSD.
inline double splus_neg(const RMat& R_bar) {
  Eigen::SelfAdjointEigenSolver<RMat> es(R_bar, Eigen::EigenvaluesOnly);
  return std::max(0.0, -es.eigenvalues()(0));
}

struct BernsteinProblem {
  conic::ConicProgram program;
  conic::HermitianParam param{1};
  ChannelScenario scenario;
  SystemParams params;
  std::uint64_t scenario_hash = 0;
  double rho = 0.0;
  int lambda_index = 0;
  int delta_index = 0;

  CMat W_of(const RVec& x) const { return param.to_matrix(x.head(param.num_vars())); }

  /// Constraint-1 value with delta and lambda at their smallest admissible
  /// values; positively homogeneous in W apart from the -sigma_v^2 in s.
  double homogeneous(const HermitianMatrix& W) const {
    const auto qf = decompose(W, scenario, params);
    const double ln = std::log(1.0 / rho);
    const double delta = std::sqrt(qf.R_bar.squaredNorm() + 0.5 * qf.v.squaredNorm());
    return qf.s + params.sigma_v2 + qf.R_bar.trace() - 2.0 * std::sqrt(ln) * delta -
           2.0 * ln * splus_neg(qf.R_bar);
  }
  double margin(const HermitianMatrix& W) const {
    return homogeneous(W) - params.sigma_v2;
  }
};

/// minimize E[D].W over (W, lambda, delta) subject to
///   Tr(R_bar) - 2 sqrt(ln(1/rho)) delta + 2 ln(rho) lambda + s >= 0,
///   sqrt(||R_bar||_F^2 + ||v||^2 / 2) <= delta,
///   lambda I + R_bar PSD,  lambda >= 0,  W PSD.
inline BernsteinProblem build_b2_problem(const ChannelScenario& sc,
                                         const SystemParams& params) {
  params.validate();
  sc.validate(params);
  const int L = params.L;
  const int m = 4 * L;
  BernsteinProblem bp;
  bp.param = conic::HermitianParam(L);
  bp.scenario = sc;
  bp.params = params;
  bp.scenario_hash = scenario_hash(sc, params);
  bp.rho = params.rho;

  const int nw = bp.param.num_vars();
  const int n = nw + 2;
  bp.lambda_index = nw;
  bp.delta_index = nw + 1;
  const double ln = std::log(1.0 / params.rho);

  const int nsv = conic::svec_dim(m);
  RMat trace_row = RMat::Zero(1, n);
  RMat soc = RMat::Zero(1 + nsv + m, n);
  RMat lmi = RMat::Zero(nsv, n);
  for (int k = 0; k < nw; ++k) {
    const auto qf = decompose(HermitianMatrix(bp.param.basis(k)), sc, params);
    trace_row(0, k) = qf.s + params.sigma_v2 + qf.R_bar.trace();
    const RVec sv = conic::svec(qf.R_bar);
    soc.block(1, k, nsv, 1) = sv;
    soc.block(1 + nsv, k, m, 1) = qf.v / std::numbers::sqrt2;
    lmi.col(k) = sv;
  }
  trace_row(0, bp.lambda_index) = -2.0 * ln;
  trace_row(0, bp.delta_index) = -2.0 * std::sqrt(ln);
  soc(0, bp.delta_index) = 1.0;
  lmi.col(bp.lambda_index) = conic::svec(RMat::Identity(m, m));

  conic::ConicProgram prog(n);
  prog.set_var_name(bp.lambda_index, "lambda");
  prog.set_var_name(bp.delta_index, "delta");
  RVec c = RVec::Zero(n);
  c.head(nw) = linear_coefficients(bp.param, avg_power_matrix(sc, params).matrix());
  prog.set_objective(c);
  prog.add_block(conic::Cone::nonneg(1), trace_row, RVec::Constant(1, -params.sigma_v2),
                 "bernstein");
  prog.add_block(conic::Cone::soc(1 + nsv + m), soc, RVec::Zero(1 + nsv + m), "delta_soc");
  prog.add_block(conic::Cone::psd(m), lmi, RVec::Zero(nsv), "lambda_lmi");
  RMat lam = RMat::Zero(1, n);
  lam(0, bp.lambda_index) = 1.0;
  prog.add_block(conic::Cone::nonneg(1), lam, RVec::Zero(1), "lambda_nonneg");
  RMat emb = RMat::Zero(conic::svec_dim(2 * L), n);
  emb.leftCols(nw) = conic::embed_operator(bp.param);
  prog.add_block(conic::Cone::psd(2 * L), emb, RVec::Zero(conic::svec_dim(2 * L)), "W_psd");
  bp.program = std::move(prog);
  return bp;
}

}  // namespace qrelay
