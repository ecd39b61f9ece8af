#pragma once

// Dense primal-dual interior-point solver for small conic programs.
//
// Homogeneous self-dual embedding with Nesterov-Todd scaling and a
// Mehrotra predictor-corrector, following the layout of CVXOPT's conelp.
// Standard form used internally:
//
//   minimize    c^T x
//   subject to  G x + s = h,  A x = b,  s in K
//
// where each inequality block A_k x + b_k in K_k contributes G = -A_k,
// h = b_k and each Zero block contributes an equality row set.

#include <qrelay/conic/cones.hpp>
#include <qrelay/conic/program.hpp>

#include <algorithm>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace qrelay::conic {

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIter, NumericalFailure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::MaxIter: return "MaxIter";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

struct SolverConfig {
  double tol = 1e-8;
  int max_iter = 200;
  double step_fraction = 0.99;
  /// Accepted on breakdown or iteration limit if the best iterate meets it.
  double reduced_tol = 1e-6;
};

struct Solution {
  SolveStatus status = SolveStatus::NumericalFailure;
  RVec x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double dual_objective = std::numeric_limits<double>::quiet_NaN();
  /// Cone-membership violation of A_k x + b_k, one entry per block.
  std::vector<double> block_residuals;
  /// Per-block dual vectors. For Optimal these are the multipliers; for
  /// Infeasible they form a normalized Farkas certificate
  /// (sum_k A_k^T z_k = 0, sum_k b_k^T z_k = -1, z_k in K_k^*).
  std::vector<RVec> block_duals;
  int iterations = 0;
  double primal_residual = std::numeric_limits<double>::quiet_NaN();
  double dual_residual = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();
  double relative_gap = std::numeric_limits<double>::quiet_NaN();

  bool optimal() const { return status == SolveStatus::Optimal; }
};

/// Pluggable backend boundary: anything with this signature can stand in for
/// the built-in solver.
using SolverBackend = std::function<Solution(const ConicProgram&, const SolverConfig&)>;

namespace detail {

class InteriorPoint {
 public:
  InteriorPoint(const ConicProgram& prog, const SolverConfig& cfg)
      : prog_(prog), cfg_(cfg) {
    if (!(cfg.tol > 0.0)) throw InvalidArgument("SolverConfig: tol must be > 0");
    if (!(cfg.reduced_tol >= cfg.tol))
      throw InvalidArgument("SolverConfig: reduced_tol must be >= tol");
    n_ = prog.num_vars();
    int m = 0, p = 0;
    std::vector<Cone> cones;
    for (const auto& blk : prog.blocks()) {
      if (blk.cone.type == ConeType::Zero) {
        p += blk.cone.dim();
      } else {
        m += blk.cone.dim();
        cones.push_back(blk.cone);
      }
    }
    K_ = ProductCone(cones);
    G_.resize(m, n_);
    h_.resize(m);
    A_.resize(p, n_);
    b_.resize(p);
    int mo = 0, po = 0;
    for (const auto& blk : prog.blocks()) {
      const int d = blk.cone.dim();
      if (blk.cone.type == ConeType::Zero) {
        A_.middleRows(po, d) = blk.A;
        b_.segment(po, d) = -blk.b;
        po += d;
      } else {
        G_.middleRows(mo, d) = -blk.A;
        h_.segment(mo, d) = blk.b;
        mo += d;
      }
    }
    c_ = prog.objective();
  }

  Solution run() {
    Solution sol;
    const int m = K_.dim();
    const int p = static_cast<int>(b_.size());
    if (m == 0) {
      sol.status = SolveStatus::NumericalFailure;
      return sol;
    }
    const RVec e = K_.identity();
    const double resx0 = std::max(1.0, c_.norm());
    const double resy0 = std::max(1.0, b_.norm());
    const double resz0 = std::max(1.0, h_.norm());

    // Initial point from two least-squares KKT solves with W = I.
    std::vector<ConeScaling> W;
    set_identity_scaling(W);
    if (!factor(W)) return fail(sol);
    RVec x, y, z, s;
    {
      RVec ux, uy, uz;
      solve_kkt(W, RVec::Zero(n_), b_, h_, ux, uy, uz);
      x = ux;
      s = -uz;
      solve_kkt(W, -c_, RVec::Zero(p), RVec::Zero(m), ux, uy, uz);
      y = uy;
      z = uz;
    }
    shift_into_cone(s, e);
    shift_into_cone(z, e);
    double tau = 1.0, kappa = 1.0;

    for (int it = 0; it <= cfg_.max_iter; ++it) {
      sol.iterations = it;
      const double gap = s.dot(z);
      const double mu = (gap + tau * kappa) / (K_.degree() + 1);

      const RVec rx = A_.transpose() * y + G_.transpose() * z + c_ * tau;
      const RVec ry = A_ * x - b_ * tau;
      const RVec rz = G_ * x + s - h_ * tau;
      const double cx = c_.dot(x), by = b_.dot(y), hz = h_.dot(z);
      const double rt = kappa + cx + by + hz;

      const double pcost = cx / tau;
      const double dcost = -(by + hz) / tau;
      const double pres = std::max(ry.norm() / resy0, rz.norm() / resz0) / tau;
      const double dres = rx.norm() / resx0 / tau;
      const double true_gap = gap / (tau * tau);
      double relgap = std::numeric_limits<double>::infinity();
      if (pcost < 0.0) relgap = true_gap / -pcost;
      else if (dcost > 0.0) relgap = true_gap / dcost;

      sol.primal_residual = pres;
      sol.dual_residual = dres;
      sol.gap = true_gap;
      sol.relative_gap = relgap;

      const double score =
          std::max({pres, dres, std::min(true_gap, relgap)});
      if (score < best_.score) best_ = {score, x / tau, y / tau, z / tau, dcost, pres, dres, true_gap, relgap};

      const double tol = cfg_.tol;
      if (pres <= tol && dres <= tol && (true_gap <= tol || relgap <= tol)) {
        finish_optimal(sol, x / tau, y / tau, z / tau);
        sol.dual_objective = dcost + prog_.objective_offset();
        return sol;
      }
      if (hz + by < 0.0) {
        const double pinf =
            (A_.transpose() * y + G_.transpose() * z).norm() / resx0 / -(hz + by);
        if (pinf <= tol) {
          finish_infeasible(sol, y / -(hz + by), z / -(hz + by));
          return sol;
        }
      }
      if (cx < 0.0) {
        const double dinf = std::max((A_ * x).norm() / resy0,
                                     (G_ * x + s).norm() / resz0) / -cx;
        if (dinf <= tol) {
          sol.status = SolveStatus::Unbounded;
          sol.x = x / -cx;
          return sol;
        }
      }
      if (it == cfg_.max_iter) break;

      const RVec lambda = K_.compute_scaling(s, z, W);
      if (!lambda.allFinite() || !factor(W)) return fallback(sol);

      // Direction for the tau column, shared by both solves.
      RVec vx, vy, vz;
      solve_kkt(W, -c_, b_, h_, vx, vy, vz);

      struct Step {
        RVec dx, dy, dz, ds_scaled, dz_scaled;
        double dtau = 0.0, dkappa = 0.0;
      };
      auto newton = [&](double eta, const RVec& ds_target, double dk_target,
                        Step& st) -> bool {
        const RVec dst = K_.jordan_div(lambda, ds_target);
        RVec ux, uy, uz;
        const RVec bz = eta * (-rz) - K_.apply(W, ProductCone::Op::WT, dst);
        solve_kkt(W, -eta * rx, eta * (-ry), bz, ux, uy, uz);
        const double rtau = -rt;  // -c^T x - b^T y - h^T z - kappa
        const double denom = -c_.dot(vx) - b_.dot(vy) - h_.dot(vz) + kappa / tau;
        const double numer = -eta * rtau + dk_target / tau + c_.dot(ux) +
                             b_.dot(uy) + h_.dot(uz);
        if (!(std::abs(denom) > 0.0) || !std::isfinite(numer)) return false;
        st.dtau = numer / denom;
        st.dx = ux + st.dtau * vx;
        st.dy = uy + st.dtau * vy;
        st.dz = uz + st.dtau * vz;
        st.dkappa = (dk_target - kappa * st.dtau) / tau;
        st.dz_scaled = K_.apply(W, ProductCone::Op::W, st.dz);
        st.ds_scaled = dst - st.dz_scaled;
        return st.dx.allFinite() && st.dz.allFinite() && st.ds_scaled.allFinite();
      };
      auto step_length = [&](const Step& st) {
        double a = std::min(K_.max_step(lambda, st.ds_scaled),
                            K_.max_step(lambda, st.dz_scaled));
        if (st.dtau < 0.0) a = std::min(a, -tau / st.dtau);
        if (st.dkappa < 0.0) a = std::min(a, -kappa / st.dkappa);
        return a;
      };

      // Predictor.
      Step aff;
      const RVec ll = K_.jordan(lambda, lambda);
      if (!newton(1.0, -ll, -tau * kappa, aff)) return fallback(sol);
      const double a_aff = std::min(1.0, step_length(aff));
      const double sigma = std::pow(1.0 - a_aff, 3);

      // Corrector.
      Step cmb;
      const RVec ds_target = -ll - K_.jordan(aff.ds_scaled, aff.dz_scaled) +
                             sigma * mu * e;
      const double dk_target = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
      if (!newton(1.0 - sigma, ds_target, dk_target, cmb)) return fallback(sol);
      const double alpha = std::min(1.0, cfg_.step_fraction * step_length(cmb));
      if (!(alpha > 0.0)) return fallback(sol);

      x += alpha * cmb.dx;
      y += alpha * cmb.dy;
      z += alpha * cmb.dz;
      s += alpha * K_.apply(W, ProductCone::Op::WT, cmb.ds_scaled);
      tau += alpha * cmb.dtau;
      kappa += alpha * cmb.dkappa;
      if (!(tau > 0.0) || !(kappa > 0.0) || K_.min_eig(s) <= 0.0 ||
          K_.min_eig(z) <= 0.0)
        return fallback(sol);
    }
    if (best_.score <= cfg_.reduced_tol) return fallback(sol);
    sol.status = SolveStatus::MaxIter;
    sol.x = x / tau;
    sol.objective = c_.dot(sol.x) + prog_.objective_offset();
    fill_residuals(sol);
    return sol;
  }

 private:
  Solution& fail(Solution& sol) {
    sol.status = SolveStatus::NumericalFailure;
    return sol;
  }

  // Rounding can stall the last few digits; fall back to the best iterate seen.
  Solution& fallback(Solution& sol) {
    if (!(best_.score <= cfg_.reduced_tol)) return fail(sol);
    finish_optimal(sol, best_.x, best_.y, best_.z);
    sol.primal_residual = best_.pres;
    sol.dual_residual = best_.dres;
    sol.gap = best_.gap;
    sol.relative_gap = best_.relgap;
    sol.dual_objective = best_.dcost + prog_.objective_offset();
    return sol;
  }

  struct BestIterate {
    double score = std::numeric_limits<double>::infinity();
    RVec x, y, z;
    double dcost = 0.0;
    double pres = 0.0, dres = 0.0, gap = 0.0, relgap = 0.0;
  };
  BestIterate best_;

  void shift_into_cone(RVec& v, const RVec& e) const {
    const double t = -K_.min_eig(v);
    if (t >= -1e-8 * std::max(1.0, v.norm())) v += (1.0 + t) * e;
  }

  void set_identity_scaling(std::vector<ConeScaling>& W) const {
    W.assign(K_.slices().size(), {});
    for (std::size_t c = 0; c < K_.slices().size(); ++c) {
      const auto& sl = K_.slices()[c];
      switch (sl.cone.type) {
        case ConeType::Nonneg:
          W[c].d = RVec::Ones(sl.dim());
          break;
        case ConeType::SOC:
          W[c].beta = 1.0;
          W[c].v = RVec::Zero(sl.dim());
          W[c].v(0) = 1.0;
          break;
        case ConeType::PSD:
          W[c].R = RMat::Identity(sl.cone.size, sl.cone.size);
          W[c].Rinv = W[c].R;
          break;
        case ConeType::Zero:
          break;
      }
    }
  }

  // Factors the reduced system [H A^T; A 0] with H = G^T W^{-1} W^{-T} G.
  bool factor(const std::vector<ConeScaling>& W) {
    Gs_ = K_.apply_cols(W, ProductCone::Op::WinvT, G_);
    RMat H = Gs_.transpose() * Gs_;
    const int p = static_cast<int>(b_.size());
    const double reg = 1e-13 * std::max(1.0, H.diagonal().maxCoeff());
    if (p == 0) {
      H.diagonal().array() += reg;
      llt_.compute(H);
      use_llt_ = llt_.info() == Eigen::Success;
      if (!use_llt_) {
        lu_.compute(H);
      }
    } else {
      RMat Kr = RMat::Zero(n_ + p, n_ + p);
      Kr.topLeftCorner(n_, n_) = H;
      Kr.topLeftCorner(n_, n_).diagonal().array() += reg;
      Kr.topRightCorner(n_, p) = A_.transpose();
      Kr.bottomLeftCorner(p, n_) = A_;
      Kr.bottomRightCorner(p, p).diagonal().array() -= reg;
      use_llt_ = false;
      lu_.compute(Kr);
    }
    return Gs_.allFinite();
  }

  // Solves [0 A^T G^T; A 0 0; G 0 -W^T W] [ux; uy; uz] = [bx; by; bz].
  // Works in the scaled variables uz~ = W uz, where the system reads
  // [0 A^T Gs^T; A 0 0; Gs 0 -I] with Gs = W^{-T} G, and refines there.
  void solve_kkt(const std::vector<ConeScaling>& W, const RVec& bx,
                 const RVec& by, const RVec& bz, RVec& ux, RVec& uy,
                 RVec& uz) const {
    const RVec bzs = K_.apply(W, ProductCone::Op::WinvT, bz);
    RVec uzs;
    solve_scaled(bx, by, bzs, ux, uy, uzs);
    double prev = std::numeric_limits<double>::infinity();
    for (int r = 0; r < 4; ++r) {
      const RVec ex = bx - (A_.transpose() * uy + Gs_.transpose() * uzs);
      const RVec ey = by - A_ * ux;
      const RVec ez = bzs - (Gs_ * ux - uzs);
      const double res = std::sqrt(ex.squaredNorm() + ey.squaredNorm() + ez.squaredNorm());
      if (!(res < 0.5 * prev) && r > 0) break;
      prev = res;
      RVec cx, cy, cz;
      solve_scaled(ex, ey, ez, cx, cy, cz);
      ux += cx;
      uy += cy;
      uzs += cz;
    }
    uz = K_.apply(W, ProductCone::Op::Winv, uzs);
  }

  void solve_scaled(const RVec& bx, const RVec& by, const RVec& bzs, RVec& ux,
                    RVec& uy, RVec& uzs) const {
    const RVec rhs_x = bx + Gs_.transpose() * bzs;
    const int p = static_cast<int>(b_.size());
    if (p == 0) {
      ux = use_llt_ ? RVec(llt_.solve(rhs_x)) : RVec(lu_.solve(rhs_x));
      uy = RVec::Zero(0);
    } else {
      RVec rhs(n_ + p);
      rhs << rhs_x, by;
      const RVec sol = lu_.solve(rhs);
      ux = sol.head(n_);
      uy = sol.tail(p);
    }
    uzs = Gs_ * ux - bzs;
  }

  void fill_residuals(Solution& sol) const {
    sol.block_residuals.clear();
    for (std::size_t k = 0; k < prog_.blocks().size(); ++k)
      sol.block_residuals.push_back(cone_violation(
          prog_.blocks()[k].cone, prog_.block_value(static_cast<int>(k), sol.x)));
  }

  // Equality rows were stored as A_k x = -b_k, so their multipliers flip sign.
  void split_duals(Solution& sol, const RVec& y, const RVec& z) const {
    sol.block_duals.clear();
    int mo = 0, po = 0;
    for (const auto& blk : prog_.blocks()) {
      const int d = blk.cone.dim();
      if (blk.cone.type == ConeType::Zero) {
        sol.block_duals.push_back(-y.segment(po, d));
        po += d;
      } else {
        sol.block_duals.push_back(z.segment(mo, d));
        mo += d;
      }
    }
  }

  void finish_optimal(Solution& sol, const RVec& x, const RVec& y,
                      const RVec& z) const {
    sol.status = SolveStatus::Optimal;
    sol.x = x;
    sol.objective = c_.dot(x) + prog_.objective_offset();
    fill_residuals(sol);
    split_duals(sol, y, z);
  }

  void finish_infeasible(Solution& sol, const RVec& y, const RVec& z) const {
    sol.status = SolveStatus::Infeasible;
    split_duals(sol, y, z);
  }

  const ConicProgram& prog_;
  SolverConfig cfg_;
  int n_ = 0;
  ProductCone K_;
  RMat G_, A_;
  RVec h_, b_, c_;
  RMat Gs_;
  Eigen::LLT<RMat> llt_;
  Eigen::PartialPivLU<RMat> lu_;
  bool use_llt_ = true;
};

}  // namespace detail

/// Solves `prog` with the built-in interior-point method. Deterministic.
inline Solution solve(const ConicProgram& prog, const SolverConfig& cfg = {}) {
  detail::InteriorPoint ipm(prog, cfg);
  return ipm.run();
}

}  // namespace qrelay::conic
