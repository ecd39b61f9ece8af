#pragma once

// Rank-one weight extraction from a relaxed optimum by Gaussian randomization.
//
// Every restriction here has margin(tW) = t h(W) - sigma_v^2 for t > 0, with
// h positively homogeneous, so a candidate direction W is feasible after
// scaling iff h(W) > 0 and the smallest feasible scale is sigma_v^2 / h(W).

#include <qrelay/bernstein.hpp>
#include <qrelay/conic/rank.hpp>
#include <qrelay/moment.hpp>
#include <qrelay/rng.hpp>

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace qrelay {

class NoFeasibleCandidate : public std::runtime_error {
 public:
  explicit NoFeasibleCandidate(int n)
      : std::runtime_error("extract: none of " + std::to_string(n) +
                           " randomized candidates is feasible"),
        n_samples(n) {}
  int n_samples;
};

struct SafeChecker {
  std::function<double(const HermitianMatrix&)> homogeneous;
  double sigma_v2 = 0.0;
  HermitianMatrix objective;

  double margin(const HermitianMatrix& W) const { return homogeneous(W) - sigma_v2; }

  /// Smallest t > 0 with margin(tW) >= 0, if any.
  std::optional<double> min_scale(const HermitianMatrix& W) const {
    const double h = homogeneous(W);
    if (!(h > 0.0)) return std::nullopt;
    return sigma_v2 / h;
  }
};

inline SafeChecker make_checker(const SafeSOCProblem& sp, const ChannelScenario& sc,
                                const SystemParams& params) {
  return {[&sp](const HermitianMatrix& W) { return sp.homogeneous(W); }, sp.sigma_v2,
          avg_power_matrix(sc, params)};
}

inline SafeChecker make_checker(const BernsteinProblem& bp) {
  return {[&bp](const HermitianMatrix& W) { return bp.homogeneous(W); },
          bp.params.sigma_v2, avg_power_matrix(bp.scenario, bp.params)};
}

enum class ExtractionSource { EigRankOne, Randomized };

inline std::string to_string(ExtractionSource s) {
  return s == ExtractionSource::EigRankOne ? "eig" : "randomized";
}

struct ExtractionResult {
  CVec w;
  double power = 0.0;
  int n_feasible = 0;
  int n_samples = 0;
  ExtractionSource source = ExtractionSource::EigRankOne;
  double scale = 1.0;
  double margin = 0.0;
};

inline ExtractionResult extract(const HermitianMatrix& W_opt, const SafeChecker& chk,
                                int n_samples = 1000, std::uint64_t seed = 0) {
  if (n_samples < 1) throw InvalidArgument("extract: n_samples must be >= 1");
  if (W_opt.dim() != chk.objective.dim())
    throw InvalidArgument("extract: W and objective dimensions differ");
  const int L = W_opt.dim();
  Eigen::SelfAdjointEigenSolver<CMat> es(W_opt.matrix());
  const RVec lam = es.eigenvalues().cwiseMax(0.0);
  const CMat& V = es.eigenvectors();

  ExtractionResult r;
  r.n_samples = n_samples;
  if (conic::rank_from_eigenvalues(lam) == 1) {
    r.source = ExtractionSource::EigRankOne;
    r.w = std::sqrt(lam(L - 1)) * V.col(L - 1);
    r.n_feasible = 1;
    // The solver may leave the margin a hair below zero; lift it by the
    // minimal scale in that case.
    const HermitianMatrix ww = HermitianMatrix::outer(r.w);
    if (chk.margin(ww) < 0.0) {
      if (const auto t = chk.min_scale(ww)) {
        r.scale = *t;
        r.w *= std::sqrt(*t);
      }
    }
  } else {
    r.source = ExtractionSource::Randomized;
    const CMat F = V * lam.cwiseSqrt().cast<cplx>().asDiagonal();
    Philox rng(seed, hash_tag("extract"));
    double best = std::numeric_limits<double>::infinity();
    CVec xi(L);
    for (int k = 0; k < n_samples; ++k) {
      for (int i = 0; i < L; ++i) xi(i) = rng.complex_normal();
      const CVec cand = F * xi;
      const HermitianMatrix cw = HermitianMatrix::outer(cand);
      const auto t = chk.min_scale(cw);
      if (!t) continue;
      ++r.n_feasible;
      const double p = *t * inner(chk.objective, cw);
      if (p < best) {
        best = p;
        r.w = std::sqrt(*t) * cand;
        r.scale = *t;
      }
    }
    if (r.n_feasible == 0) throw NoFeasibleCandidate(n_samples);
  }
  const HermitianMatrix ww = HermitianMatrix::outer(r.w);
  r.power = inner(chk.objective, ww);
  r.margin = chk.margin(ww);
  return r;
}

}  // namespace qrelay
