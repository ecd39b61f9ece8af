#pragma once

// Monte-Carlo outage rate of a fixed design over channel perturbations.

#include <qrelay/bernstein.hpp>
#include <qrelay/model.hpp>
#include <qrelay/rng.hpp>

#include <string>

namespace qrelay {

enum class OutageMode { Exact, Quadratic };

inline std::string to_string(OutageMode m) {
  return m == OutageMode::Exact ? "exact" : "quadratic";
}

/// Relative band around Q = 0 counted as meeting the target. A design that
/// meets the SNR with equality (error-free channels) would otherwise land on
/// either side by roundoff.
inline constexpr double kBoundaryTol = 1e-9;

/// Fraction of n_samples perturbations that miss the SNR target.
/// Exact mode counts exact_Q > tol; quadratic mode counts a degree-2 margin
/// s + v^T xi + xi^T R_bar xi below -tol, with tol = kBoundaryTol sigma_v^2.
inline double outage_estimate(const HermitianMatrix& W, const ChannelScenario& sc,
                              const SystemParams& params, int n_samples,
                              std::uint64_t seed, OutageMode mode = OutageMode::Exact) {
  if (n_samples < 1) throw InvalidArgument("outage_estimate: n_samples must be >= 1");
  detail::check_dims(W, params, "outage_estimate");
  sc.validate(params);
  Philox rng(seed, hash_tag("outage"));
  const double tol = kBoundaryTol * params.sigma_v2;
  long misses = 0;
  if (mode == OutageMode::Exact) {
    for (int k = 0; k < n_samples; ++k) {
      const Perturbation p = sample_perturbation(params.L, rng);
      if (exact_Q(W, p, sc, params) > tol) ++misses;
    }
  } else {
    const QuadraticForm qf = decompose(W, sc, params);
    for (int k = 0; k < n_samples; ++k) {
      const Perturbation p = sample_perturbation(params.L, rng);
      if (qf.evaluate(xi_from_pert(p)) < -tol) ++misses;
    }
  }
  return static_cast<double>(misses) / n_samples;
}

inline double outage_estimate(const CVec& w, const ChannelScenario& sc,
                              const SystemParams& params, int n_samples,
                              std::uint64_t seed, OutageMode mode = OutageMode::Exact) {
  return outage_estimate(HermitianMatrix::outer(w), sc, params, n_samples, seed, mode);
}

}  // namespace qrelay
