#pragma once

// Two-hop AF relay network: channels, SNR, and the exact quartic
// outage polynomial Q(W, x, y).

#include <qrelay/rng.hpp>
#include <qrelay/types.hpp>

#include <utility>

namespace qrelay {

/// Draws f_bar, g_bar ~ CN(0, I) from the stream keyed by `seed`.
inline ChannelScenario sample_channel(const SystemParams& params,
                                      std::uint64_t seed, double eps = 0.0,
                                      double eta = 0.0) {
  if (params.L < 1) throw InvalidArgument("sample_channel: L must be >= 1");
  Philox rng(seed, 0);
  ChannelScenario sc;
  sc.f_bar.resize(params.L);
  sc.g_bar.resize(params.L);
  for (int i = 0; i < params.L; ++i) sc.f_bar(i) = rng.complex_normal();
  for (int i = 0; i < params.L; ++i) sc.g_bar(i) = rng.complex_normal();
  sc.eps = eps;
  sc.eta = eta;
  return sc;
}

inline Perturbation sample_perturbation(int L, Philox& rng) {
  Perturbation p{CVec(L), CVec(L)};
  for (int i = 0; i < L; ++i) p.x(i) = rng.complex_normal();
  for (int i = 0; i < L; ++i) p.y(i) = rng.complex_normal();
  return p;
}

/// f = f_bar + eps x, g = g_bar + eta y.
inline std::pair<CVec, CVec> realized_channels(const ChannelScenario& sc,
                                               const Perturbation& p) {
  if (p.x.size() != sc.f_bar.size() || p.y.size() != sc.g_bar.size())
    throw InvalidArgument("realized_channels: perturbation length mismatch");
  return {sc.f_bar + sc.eps * p.x, sc.g_bar + sc.eta * p.y};
}

/// Receiver SNR for AF weights w over the realized channels (f, g).
inline double snr(const CVec& w, const CVec& f, const CVec& g,
                  const SystemParams& params) {
  const int L = params.L;
  if (w.size() != L || f.size() != L || g.size() != L)
    throw InvalidArgument("snr: vector lengths must equal L");
  const CVec u = f.cwiseProduct(g.conjugate());
  const double num = params.P_t * std::norm(w.dot(u));
  double den = params.sigma_v2;
  for (int i = 0; i < L; ++i)
    den += std::norm(w(i)) * std::norm(g(i)) * params.sigma2(i);
  return num / den;
}

namespace detail {

// sigma_v^2 + W.(Sigma o gg^H) - (P/gamma) W.((ff^H) o (g* g*^H)),
// using (ff^H) o (g* g*^H) = u u^H with u = f o conj(g).
inline double q_value(const CMat& W, const CVec& f, const CVec& g,
                      const SystemParams& params) {
  const int L = params.L;
  double noise = 0.0;
  for (int i = 0; i < L; ++i)
    noise += W(i, i).real() * params.sigma2(i) * std::norm(g(i));
  const CVec u = f.cwiseProduct(g.conjugate());
  const double signal = u.dot(W * u).real();
  return params.sigma_v2 + noise - params.p_over_gamma() * signal;
}

inline void check_dims(const HermitianMatrix& W, const SystemParams& params,
                       const char* who) {
  if (W.dim() != params.L)
    throw InvalidArgument(std::string(who) + ": W must be L x L");
}

}  // namespace detail

/// Exact quartic outage polynomial. Q >= 0 means the SNR target is missed.
inline double exact_Q(const HermitianMatrix& W, const Perturbation& p,
                      const ChannelScenario& sc, const SystemParams& params) {
  detail::check_dims(W, params, "exact_Q");
  const auto [f, g] = realized_channels(sc, p);
  return detail::q_value(W.matrix(), f, g, params);
}

/// Estimated-channel part with opposite sign: a0(W) = -Q(W, 0, 0).
inline double a0(const HermitianMatrix& W, const ChannelScenario& sc,
                 const SystemParams& params) {
  detail::check_dims(W, params, "a0");
  return -detail::q_value(W.matrix(), sc.f_bar, sc.g_bar, params);
}

/// E[D] = P_t Diag(|f_bar|^2 + eps^2) + Sigma.
inline HermitianMatrix avg_power_matrix(const ChannelScenario& sc,
                                        const SystemParams& params) {
  RVec d(params.L);
  for (int i = 0; i < params.L; ++i)
    d(i) = params.P_t * (std::norm(sc.f_bar(i)) + sc.eps * sc.eps) +
           params.sigma2(i);
  return HermitianMatrix::diagonal(d);
}

/// Instantaneous relay power matrix D = P_t I o (ff^H) + Sigma.
inline HermitianMatrix power_matrix(const CVec& f, const SystemParams& params) {
  RVec d(params.L);
  for (int i = 0; i < params.L; ++i)
    d(i) = params.P_t * std::norm(f(i)) + params.sigma2(i);
  return HermitianMatrix::diagonal(d);
}

}  // namespace qrelay
