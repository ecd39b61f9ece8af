#pragma once

// Post-processing of design rows: satisfaction histograms, feasibility and
// rank tables, mismatch re-evaluation, and the restriction dominance sweep.

#include <qrelay/harness/design.hpp>
#include <qrelay/tightness.hpp>

#include <array>
#include <map>
#include <set>

namespace qrelay::harness {

/// Lower edges of the satisfaction bins: (0.999, 1], (0.998, 0.999], ...,
/// (0.990, 0.991], then [0, 0.990].
inline constexpr std::array<double, 10> kBinEdges{0.999, 0.998, 0.997, 0.996, 0.995,
                                                  0.994, 0.993, 0.992, 0.991, 0.990};
inline constexpr int kNumBins = static_cast<int>(kBinEdges.size()) + 1;

inline int satisfaction_bin(double sat) {
  for (int k = 0; k < static_cast<int>(kBinEdges.size()); ++k)
    if (sat > kBinEdges[k] + 1e-12) return k;
  return kNumBins - 1;
}

inline std::string bin_label(int k) {
  char buf[48];
  if (k == 0) return "(0.999,1.000]";
  if (k == kNumBins - 1) return "[0,0.990]";
  std::snprintf(buf, sizeof buf, "(%.3f,%.3f]", kBinEdges[k], kBinEdges[k - 1]);
  return buf;
}

/// Auto evaluates the exact SNR, except on the dominance window where the
/// comparison is made on the degree-2 model the restrictions are built on.
inline OutageMode mode_for(ValidateMode v, double rho) {
  if (v == ValidateMode::Exact) return OutageMode::Exact;
  if (v == ValidateMode::Quadratic) return OutageMode::Quadratic;
  return in_rho_window(rho) ? OutageMode::Quadratic : OutageMode::Exact;
}

/// Channels at gamma_db on which every configured method produced a design.
inline std::set<int> common_channels(const ExperimentConfig& cfg,
                                     const std::vector<ResultRow>& rows, double gamma_db) {
  std::map<int, int> hits;
  for (const auto& r : rows)
    if (r.gamma_db == gamma_db && r.has_design()) ++hits[r.channel];
  std::set<int> out;
  for (auto [c, n] : hits)
    if (n == static_cast<int>(cfg.methods.size())) out.insert(c);
  return out;
}

struct SatisfactionSummary {
  Method method = Method::NR;
  double gamma_db = 0.0;
  OutageMode mode = OutageMode::Exact;
  int n_channels = 0;
  std::array<int, kNumBins> bins{};
  double mean = std::nan("");
  double min = std::nan("");
  int outage_events = 0;  // satisfaction below 1 - rho
  std::vector<double> satisfaction;
};

/// Satisfaction over the mutually feasible channels. `rate` maps a row to
/// its outage rate.
template <class Rate>
std::vector<SatisfactionSummary> summarize(const ExperimentConfig& cfg,
                                           const std::vector<ResultRow>& rows, Rate&& rate) {
  std::vector<SatisfactionSummary> out;
  for (double g : cfg.gamma_db) {
    const auto common = common_channels(cfg, rows, g);
    for (Method m : cfg.methods) {
      SatisfactionSummary s;
      s.method = m;
      s.gamma_db = g;
      s.mode = mode_for(cfg.validate_mode, cfg.rho);
      double sum = 0.0, mn = 1.0;
      for (const auto& r : rows) {
        if (r.method != m || r.gamma_db != g || !common.count(r.channel)) continue;
        const double sat = 1.0 - rate(r, s.mode);
        s.satisfaction.push_back(sat);
        ++s.bins[satisfaction_bin(sat)];
        sum += sat;
        mn = std::min(mn, sat);
        if (sat < 1.0 - cfg.rho) ++s.outage_events;
      }
      s.n_channels = static_cast<int>(s.satisfaction.size());
      if (s.n_channels > 0) {
        s.mean = sum / s.n_channels;
        s.min = mn;
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

inline std::vector<SatisfactionSummary> validate(const ExperimentConfig& cfg,
                                                 const std::vector<ResultRow>& rows) {
  return summarize(cfg, rows, [](const ResultRow& r, OutageMode m) {
    return m == OutageMode::Exact ? r.outage_exact : r.outage_quadratic;
  });
}

/// Re-estimates outage of the stored designs under the configured noise and
/// error overrides, without re-solving.
inline std::vector<SatisfactionSummary> mismatch(const ExperimentConfig& cfg,
                                                 const std::vector<ResultRow>& rows) {
  std::map<std::string, double> rate;
  std::vector<const ResultRow*> todo;
  for (const auto& r : rows)
    if (r.has_design() && r.w.size() == cfg.L) todo.push_back(&r);
  std::vector<double> val(todo.size());
  const int workers = std::max(1, cfg.worker_count());
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < todo.size(); i += workers) {
        const ResultRow& r = *todo[i];
        ChannelScenario sc = channel_scenario(cfg, r.channel);
        sc.eps = std::sqrt(cfg.eval_eps2());
        sc.eta = std::sqrt(cfg.eval_eta2());
        val[i] = outage_estimate(r.w, sc, cfg.eval_params(r.gamma_db), cfg.perts,
                                 perturbation_seed(cfg, r.channel),
                                 mode_for(cfg.validate_mode, cfg.rho));
      }
    });
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < todo.size(); ++i) rate[row_key(*todo[i])] = val[i];
  return summarize(cfg, rows, [&rate](const ResultRow& r, OutageMode) {
    return rate.at(row_key(r));
  });
}

inline CsvTable histogram_table(const std::vector<SatisfactionSummary>& ss) {
  CsvTable t{{"method", "gamma_db", "mode", "bin", "count"}, {}};
  for (const auto& s : ss)
    for (int k = 0; k < kNumBins; ++k)
      t.rows.push_back({to_string(s.method), fmt(s.gamma_db), to_string(s.mode), bin_label(k),
                        std::to_string(s.bins[k])});
  return t;
}

inline CsvTable satisfaction_table(const std::vector<SatisfactionSummary>& ss) {
  CsvTable t{{"method", "gamma_db", "mode", "n_channels", "mean_satisfaction",
              "min_satisfaction", "outage_events"},
             {}};
  for (const auto& s : ss)
    t.rows.push_back({to_string(s.method), fmt(s.gamma_db), to_string(s.mode),
                      std::to_string(s.n_channels), fmt(s.mean), fmt(s.min),
                      std::to_string(s.outage_events)});
  return t;
}

struct TableRow {
  Method method = Method::NR;
  double gamma_db = 0.0;
  int n_channels = 0;
  int n_feasible = 0;
  int n_failed = 0;  // neither optimal nor certified infeasible
  double feasibility = std::nan("");
  std::vector<double> rank_rate;       // index k-1: rank k among feasible
  std::vector<double> rand_feasible;   // index k-1: mean candidate feasibility, rank k
  int n_common = 0;
  double mean_power_common = std::nan("");
  double mean_objective_common = std::nan("");
};

inline std::vector<TableRow> tables(const ExperimentConfig& cfg,
                                    const std::vector<ResultRow>& rows) {
  std::vector<TableRow> out;
  for (double g : cfg.gamma_db) {
    const auto common = common_channels(cfg, rows, g);
    for (Method m : cfg.methods) {
      TableRow t;
      t.method = m;
      t.gamma_db = g;
      std::vector<int> rank_n(cfg.L, 0);
      std::vector<double> rand_sum(cfg.L, 0.0);
      double psum = 0.0, osum = 0.0;
      for (const auto& r : rows) {
        if (r.method != m || r.gamma_db != g) continue;
        ++t.n_channels;
        if (r.optimal()) {
          ++t.n_feasible;
          if (r.rank >= 1 && r.rank <= cfg.L) {
            ++rank_n[r.rank - 1];
            if (r.rank >= 2 && r.rand_samples > 0)
              rand_sum[r.rank - 1] += static_cast<double>(r.rand_feasible) / r.rand_samples;
          }
        } else if (r.status != "Infeasible") {
          ++t.n_failed;
        }
        if (common.count(r.channel)) {
          ++t.n_common;
          psum += r.power;
          osum += r.objective;
        }
      }
      if (t.n_channels > 0) t.feasibility = static_cast<double>(t.n_feasible) / t.n_channels;
      for (int k = 0; k < cfg.L; ++k) {
        t.rank_rate.push_back(t.n_feasible > 0 ? static_cast<double>(rank_n[k]) / t.n_feasible
                                               : std::nan(""));
        t.rand_feasible.push_back(k >= 1 && rank_n[k] > 0 ? rand_sum[k] / rank_n[k]
                                                          : std::nan(""));
      }
      if (t.n_common > 0) {
        t.mean_power_common = psum / t.n_common;
        t.mean_objective_common = osum / t.n_common;
      }
      out.push_back(std::move(t));
    }
  }
  return out;
}

inline CsvTable tables_table(const std::vector<TableRow>& ts, int L) {
  CsvTable t{{"method", "gamma_db", "n_channels", "n_feasible", "n_failed", "feasibility"}, {}};
  for (int k = 1; k <= L; ++k) t.header.push_back("rank" + std::to_string(k));
  for (int k = 2; k <= L; ++k) t.header.push_back("rand_feasible_rank" + std::to_string(k));
  for (const char* h : {"n_common", "mean_power_common", "mean_objective_common"})
    t.header.push_back(h);
  for (const auto& r : ts) {
    std::vector<std::string> f{to_string(r.method), fmt(r.gamma_db), std::to_string(r.n_channels),
                               std::to_string(r.n_feasible), std::to_string(r.n_failed),
                               fmt(r.feasibility)};
    for (int k = 0; k < L; ++k) f.push_back(fmt(r.rank_rate[k]));
    for (int k = 1; k < L; ++k) f.push_back(fmt(r.rand_feasible[k]));
    f.push_back(std::to_string(r.n_common));
    f.push_back(fmt(r.mean_power_common));
    f.push_back(fmt(r.mean_objective_common));
    t.rows.push_back(std::move(f));
  }
  return t;
}

/// Random Gaussian quadratic: symmetric A and a with N(0,1) entries.
inline GaussianQuadratic random_quadratic(int m, Philox& rng) {
  GaussianQuadratic q;
  q.A.resize(m, m);
  q.a.resize(m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) q.A(i, j) = q.A(j, i) = rng.normal();
  for (int i = 0; i < m; ++i) q.a(i) = rng.normal();
  return q;
}

/// n points strictly inside the dominance window, log-spaced.
inline std::vector<double> window_grid(int n) {
  const auto [lo, hi] = rho_window();
  std::vector<double> g;
  for (int k = 1; k <= n; ++k)
    g.push_back(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * k / (n + 1)));
  return g;
}

struct TightnessRow {
  double rho = 0.0;
  bool in_window = false;
  int instances = 0;
  int violations = 0;
  double mean_moment_rhs = 0.0;
  double mean_bernstein_rhs = 0.0;
  double min_ratio = std::numeric_limits<double>::infinity();
};

/// Dominance sweep on the window grid plus a few points outside it. The
/// same instances are reused for every rho.
inline std::vector<TightnessRow> tightness(const ExperimentConfig& cfg,
                                           std::vector<double> rhos = {}) {
  if (rhos.empty()) {
    rhos = window_grid(20);
    for (double r : {0.001, 0.01, 0.1, 0.3}) rhos.push_back(r);
  }
  Philox rng(cfg.seed, hash_tag("tightness"));
  std::vector<GaussianQuadratic> qs;
  for (int i = 0; i < cfg.tightness_instances; ++i) {
    const int m = 1 + static_cast<int>(rng() % static_cast<unsigned>(cfg.tightness_max_dim));
    qs.push_back(random_quadratic(m, rng));
  }
  std::vector<TightnessRow> out;
  for (double rho : rhos) {
    TightnessRow t;
    t.rho = rho;
    t.in_window = in_rho_window(rho);
    for (const auto& q : qs) {
      const auto d = check_dominance(q, rho);
      ++t.instances;
      if (!d.dominated) ++t.violations;
      t.mean_moment_rhs += d.moment_rhs;
      t.mean_bernstein_rhs += d.bernstein_rhs;
      if (d.bernstein_rhs > 0.0) t.min_ratio = std::min(t.min_ratio, d.moment_rhs / d.bernstein_rhs);
    }
    t.mean_moment_rhs /= t.instances;
    t.mean_bernstein_rhs /= t.instances;
    out.push_back(t);
  }
  return out;
}

inline CsvTable tightness_table(const std::vector<TightnessRow>& ts) {
  CsvTable t{{"rho", "in_window", "instances", "violations", "mean_moment_rhs",
              "mean_bernstein_rhs", "min_ratio"},
             {}};
  for (const auto& r : ts)
    t.rows.push_back({fmt(r.rho), r.in_window ? "1" : "0", std::to_string(r.instances),
                      std::to_string(r.violations), fmt(r.mean_moment_rhs),
                      fmt(r.mean_bernstein_rhs), fmt(r.min_ratio)});
  return t;
}

}  // namespace qrelay::harness
