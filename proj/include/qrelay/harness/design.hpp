#pragma once

// Power-minimizing designs over a seeded channel battery.

#include <qrelay/bernstein.hpp>
#include <qrelay/conic/rank.hpp>
#include <qrelay/conic/solver.hpp>
#include <qrelay/extract.hpp>
#include <qrelay/harness/config.hpp>
#include <qrelay/harness/csv.hpp>
#include <qrelay/moment.hpp>
#include <qrelay/outage.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <thread>
#include <tuple>

namespace qrelay::harness {

struct ResultRow {
  Method method = Method::NR;
  double gamma_db = 0.0;
  int channel = 0;
  std::uint64_t channel_seed = 0;
  std::string status;  // solver status
  double objective = std::nan("");
  int rank = 0;
  std::string source;  // eig | randomized | none (no feasible candidate) | empty
  int rand_feasible = 0;
  int rand_samples = 0;
  double power = std::nan("");
  double outage_exact = std::nan("");
  double outage_quadratic = std::nan("");
  CVec w;

  bool optimal() const { return status == "Optimal"; }
  /// Solved and a weight vector was extracted.
  bool has_design() const { return optimal() && std::isfinite(power); }
};

inline std::vector<std::string> design_header(int L) {
  std::vector<std::string> h{"method", "gamma_db", "channel", "channel_seed", "status",
                             "objective", "rank", "source", "rand_feasible",
                             "rand_samples", "power", "outage_exact",
                             "outage_quadratic"};
  for (int i = 0; i < L; ++i) {
    h.push_back("w" + std::to_string(i) + "_re");
    h.push_back("w" + std::to_string(i) + "_im");
  }
  return h;
}

inline std::vector<std::string> to_fields(const ResultRow& r, int L) {
  std::vector<std::string> f{to_string(r.method), fmt(r.gamma_db), std::to_string(r.channel),
                             std::to_string(r.channel_seed), r.status, fmt(r.objective),
                             std::to_string(r.rank), r.source,
                             std::to_string(r.rand_feasible), std::to_string(r.rand_samples),
                             fmt(r.power), fmt(r.outage_exact), fmt(r.outage_quadratic)};
  for (int i = 0; i < L; ++i) {
    const bool have = r.w.size() == L;
    f.push_back(have ? fmt(r.w(i).real()) : "NaN");
    f.push_back(have ? fmt(r.w(i).imag()) : "NaN");
  }
  return f;
}

inline ResultRow from_fields(const std::vector<std::string>& f, int L) {
  if (static_cast<int>(f.size()) != 13 + 2 * L)
    throw InvalidArgument("design csv: wrong field count");
  ResultRow r;
  r.method = parse_method(f[0]);
  r.gamma_db = parse_double(f[1]);
  r.channel = std::stoi(f[2]);
  r.channel_seed = std::stoull(f[3]);
  r.status = f[4];
  r.objective = parse_double(f[5]);
  r.rank = std::stoi(f[6]);
  r.source = f[7];
  r.rand_feasible = std::stoi(f[8]);
  r.rand_samples = std::stoi(f[9]);
  r.power = parse_double(f[10]);
  r.outage_exact = parse_double(f[11]);
  r.outage_quadratic = parse_double(f[12]);
  CVec w(L);
  bool finite = true;
  for (int i = 0; i < L; ++i) {
    w(i) = cplx(parse_double(f[13 + 2 * i]), parse_double(f[14 + 2 * i]));
    finite = finite && std::isfinite(w(i).real()) && std::isfinite(w(i).imag());
  }
  if (finite) r.w = w;
  return r;
}

inline std::uint64_t channel_seed(const ExperimentConfig& cfg, int c) {
  return derive_seed(cfg.seed, "channel", static_cast<std::uint64_t>(c));
}
inline std::uint64_t perturbation_seed(const ExperimentConfig& cfg, int c) {
  return derive_seed(cfg.seed, "perturbation", static_cast<std::uint64_t>(c));
}
inline std::uint64_t extraction_seed(const ExperimentConfig& cfg, int c) {
  return derive_seed(cfg.seed, "extraction", static_cast<std::uint64_t>(c));
}

/// Nominal scenario for channel index c (independent of gamma and method).
inline ChannelScenario channel_scenario(const ExperimentConfig& cfg, int c) {
  return sample_channel(cfg.params(cfg.gamma_db.front()), channel_seed(cfg, c),
                        std::sqrt(cfg.eps2), std::sqrt(cfg.eta2));
}

struct MethodSolution {
  conic::Solution sol;
  HermitianMatrix W;
  std::optional<ExtractionResult> extraction;
  bool no_candidate = false;
};

/// Solves one method on one scenario and extracts a weight vector.
/// NR is the second-order program with the error scales set to zero.
inline MethodSolution solve_method(Method m, const ChannelScenario& sc,
                                   const SystemParams& params, int rand_samples,
                                   std::uint64_t seed,
                                   const conic::SolverConfig& scfg = {}) {
  MethodSolution out;
  auto finish = [&](const auto& problem, const SafeChecker& chk) {
    out.sol = conic::solve(problem.program, scfg);
    if (!out.sol.optimal()) return;
    out.W = HermitianMatrix(problem.W_of(out.sol.x));
    try {
      out.extraction = extract(out.W, chk, rand_samples, seed);
    } catch (const NoFeasibleCandidate&) {
      out.no_candidate = true;
    }
  };
  if (m == Method::B2) {
    const auto bp = build_b2_problem(sc, params);
    finish(bp, make_checker(bp));
  } else {
    ChannelScenario s = sc;
    if (m == Method::NR) s.eps = s.eta = 0.0;
    const auto order = m == Method::M4 ? MomentOrder::Fourth : MomentOrder::Second;
    const auto sp = build_problem(s, params, order);
    finish(sp, make_checker(sp, s, params));
  }
  return out;
}

/// Computes every (gamma, method) row for channel c.
inline std::vector<ResultRow> design_channel(const ExperimentConfig& cfg, int c,
                                             const std::set<std::string>& skip = {}) {
  const ChannelScenario sc = channel_scenario(cfg, c);
  std::vector<ResultRow> rows;
  for (double gdb : cfg.gamma_db) {
    const SystemParams params = cfg.params(gdb);
    for (Method m : cfg.methods) {
      ResultRow r;
      r.method = m;
      r.gamma_db = gdb;
      r.channel = c;
      r.channel_seed = channel_seed(cfg, c);
      r.rand_samples = cfg.rand_samples;
      if (skip.count(to_string(m) + "|" + fmt(gdb) + "|" + std::to_string(r.channel_seed)))
        continue;
      const auto ms = solve_method(m, sc, params, cfg.rand_samples, extraction_seed(cfg, c));
      r.status = conic::to_string(ms.sol.status);
      if (ms.sol.optimal()) {
        r.objective = ms.sol.objective;
        r.rank = conic::rank_of(ms.W);
        if (ms.extraction) {
          const auto& ex = *ms.extraction;
          r.source = to_string(ex.source);
          r.rand_feasible = ex.source == ExtractionSource::Randomized ? ex.n_feasible : 0;
          r.power = ex.power;
          r.w = ex.w;
          const auto ps = perturbation_seed(cfg, c);
          r.outage_exact = outage_estimate(ex.w, sc, params, cfg.perts, ps, OutageMode::Exact);
          r.outage_quadratic =
              outage_estimate(ex.w, sc, params, cfg.perts, ps, OutageMode::Quadratic);
        } else {
          r.source = "none";
        }
      }
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

inline std::string row_key(const ResultRow& r) {
  return to_string(r.method) + "|" + fmt(r.gamma_db) + "|" + std::to_string(r.channel_seed);
}

/// Runs channels [0, cfg.channels) on a worker pool, handing each channel's
/// rows to `sink` in channel order.
template <class Sink>
void for_each_channel(const ExperimentConfig& cfg, const std::set<std::string>& skip,
                      Sink&& sink) {
  const int workers = std::max(1, std::min(cfg.worker_count(), cfg.channels));
  const int batch = 4 * workers;
  for (int start = 0; start < cfg.channels; start += batch) {
    const int end = std::min(cfg.channels, start + batch);
    std::vector<std::vector<ResultRow>> out(end - start);
    std::vector<std::exception_ptr> errs(workers);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (int c = start + w; c < end; c += workers) out[c - start] = design_channel(cfg, c, skip);
        } catch (...) {
          errs[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errs)
      if (e) std::rethrow_exception(e);
    for (auto& rows : out) sink(rows);
  }
}

/// In-memory design run.
inline std::vector<ResultRow> run_design(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ResultRow> all;
  for_each_channel(cfg, {}, [&](std::vector<ResultRow>& rows) {
    for (auto& r : rows) all.push_back(std::move(r));
  });
  return all;
}

inline std::vector<ResultRow> read_design(const std::string& path, int L) {
  const CsvTable t = read_csv(path);
  if (t.header != design_header(L))
    throw InvalidArgument("design csv: header does not match L=" + std::to_string(L));
  std::vector<ResultRow> rows;
  for (const auto& f : t.rows) rows.push_back(from_fields(f, L));
  return rows;
}

/// Writes `path` row by row. Rows already in the file are kept and not
/// recomputed; a truncated final line is discarded first.
inline std::vector<ResultRow> run_design_to_csv(const ExperimentConfig& cfg,
                                                const std::string& path) {
  cfg.validate();
  std::vector<ResultRow> all;
  std::set<std::string> done;
  if (std::filesystem::exists(path) && std::filesystem::file_size(path) > 0) {
    all = read_design(path, cfg.L);
    for (const auto& r : all) done.insert(row_key(r));
    CsvTable t{design_header(cfg.L), {}};
    for (const auto& r : all) t.rows.push_back(to_fields(r, cfg.L));
    write_csv(path, t);
  } else {
    write_csv(path, CsvTable{design_header(cfg.L), {}});
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  for_each_channel(cfg, done, [&](std::vector<ResultRow>& rows) {
    for (auto& r : rows) {
      out << join_csv(to_fields(r, cfg.L)) << '\n';
      all.push_back(std::move(r));
    }
    out.flush();
  });
  return all;
}

}  // namespace qrelay::harness
