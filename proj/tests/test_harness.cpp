#include <qrelay/harness/analysis.hpp>
#include <qrelay/harness/design.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qrelay;
using namespace qrelay::harness;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.L = 3;
  c.gamma_db = {6.0, 12.0};
  c.channels = 6;
  c.perts = 400;
  c.rand_samples = 100;
  c.eps2 = c.eta2 = 0.01;
  c.seed = 7;
  c.threads = 2;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "qrelay_test_harness";
  fs::create_directories(dir);
  const auto p = dir / name;
  fs::remove(p);
  return p;
}

}  // namespace

TEST_CASE("config json merge") {
  ExperimentConfig c;
  merge_json(nlohmann::json::parse(R"({"L": 2, "methods": ["M2", "B2"], "rho": 0.05,
                                       "gamma_db": [3, 9], "sigma2_hat": 0.3})"),
             c);
  CHECK(c.L == 2);
  CHECK(c.methods == std::vector<Method>{Method::M2, Method::B2});
  CHECK(c.rho == 0.05);
  CHECK(c.gamma_db == std::vector<double>{3.0, 9.0});
  CHECK(c.sigma2_hat == 0.3);
  CHECK(c.has_mismatch());
  CHECK(c.eval_params(3.0).sigma_v2 == 0.3);
  CHECK(c.eval_params(3.0).sigma2(0) == 0.3);
  CHECK(c.params(3.0).sigma_v2 == 0.25);

  merge_json(nlohmann::json::parse(R"({"sigma2_hat": null})"), c);
  CHECK_FALSE(c.sigma2_hat);
  CHECK_THROWS_AS(merge_json(nlohmann::json::parse(R"({"rhoo": 0.1})"), c), InvalidArgument);
  CHECK_THROWS(merge_json(nlohmann::json::parse(R"({"methods": ["M3"]})"), c));

  nlohmann::json j = c;
  ExperimentConfig d;
  merge_json(j, d);
  CHECK(nlohmann::json(d) == j);

  ExperimentConfig bad;
  bad.rho = 1.5;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("method and mode names") {
  for (Method m : {Method::NR, Method::M4, Method::M2, Method::B2})
    CHECK(parse_method(to_string(m)) == m);
  for (ValidateMode v : {ValidateMode::Auto, ValidateMode::Exact, ValidateMode::Quadratic})
    CHECK(parse_validate_mode(to_string(v)) == v);
  CHECK(mode_for(ValidateMode::Auto, 0.1) == OutageMode::Exact);
  CHECK(mode_for(ValidateMode::Auto, 0.0004) == OutageMode::Quadratic);
  CHECK(mode_for(ValidateMode::Exact, 0.0004) == OutageMode::Exact);
}

TEST_CASE("gamma list parsing") {
  CHECK(parse_gamma_list("3:3:15") == std::vector<double>{3, 6, 9, 12, 15});
  CHECK(parse_gamma_list("18") == std::vector<double>{18});
  CHECK(parse_gamma_list("3, 7.5,9") == std::vector<double>{3, 7.5, 9});
  CHECK_THROWS(parse_gamma_list("3:0:9"));
  CHECK(split_list("a,,b, c") == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("csv formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0, 123456789.125})
    CHECK(parse_double(fmt(v)) == v);
  CHECK(fmt(std::nan("")) == "NaN");
  CHECK(std::isnan(parse_double("NaN")));
  CHECK(fmt(0.1) == "0.1");
  CHECK(split_csv_line("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});

  const auto p = scratch("rt.csv");
  CsvTable t{{"x", "y"}, {{"1", "NaN"}, {"2", "0.5"}}};
  write_csv(p.string(), t);
  const auto back = read_csv(p.string());
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(back.column("y") == 1);
}

TEST_CASE("satisfaction bins") {
  CHECK(satisfaction_bin(1.0) == 0);
  CHECK(satisfaction_bin(0.9995) == 0);
  CHECK(satisfaction_bin(0.999) == 1);
  CHECK(satisfaction_bin(0.9985) == 1);
  CHECK(satisfaction_bin(0.991) == kNumBins - 2);
  CHECK(satisfaction_bin(0.9905) == kNumBins - 2);
  CHECK(satisfaction_bin(0.990) == kNumBins - 1);
  CHECK(satisfaction_bin(0.0) == kNumBins - 1);
  CHECK(satisfaction_bin(1.0 - 0.001) == 1);
  CHECK(bin_label(0) == "(0.999,1.000]");
  CHECK(bin_label(1) == "(0.998,0.999]");
  CHECK(bin_label(kNumBins - 1) == "[0,0.990]");
  CHECK(kNumBins == 11);
}

TEST_CASE("design rows round-trip through csv") {
  ResultRow r;
  r.method = Method::B2;
  r.gamma_db = 12;
  r.channel = 4;
  r.channel_seed = 0xdeadbeefcafeull;
  r.status = "Optimal";
  r.objective = 1.0 / 3.0;
  r.rank = 2;
  r.source = "randomized";
  r.rand_feasible = 37;
  r.rand_samples = 100;
  r.power = 0.4;
  r.outage_exact = 0.01;
  r.outage_quadratic = 0.02;
  r.w = CVec(2);
  r.w << cplx(0.1, -0.2), cplx(1.0 / 7.0, 0.0);
  const auto f = to_fields(r, 2);
  CHECK(f.size() == design_header(2).size());
  const auto b = from_fields(f, 2);
  CHECK(to_fields(b, 2) == f);
  CHECK(b.w == r.w);
  CHECK(b.has_design());

  ResultRow inf;
  inf.status = "Infeasible";
  const auto bi = from_fields(to_fields(inf, 2), 2);
  CHECK_FALSE(bi.optimal());
  CHECK(std::isnan(bi.power));
}

TEST_CASE("design runs are byte-identical and resumable") {
  const auto cfg = small_config();
  const auto a = scratch("a.csv"), b = scratch("b.csv");
  run_design_to_csv(cfg, a.string());
  auto cfg1 = cfg;
  cfg1.threads = 1;
  run_design_to_csv(cfg1, b.string());
  const std::string full = slurp(a);
  CHECK(full == slurp(b));
  CHECK(read_csv(a.string()).rows.size() == cfg.methods.size() * cfg.gamma_db.size() * 6);

  // keep the header, a few complete rows and half of the next one
  std::size_t cut = 0;
  for (int k = 0; k < 5; ++k) cut = full.find('\n', cut) + 1;
  cut += 20;
  const auto c = scratch("c.csv");
  {
    std::ofstream out(c, std::ios::binary);
    out << full.substr(0, cut);
  }
  const auto rows = run_design_to_csv(cfg, c.string());
  CHECK(rows.size() == cfg.methods.size() * cfg.gamma_db.size() * 6);
  std::set<std::string> keys;
  for (const auto& r : rows) keys.insert(row_key(r));
  CHECK(keys.size() == rows.size());

  // row order may differ after a resume; the contents may not
  auto lines = [](const std::string& s) {
    std::multiset<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.insert(l);
    return out;
  };
  CHECK(lines(slurp(c)) == lines(full));

  // a second resume is a no-op
  const std::string before = slurp(c);
  run_design_to_csv(cfg, c.string());
  CHECK(slurp(c) == before);
}

TEST_CASE("error-free scenario makes every method agree") {
  auto cfg = small_config();
  cfg.eps2 = cfg.eta2 = 0.0;
  cfg.channels = 4;
  const auto rows = run_design(cfg);
  std::map<std::pair<double, int>, std::vector<double>> obj;
  for (const auto& r : rows)
    if (r.optimal()) obj[{r.gamma_db, r.channel}].push_back(r.objective);
  REQUIRE_FALSE(obj.empty());
  for (const auto& [k, v] : obj) {
    CHECK(v.size() == cfg.methods.size());
    for (double o : v) CHECK(o == Approx(v.front()).epsilon(1e-6));
  }
  for (const auto& s : validate(cfg, rows)) {
    for (double sat : s.satisfaction) CHECK(sat == 1.0);
    CHECK(s.outage_events == 0);
  }
}

TEST_CASE("mismatch without overrides reproduces validate") {
  const auto cfg = small_config();
  const auto rows = run_design(cfg);
  const auto v = validate(cfg, rows);
  const auto m = mismatch(cfg, rows);
  REQUIRE(v.size() == m.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(v[i].satisfaction == m[i].satisfaction);
    CHECK(v[i].bins == m[i].bins);
  }

  auto worse = cfg;
  worse.eps2_hat = 4.0 * cfg.eps2;
  worse.sigma2_hat = 1.2 * cfg.sigma2;
  const auto mw = mismatch(worse, rows);
  double sv = 0.0, sw = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t k = 0; k < v[i].satisfaction.size(); ++k) {
      sv += v[i].satisfaction[k];
      sw += mw[i].satisfaction[k];
    }
  CHECK(sw < sv);
}

TEST_CASE("tables report rank and feasibility") {
  const auto cfg = small_config();
  const auto rows = run_design(cfg);
  const auto ts = tables(cfg, rows);
  REQUIRE(ts.size() == cfg.methods.size() * cfg.gamma_db.size());
  for (const auto& t : ts) {
    CHECK(t.n_channels == cfg.channels);
    CHECK(t.feasibility == Approx(double(t.n_feasible) / t.n_channels));
    CHECK(std::isnan(t.rand_feasible[0]));
    double sum = 0.0;
    for (int k = 0; k < cfg.L; ++k) {
      if (t.n_feasible > 0) sum += t.rank_rate[k];
      const bool empty = t.n_feasible == 0 || t.rank_rate[k] == 0.0;
      if (k >= 1 && empty) CHECK(std::isnan(t.rand_feasible[k]));
      if (k >= 1 && !empty) {
        CHECK(t.rand_feasible[k] > 0.0);
        CHECK(t.rand_feasible[k] <= 1.0);
      }
    }
    if (t.n_feasible > 0) CHECK(sum == Approx(1.0));
  }
  const auto csv = tables_table(ts, cfg.L);
  CHECK(csv.header.size() == 6 + cfg.L + (cfg.L - 1) + 3);
  for (const auto& r : csv.rows) CHECK(r.size() == csv.header.size());
}

TEST_CASE("feasibility does not grow with the SNR target") {
  auto cfg = small_config();
  cfg.gamma_db = {3.0, 9.0, 15.0};
  cfg.channels = 20;
  cfg.perts = 10;
  cfg.rand_samples = 20;
  cfg.eps2 = cfg.eta2 = 0.03;
  const auto ts = tables(cfg, run_design(cfg));
  for (Method m : cfg.methods) {
    double prev = 1.0 + 1e-12;
    for (const auto& t : ts) {
      if (t.method != m) continue;
      CHECK(t.feasibility <= prev + 0.02);
      prev = t.feasibility;
    }
  }
}

TEST_CASE("tightness sweep is reproducible") {
  ExperimentConfig cfg;
  cfg.tightness_instances = 500;
  const auto a = tightness(cfg), b = tightness(cfg);
  REQUIRE(a.size() == 24);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].mean_moment_rhs == b[i].mean_moment_rhs);
    CHECK(a[i].violations == b[i].violations);
    if (a[i].in_window) CHECK(a[i].violations == 0);
  }
  CHECK(tightness_table(a).rows.size() == 24);
}
