// qrelay: experiment driver for robust AF relay beamforming designs.
//
//   qrelay design    --out runs/a --gamma-db 3:3:15 --eps2 0.06 --eta2 0.06
//   qrelay validate  --out runs/a
//   qrelay tables    --out runs/a
//   qrelay mismatch  --out runs/a --sigma2-hat 0.265
//   qrelay tightness --out runs/t --instances 10000

#include <qrelay/harness/analysis.hpp>
#include <qrelay/harness/manifest.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace qrelay;
using namespace qrelay::harness;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, methods, gamma_db, validate_mode;
  std::optional<double> rho, eps2, eta2, pt, sigma2_hat, eps2_hat, eta2_hat;
  std::optional<int> channels, perts, rand_samples, threads, instances;
};

void add_options(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "JSON config file");
  sub->add_option("--seed", o.seed, "master seed");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--methods", o.methods, "comma list from NR,M4,M2,B2");
  sub->add_option("--gamma-db", o.gamma_db, "SNR targets in dB: list or lo:step:hi");
  sub->add_option("--rho", o.rho, "target outage rate");
  sub->add_option("--eps2", o.eps2, "transmit-side error variance");
  sub->add_option("--eta2", o.eta2, "receive-side error variance");
  sub->add_option("--pt", o.pt, "source power P_t (linear)");
  sub->add_option("--channels", o.channels, "channel realizations");
  sub->add_option("--perts", o.perts, "perturbations per outage estimate");
  sub->add_option("--rand-samples", o.rand_samples, "randomization candidates");
  sub->add_option("--threads", o.threads, "worker threads (0: all cores)");
  sub->add_option("--validate-mode", o.validate_mode, "auto, exact or quadratic");
  sub->add_option("--sigma2-hat", o.sigma2_hat, "actual noise variance (mismatch)");
  sub->add_option("--eps2-hat", o.eps2_hat, "actual transmit-side error variance (mismatch)");
  sub->add_option("--eta2-hat", o.eta2_hat, "actual receive-side error variance (mismatch)");
  sub->add_option("--instances", o.instances, "random quadratics (tightness)");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig c;
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw InvalidArgument("cannot open config " + o.config);
    merge_json(nlohmann::json::parse(in), c);
  }
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out_dir = *o.out;
  if (o.methods) {
    c.methods.clear();
    for (const auto& m : split_list(*o.methods)) c.methods.push_back(parse_method(m));
  }
  if (o.gamma_db) c.gamma_db = parse_gamma_list(*o.gamma_db);
  if (o.validate_mode) c.validate_mode = parse_validate_mode(*o.validate_mode);
  if (o.rho) c.rho = *o.rho;
  if (o.eps2) c.eps2 = *o.eps2;
  if (o.eta2) c.eta2 = *o.eta2;
  if (o.pt) c.P_t = *o.pt;
  if (o.sigma2_hat) c.sigma2_hat = *o.sigma2_hat;
  if (o.eps2_hat) c.eps2_hat = *o.eps2_hat;
  if (o.eta2_hat) c.eta2_hat = *o.eta2_hat;
  if (o.channels) c.channels = *o.channels;
  if (o.perts) c.perts = *o.perts;
  if (o.rand_samples) c.rand_samples = *o.rand_samples;
  if (o.threads) c.threads = *o.threads;
  if (o.instances) c.tightness_instances = *o.instances;
  c.validate();
  return c;
}

std::vector<ResultRow> design_rows(const ExperimentConfig& cfg) {
  return run_design_to_csv(cfg, (fs::path(cfg.out_dir) / "design.csv").string());
}

void print_summary(const std::vector<SatisfactionSummary>& ss) {
  for (const auto& s : ss) {
    char mean[32];
    std::snprintf(mean, sizeof mean, "%.4f", s.mean);
    std::cout << to_string(s.method) << " gamma=" << fmt(s.gamma_db) << "dB  channels="
              << s.n_channels << "  mean satisfaction=" << mean
              << "  outage events=" << s.outage_events << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Outage-constrained AF relay beamforming experiments"};
  app.require_subcommand(1);
  Overrides o;
  std::map<std::string, CLI::App*> subs;
  for (const char* name : {"design", "validate", "tables", "mismatch", "tightness"}) {
    subs[name] = app.add_subcommand(name);
    add_options(subs[name], o);
  }
  subs["design"]->description("solve each method per channel and gamma; writes design.csv");
  subs["validate"]->description("SNR-satisfaction histogram over mutually feasible channels");
  subs["tables"]->description("feasibility, rank and randomization rates");
  subs["mismatch"]->description("re-evaluate stored designs under noise/error overrides");
  subs["tightness"]->description("moment vs Bernstein right-hand-side dominance sweep");
  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig cfg = resolve(o);
    fs::create_directories(cfg.out_dir);
    const auto t0 = std::chrono::steady_clock::now();
    const std::string cmd = app.get_subcommands().front()->get_name();
    const fs::path dir(cfg.out_dir);
    std::vector<std::string> outputs;
    auto emit = [&](const std::string& name, const CsvTable& t) {
      write_csv((dir / name).string(), t);
      outputs.push_back(name);
    };

    if (cmd == "design") {
      const auto rows = design_rows(cfg);
      outputs.push_back("design.csv");
      emit("power.csv", tables_table(tables(cfg, rows), cfg.L));
      std::cout << rows.size() << " rows in " << (dir / "design.csv").string() << '\n';
    } else if (cmd == "validate") {
      const auto ss = validate(cfg, design_rows(cfg));
      emit("validate_hist.csv", histogram_table(ss));
      emit("validate_summary.csv", satisfaction_table(ss));
      print_summary(ss);
    } else if (cmd == "tables") {
      emit("tables.csv", tables_table(tables(cfg, design_rows(cfg)), cfg.L));
    } else if (cmd == "mismatch") {
      const auto ss = mismatch(cfg, design_rows(cfg));
      emit("mismatch_hist.csv", histogram_table(ss));
      emit("mismatch_summary.csv", satisfaction_table(ss));
      print_summary(ss);
    } else if (cmd == "tightness") {
      const auto ts = tightness(cfg);
      emit("tightness.csv", tightness_table(ts));
      int inside = 0;
      for (const auto& t : ts)
        if (t.in_window) inside += t.violations;
      std::cout << "violations inside window: " << inside << '\n';
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest((dir / ("manifest_" + cmd + ".json")).string(),
                   make_manifest(cmd, cfg, outputs, secs));
  } catch (const std::exception& e) {
    std::cerr << "qrelay: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
