// Designs relay weights for one random channel with each safe approximation
// and prints the transmit power and Monte-Carlo SNR satisfaction.
//
//   single_channel [gamma_db] [eps2] [seed]

#include <qrelay/harness/design.hpp>

#include <cstdio>
#include <cstdlib>

using namespace qrelay;
using namespace qrelay::harness;

int main(int argc, char** argv) {
  ExperimentConfig cfg;
  cfg.gamma_db = {argc > 1 ? std::atof(argv[1]) : 12.0};
  cfg.eps2 = cfg.eta2 = argc > 2 ? std::atof(argv[2]) : 0.01;
  cfg.seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 1;
  cfg.perts = 10000;
  cfg.validate();

  const double gdb = cfg.gamma_db.front();
  const auto params = cfg.params(gdb);
  const auto sc = channel_scenario(cfg, 0);
  std::printf("L=%d  P_t=%g  gamma=%g dB  rho=%g  eps2=eta2=%g\n\n", cfg.L, cfg.P_t, gdb,
              cfg.rho, cfg.eps2);
  std::printf("%-4s %-12s %10s %5s %-11s %10s %10s\n", "", "status", "power", "rank",
              "source", "sat_exact", "sat_quad");

  for (Method m : cfg.methods) {
    const auto ms = solve_method(m, sc, params, cfg.rand_samples, extraction_seed(cfg, 0));
    std::printf("%-4s %-12s", to_string(m).c_str(), conic::to_string(ms.sol.status));
    if (!ms.extraction) {
      std::printf("%s\n", ms.no_candidate ? "  no feasible candidate" : "");
      continue;
    }
    const auto& ex = *ms.extraction;
    const auto seed = perturbation_seed(cfg, 0);
    const double oe = outage_estimate(ex.w, sc, params, cfg.perts, seed, OutageMode::Exact);
    const double oq = outage_estimate(ex.w, sc, params, cfg.perts, seed, OutageMode::Quadratic);
    std::printf(" %10.5f %5d %-11s %10.4f %10.4f\n", ex.power, conic::rank_of(ms.W),
                to_string(ex.source).c_str(), 1.0 - oe, 1.0 - oq);
  }
  std::printf("\nNR ignores the channel errors; the others keep the outage below rho.\n");
}
