#pragma once

#include <qrelay/types.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace qrelay::harness {

enum class Method { NR, M4, M2, B2 };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::NR: return "NR";
    case Method::M4: return "M4";
    case Method::M2: return "M2";
    case Method::B2: return "B2";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "NR") return Method::NR;
  if (s == "M4") return Method::M4;
  if (s == "M2") return Method::M2;
  if (s == "B2") return Method::B2;
  throw InvalidArgument("unknown method '" + s + "' (expected NR, M4, M2 or B2)");
}

/// SNR model used when scoring designs; see mode_for().
enum class ValidateMode { Auto, Exact, Quadratic };

inline std::string to_string(ValidateMode m) {
  switch (m) {
    case ValidateMode::Auto: return "auto";
    case ValidateMode::Exact: return "exact";
    case ValidateMode::Quadratic: return "quadratic";
  }
  return "?";
}

inline ValidateMode parse_validate_mode(const std::string& s) {
  if (s == "auto") return ValidateMode::Auto;
  if (s == "exact") return ValidateMode::Exact;
  if (s == "quadratic") return ValidateMode::Quadratic;
  throw InvalidArgument("unknown validate mode '" + s + "'");
}

struct ExperimentConfig {
  std::vector<Method> methods{Method::NR, Method::M4, Method::M2, Method::B2};
  int L = 4;
  double P_t = 10.0;
  double sigma_v2 = 0.25;
  double sigma2 = 0.25;
  double rho = 0.1;
  double eps2 = 0.002;
  double eta2 = 0.002;
  std::vector<double> gamma_db{18.0};
  int channels = 100;
  int perts = 1000;
  int rand_samples = 1000;
  std::uint64_t seed = 1;
  ValidateMode validate_mode = ValidateMode::Auto;

  // Evaluation-time overrides for the mismatch study; the design still
  // uses the nominal values above.
  std::optional<double> sigma2_hat;
  std::optional<double> eps2_hat;
  std::optional<double> eta2_hat;

  int tightness_instances = 10000;
  int tightness_max_dim = 8;

  int threads = 0;  // 0: hardware concurrency
  std::string out_dir = "out";

  void validate() const {
    if (methods.empty()) throw InvalidArgument("config: method set is empty");
    if (gamma_db.empty()) throw InvalidArgument("config: gamma grid is empty");
    if (channels < 1 || perts < 1 || rand_samples < 1)
      throw InvalidArgument("config: counts must be >= 1");
    if (eps2 < 0.0 || eta2 < 0.0) throw InvalidArgument("config: error variances must be >= 0");
    if (tightness_instances < 1 || tightness_max_dim < 1)
      throw InvalidArgument("config: tightness sizes must be >= 1");
    for (auto v : {sigma2_hat, eps2_hat, eta2_hat})
      if (v && *v < 0.0) throw InvalidArgument("config: overrides must be >= 0");
    params(gamma_db.front());
  }

  SystemParams params(double gdb) const {
    return SystemParams::uniform(L, P_t, db_to_linear(gdb), rho, sigma_v2, sigma2);
  }

  /// Parameters the realized system runs at, after noise overrides.
  SystemParams eval_params(double gdb) const {
    SystemParams p = params(gdb);
    if (sigma2_hat) {
      p.sigma_v2 = *sigma2_hat;
      p.sigma2 = RVec::Constant(L, *sigma2_hat);
    }
    return p;
  }
  double eval_eps2() const { return eps2_hat.value_or(eps2); }
  double eval_eta2() const { return eta2_hat.value_or(eta2); }

  bool has_mismatch() const { return sigma2_hat || eps2_hat || eta2_hat; }

  int worker_count() const {
    if (threads > 0) return threads;
    return std::max(1u, std::thread::hardware_concurrency());
  }
};

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  std::vector<std::string> ms;
  for (auto m : c.methods) ms.push_back(to_string(m));
  j = nlohmann::json{{"methods", ms},
                     {"L", c.L},
                     {"P_t", c.P_t},
                     {"sigma_v2", c.sigma_v2},
                     {"sigma2", c.sigma2},
                     {"rho", c.rho},
                     {"eps2", c.eps2},
                     {"eta2", c.eta2},
                     {"gamma_db", c.gamma_db},
                     {"channels", c.channels},
                     {"perts", c.perts},
                     {"rand_samples", c.rand_samples},
                     {"seed", c.seed},
                     {"validate_mode", to_string(c.validate_mode)},
                     {"tightness_instances", c.tightness_instances},
                     {"tightness_max_dim", c.tightness_max_dim},
                     {"out_dir", c.out_dir}};
  auto opt = [&j](const char* k, const std::optional<double>& v) {
    j[k] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  opt("sigma2_hat", c.sigma2_hat);
  opt("eps2_hat", c.eps2_hat);
  opt("eta2_hat", c.eta2_hat);
}

/// Reads the keys present in `j` over the defaults in `c`; unknown keys are
/// rejected so that typos do not silently fall back to defaults.
inline void merge_json(const nlohmann::json& j, ExperimentConfig& c) {
  static const std::vector<std::string> known{
      "methods", "L", "P_t", "sigma_v2", "sigma2", "rho", "eps2", "eta2",
      "gamma_db", "channels", "perts", "rand_samples", "seed", "validate_mode",
      "sigma2_hat", "eps2_hat", "eta2_hat", "tightness_instances",
      "tightness_max_dim", "threads", "out_dir"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw InvalidArgument("config: unknown key '" + it.key() + "'");

  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
  }
  auto get = [&j](const char* k, auto& dst) {
    if (j.contains(k)) j.at(k).get_to(dst);
  };
  get("L", c.L);
  get("P_t", c.P_t);
  get("sigma_v2", c.sigma_v2);
  get("sigma2", c.sigma2);
  get("rho", c.rho);
  get("eps2", c.eps2);
  get("eta2", c.eta2);
  get("gamma_db", c.gamma_db);
  get("channels", c.channels);
  get("perts", c.perts);
  get("rand_samples", c.rand_samples);
  get("seed", c.seed);
  get("tightness_instances", c.tightness_instances);
  get("tightness_max_dim", c.tightness_max_dim);
  get("threads", c.threads);
  get("out_dir", c.out_dir);
  if (j.contains("validate_mode"))
    c.validate_mode = parse_validate_mode(j.at("validate_mode").get<std::string>());
  auto opt = [&j](const char* k, std::optional<double>& dst) {
    if (!j.contains(k)) return;
    if (j.at(k).is_null()) dst.reset();
    else dst = j.at(k).get<double>();
  };
  opt("sigma2_hat", c.sigma2_hat);
  opt("eps2_hat", c.eps2_hat);
  opt("eta2_hat", c.eta2_hat);
}

/// Splits "a,b,c" on commas; empty pieces are dropped.
inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

/// "3:3:15" expands to 3,6,...,15; otherwise a comma list.
inline std::vector<double> parse_gamma_list(const std::string& s) {
  std::vector<double> out;
  if (std::count(s.begin(), s.end(), ':') == 2) {
    const auto a = s.find(':'), b = s.rfind(':');
    const double lo = std::stod(s.substr(0, a));
    const double step = std::stod(s.substr(a + 1, b - a - 1));
    const double hi = std::stod(s.substr(b + 1));
    if (!(step > 0.0)) throw InvalidArgument("gamma range step must be > 0");
    for (int k = 0; lo + k * step <= hi + 1e-9; ++k) out.push_back(lo + k * step);
    return out;
  }
  for (const auto& t : split_list(s)) out.push_back(std::stod(t));
  return out;
}

}  // namespace qrelay::harness
