#pragma once

#include <qrelay/harness/config.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <string>

#ifndef QRELAY_VERSION
#define QRELAY_VERSION "unknown"
#endif
#ifndef QRELAY_GIT_REVISION
#define QRELAY_GIT_REVISION "unknown"
#endif

namespace qrelay::harness {

/// Run record: command, resolved config, derived seed scheme and code version.
inline nlohmann::json make_manifest(const std::string& command, const ExperimentConfig& cfg,
                                    const std::vector<std::string>& outputs,
                                    double elapsed_seconds) {
  nlohmann::json j;
  j["command"] = command;
  j["version"] = QRELAY_VERSION;
  j["git_revision"] = QRELAY_GIT_REVISION;
  j["config"] = cfg;
  j["seeds"] = {{"master", cfg.seed},
                {"scheme", "derive_seed(master, tag, channel) with tags channel, "
                           "perturbation, extraction; tightness uses Philox(master, "
                           "hash(\"tightness\"))"}};
  j["outputs"] = outputs;
  j["elapsed_seconds"] = elapsed_seconds;
  return j;
}

inline void write_manifest(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidArgument("manifest: cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace qrelay::harness
