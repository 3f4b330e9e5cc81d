#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace hdm::cli {

/// Everything a run depends on. Serializes to the manifest and back.
struct RunConfig {
  std::string command;
  int N = 4;
  double sigma = 1.0;
  double J = 1.0;
  double h = 0.0;
  double tmax = 10.0;
  double dt = 0.01;
  int K = 64;
  std::string mode;  // empty selects the command default
  std::string out;   // empty writes <command>.<format>
  std::string format = "csv";

  int r_min = 0;
  int r_max = -1;  // -1: N for chain modes, 8 for collapse
  std::int64_t x_min = 1;
  std::int64_t x_max = -1;  // -1: L - 1
  int tail = -1;            // timeavg: R >= 0 switches to tail rows
  bool compare = false;     // manybody: single-particle comparison
  double tolerance = 1e-9;
  int krylov_dim = 30;
  int n_min = 16;
  int n_max = 22;
  int reps = 20;
  std::uint64_t seed = 0;  // reserved
};

nlohmann::ordered_json to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::ordered_json& doc);

/// Default mode of a command ("" for commands without modes).
std::string default_mode(const std::string& command);

struct RunResult {
  std::vector<std::filesystem::path> outputs;
  std::filesystem::path manifest;
};

/// Runs the command and writes its outputs plus <stem>.manifest.json.
RunResult execute(const RunConfig& config);

/// Parses argv, runs, and maps errors to exit codes (2 input, 3 resource,
/// 4 convergence).
int run(int argc, const char* const* argv);

}  // namespace hdm::cli
