#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "minimax/dynamics.hpp"
#include "minimax/io.hpp"

namespace minimax {

struct ProblemSource {
  std::optional<std::string> path;     // JSON problem file
  std::optional<std::string> builtin;  // builtin name
  std::map<std::string, double> params;
};

MinimaxProblem load_problem(const ProblemSource& source);

struct ExperimentConfig {
  ProblemSource problem;
  MethodParams params;
  // Unset step sizes default to η = 0.5/L and s = η/2.
  bool eta_set = false;
  bool s_set = false;
  bool tau_set = false;
  std::optional<std::vector<double>> tau_grid;
  long n = 100;
  std::uint64_t seed = 0;
  double radius = 1.0;
  std::optional<Vec> z0;  // classification point / avoidance target / box center
  bool search = false;    // Newton search for a stationary point from z0
  std::string out_dir = ".";
  bool write_trajectories = true;
  unsigned threads = 0;  // 0: hardware concurrency
  RunOptions run;
  double tol_stationary = 1e-8;
  double tol_cluster = 1e-6;
  double tol_target = 1e-4;
};

// Parses "lo:hi:n" into n geometric points.
std::vector<double> parse_grid(const std::string& spec);
// Parses "a,b,c" into a vector.
Vec parse_vector(const std::string& spec);

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitMismatch = 2 };

struct CommandResult {
  int exit_code = kExitOk;
  json summary;
  std::vector<std::string> files;  // written artifacts
};

// Each command throws minimax::Error subclasses on bad input; the front end
// maps InconsistencyError to exit 2 and every other Error to exit 1.
CommandResult cmd_classify(const ExperimentConfig& config);
CommandResult cmd_simulate(const ExperimentConfig& config);
CommandResult cmd_avoidance(const ExperimentConfig& config);
CommandResult cmd_sweep(const ExperimentConfig& config);

// Uniform sample from the box center ± radius, member `index` of the ensemble.
Vec ensemble_init(std::uint64_t seed, long index, const Vec& center, double radius);

}  // namespace minimax
