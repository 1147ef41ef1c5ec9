#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "bintopo/core/environment.hpp"
#include "bintopo/core/params.hpp"
#include "bintopo/core/run.hpp"

namespace bintopo {

// Environment by name: gol, synthetic, bend, splitter. Consumes its
// parameters from `params`.
std::unique_ptr<PayoffEnvironment> make_environment(const std::string& name, Params& params);

struct ExperimentConfig {
  std::string env_name;
  Params env_params;
  std::string algo_name;
  Params algo_params;

  std::size_t budget = 10000;
  std::vector<std::uint64_t> seeds{0};
  std::string out_dir = "out";
  std::size_t jobs = 0;  // 0 = hardware concurrency
  bool curves = true;
  bool wall_clock = false;

  bool variance = false;
  std::size_t variance_window = 50;
  std::vector<double> robustness_probs;
  std::size_t robustness_samples = 20;

  // Checks that the environment and algorithm resolve with the given
  // keys. Throws ConfigError otherwise.
  void validate() const;
};

ExperimentConfig parse_experiment(std::istream& in);
ExperimentConfig load_experiment(const std::string& path);

// Just the [environment] section of a config file; other sections are
// ignored.
struct EnvironmentSpec {
  std::string name;
  Params params;
};
EnvironmentSpec load_environment_spec(const std::string& path);

struct SeedOutcome {
  std::uint64_t seed = 0;
  double best_payoff = 0.0;
  std::size_t evaluations = 0;
  Design best;
  std::vector<RunRecord> trace;
  std::vector<double> variance;  // per step from W on, when enabled
  std::vector<std::pair<double, double>> robustness;
};

struct ExperimentResult {
  std::vector<SeedOutcome> seeds;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over seeds
};

// Runs every seed and writes trace_<seed>.csv, best_<seed>.pbd,
// summary.csv and, when enabled, curves.svg, variance_<seed>.csv and
// robustness_<seed>.csv into cfg.out_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg);
// Same runs without touching the filesystem.
ExperimentResult run_seeds(const ExperimentConfig& cfg);

void write_trace_csv(std::ostream& out, const std::vector<RunRecord>& trace);
void write_summary_csv(std::ostream& out, const ExperimentResult& result);
// Writes to a temporary file in the same directory and renames it.
void write_file_atomic(const std::string& path, const std::string& contents);

// Mean over voxels of p(1 - p), with p the voxel's frequency of 1 over the
// last W designs, for every t >= W (entry t - W). Throws
// InsufficientHistory with fewer than W designs.
std::vector<double> design_variance(const std::vector<Design>& designs, std::size_t window);

// (p, mean payoff) for perturbed copies of `best`: every voxel is replaced
// by a uniform random bit with probability p. p = 0 evaluates `best` once.
std::vector<std::pair<double, double>> robustness_curve(const Design& best, const PayoffEnvironment& env,
                                                        const std::vector<double>& probs,
                                                        std::size_t samples, std::uint64_t seed);

}  // namespace bintopo
