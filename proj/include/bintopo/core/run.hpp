#pragma once

#include <cstdint>
#include <vector>

#include "bintopo/core/design.hpp"
#include "bintopo/core/environment.hpp"
#include "bintopo/core/optimizer.hpp"

namespace bintopo {

struct Budget {
  std::size_t total_evaluations = 10000;
};

struct RunRecord {
  std::size_t step = 0;  // 1-based
  double payoff = 0.0;
  double best_so_far = 0.0;
  double wall_ms = 0.0;  // elapsed since run start; 0 unless timing enabled
};

struct RunOptions {
  bool record_designs = false;  // keep every evaluated design (variance analysis)
  bool wall_clock = false;      // fill RunRecord::wall_ms
};

struct RunResult {
  Design best;
  double best_payoff = 0.0;
  std::vector<RunRecord> trace;
  std::vector<Design> designs;  // only with RunOptions::record_designs
  std::size_t evaluations = 0;
};

// Best-of-T bandit optimization: T rounds of propose, evaluate, observe.
// Throws IncompatibleAlgorithm if a gradient optimizer meets a
// non-differentiable environment.
RunResult run_optimization(const PayoffEnvironment& env, Optimizer& algo,
                           Budget budget, std::uint64_t seed,
                           RunOptions options = {});

}  // namespace bintopo
