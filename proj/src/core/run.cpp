#include "bintopo/core/run.hpp"

#include <chrono>
#include <limits>

#include "bintopo/core/errors.hpp"
#include "bintopo/core/rng.hpp"

namespace bintopo {

RunResult run_optimization(const PayoffEnvironment& env, Optimizer& algo,
                           Budget budget, std::uint64_t seed, RunOptions options) {
  if (budget.total_evaluations < 1) throw ConfigError("budget must be >= 1");
  if (algo.requires_gradient() && !env.differentiable()) {
    throw IncompatibleAlgorithm("optimizer '" + algo.name() +
                                "' needs gradients but environment '" +
                                env.name() + "' is not differentiable");
  }

  CountingEnvironment counted(env);
  ProblemInfo problem;
  problem.shape = env.shape();
  problem.budget = budget.total_evaluations;
  problem.differentiable = env.differentiable();
  problem.project = [&env](const Design& d) { return env.project(d); };
  algo.start(problem, derive_seed(seed, Stream::algorithm));

  RunResult result;
  result.best_payoff = -std::numeric_limits<double>::infinity();
  result.trace.reserve(budget.total_evaluations);
  if (options.record_designs) result.designs.reserve(budget.total_evaluations);

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> relaxed;
  for (std::size_t step = 1; step <= budget.total_evaluations; ++step) {
    Design d = algo.propose(step);
    const double payoff = counted.evaluate(d);

    std::vector<double> grad;
    if (algo.requires_gradient()) {
      relaxed.assign(d.bits().begin(), d.bits().end());
      grad = counted.relaxed_gradient(relaxed);
    }
    algo.observe(d, payoff, grad);

    if (payoff > result.best_payoff) {
      result.best_payoff = payoff;
      result.best = d;
    }
    RunRecord rec;
    rec.step = step;
    rec.payoff = payoff;
    rec.best_so_far = result.best_payoff;
    if (options.wall_clock) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    }
    result.trace.push_back(rec);
    if (options.record_designs) result.designs.push_back(std::move(d));
  }
  result.evaluations = counted.calls();
  return result;
}

}  // namespace bintopo
