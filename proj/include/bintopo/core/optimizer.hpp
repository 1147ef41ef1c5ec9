#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "bintopo/core/design.hpp"

namespace bintopo {

// What an optimizer may know about the problem. It never sees the
// environment itself, so every payoff it learns goes through the runner
// (and its evaluation counter).
struct ProblemInfo {
  GridShape shape;
  std::size_t budget = 0;
  bool differentiable = false;
  // Environment's design projection (fabrication mapping); identity if empty.
  std::function<Design(const Design&)> project;
};

// Propose/observe loop. run_optimization() calls start() once, then strictly
// alternates propose(step) and observe() for step = 1..T.
class Optimizer {
 public:
  virtual ~Optimizer() = default;

  virtual std::string name() const = 0;
  virtual bool requires_gradient() const { return false; }

  virtual void start(const ProblemInfo& problem, std::uint64_t seed) = 0;
  virtual Design propose(std::size_t step) = 0;
  // `gradient` is the relaxed-payoff gradient at the proposed design; empty
  // unless requires_gradient().
  virtual void observe(const Design& design, double payoff,
                       std::span<const double> gradient) = 0;
};

}  // namespace bintopo
