#pragma once

#include <atomic>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bintopo/core/design.hpp"

namespace bintopo {

// A payoff function over binary designs of a fixed shape.
//
// evaluate() must be deterministic and const: environments hold no mutable
// state after construction, so one instance can be shared by concurrent runs.
class PayoffEnvironment {
 public:
  virtual ~PayoffEnvironment() = default;

  virtual std::string name() const = 0;
  virtual GridShape shape() const = 0;
  std::size_t agent_count() const { return shape().size(); }

  virtual double evaluate(const Design& d) const = 0;

  // Differentiable environments expose a continuous relaxation over
  // p in [0,1]^N and its gradient.
  virtual bool differentiable() const { return false; }
  virtual double relaxed_payoff(std::span<const double> p) const;
  virtual std::vector<double> relaxed_gradient(std::span<const double> p) const;

  // Maps a raw design to the one that is actually simulated (e.g.
  // fabrication constraints). Identity unless overridden.
  virtual Design project(const Design& d) const { return d; }

 protected:
  void check_shape(const Design& d) const;
};

// Forwards to another environment and counts evaluate() calls.
class CountingEnvironment final : public PayoffEnvironment {
 public:
  explicit CountingEnvironment(const PayoffEnvironment& inner) : inner_(inner) {}

  std::string name() const override { return inner_.name(); }
  GridShape shape() const override { return inner_.shape(); }
  double evaluate(const Design& d) const override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return inner_.evaluate(d);
  }
  bool differentiable() const override { return inner_.differentiable(); }
  double relaxed_payoff(std::span<const double> p) const override {
    return inner_.relaxed_payoff(p);
  }
  std::vector<double> relaxed_gradient(std::span<const double> p) const override {
    return inner_.relaxed_gradient(p);
  }
  Design project(const Design& d) const override { return inner_.project(d); }

  std::size_t calls() const { return calls_.load(std::memory_order_relaxed); }

 private:
  const PayoffEnvironment& inner_;
  mutable std::atomic<std::size_t> calls_{0};
};

// Oracle environment: payoff 1 - hamming(d, target)/N, maximized uniquely at
// target. Its relaxation 1 - mean((p - target)^2) is differentiable.
class SyntheticSeparableEnv final : public PayoffEnvironment {
 public:
  SyntheticSeparableEnv(GridShape shape, std::vector<std::uint8_t> target);
  // Target drawn uniformly from the given seed.
  static SyntheticSeparableEnv with_random_target(GridShape shape,
                                                  std::uint64_t seed);

  std::string name() const override { return "synthetic"; }
  GridShape shape() const override { return shape_; }
  double evaluate(const Design& d) const override;

  bool differentiable() const override { return true; }
  double relaxed_payoff(std::span<const double> p) const override;
  std::vector<double> relaxed_gradient(std::span<const double> p) const override;

  std::span<const std::uint8_t> target() const { return target_; }

 private:
  GridShape shape_;
  std::vector<std::uint8_t> target_;
};

}  // namespace bintopo
