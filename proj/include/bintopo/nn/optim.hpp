#pragma once

#include <cstdint>
#include <string>

#include "bintopo/nn/mlp.hpp"

namespace bintopo::nn {

struct AdamConfig {
  double b1 = 0.9;
  double b2 = 0.999;
  double eps = 1e-8;
  bool nesterov = true;  // NAdam-style lookahead on the first moment
};

// Adam with bias correction. With nesterov the applied first moment is
//   b1 * m_t / (1 - b1^(t+1)) + (1 - b1) * g_t / (1 - b1^t).
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n, AdamConfig config = {});

  // params -= lr * update(grads)
  void step(Vector& params, const Vector& grads, double lr);
  void reset();

  const AdamConfig& config() const { return config_; }
  std::int64_t steps() const { return t_; }
  const Vector& first_moment() const { return m_; }
  const Vector& second_moment() const { return v_; }

  // <prefix>.bin holds [m, v]; the sidecar carries the step counter.
  void save(const std::string& prefix) const;
  static Adam load(const std::string& prefix);

 private:
  AdamConfig config_;
  Vector m_;
  Vector v_;
  std::int64_t t_ = 0;
};

// Learning rate as a function of the update index.
struct LrSchedule {
  enum class Kind { constant, cosine_warmup };

  Kind kind = Kind::constant;
  double peak_lr = 1e-3;
  std::int64_t warmup_steps = 0;
  std::int64_t total_steps = 1;

  static LrSchedule constant(double lr);
  static LrSchedule cosine_warmup(double peak, std::int64_t warmup, std::int64_t total);

  // Linear 0 -> peak on [0, warmup], cosine peak -> 0 on [warmup, total],
  // 0 afterwards.
  double operator()(std::int64_t t) const;
};

// Straight-through sample: the forward value is the sampled bit, the
// backward pass hands the upstream gradient to the probability unchanged.
struct StraightThrough {
  double sample = 0.0;
  double prob = 0.0;

  double forward() const { return sample; }
  double backward(double upstream) const { return upstream; }
};

StraightThrough straight_through(double sample, double prob);

}  // namespace bintopo::nn
