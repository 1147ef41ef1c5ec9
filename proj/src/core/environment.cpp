#include "bintopo/core/environment.hpp"

#include "bintopo/core/errors.hpp"
#include "bintopo/core/rng.hpp"

namespace bintopo {

double PayoffEnvironment::relaxed_payoff(std::span<const double>) const {
  throw IncompatibleAlgorithm("environment '" + name() + "' is not differentiable");
}

std::vector<double> PayoffEnvironment::relaxed_gradient(std::span<const double>) const {
  throw IncompatibleAlgorithm("environment '" + name() + "' is not differentiable");
}

void PayoffEnvironment::check_shape(const Design& d) const {
  if (!(d.shape() == shape())) {
    throw ShapeMismatch("design shape " + to_string(d.shape()) +
                        " does not match environment '" + name() + "' shape " +
                        to_string(shape()));
  }
}

SyntheticSeparableEnv::SyntheticSeparableEnv(GridShape shape,
                                             std::vector<std::uint8_t> target)
    : shape_(shape), target_(std::move(target)) {
  if (target_.size() != shape_.size()) {
    throw LengthMismatch("target length " + std::to_string(target_.size()) +
                         " does not match shape " + to_string(shape_));
  }
}

SyntheticSeparableEnv SyntheticSeparableEnv::with_random_target(GridShape shape,
                                                                std::uint64_t seed) {
  Rng rng(derive_seed(seed, Stream::environment));
  std::vector<std::uint8_t> target(shape.size());
  for (auto& t : target) t = rng.bit();
  return SyntheticSeparableEnv(shape, std::move(target));
}

double SyntheticSeparableEnv::evaluate(const Design& d) const {
  check_shape(d);
  return hamming_payoff(d, target_);
}

double SyntheticSeparableEnv::relaxed_payoff(std::span<const double> p) const {
  if (p.size() != target_.size()) throw LengthMismatch("relaxed design length");
  double sq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double e = p[i] - target_[i];
    sq += e * e;
  }
  return 1.0 - sq / static_cast<double>(p.size());
}

std::vector<double> SyntheticSeparableEnv::relaxed_gradient(
    std::span<const double> p) const {
  if (p.size() != target_.size()) throw LengthMismatch("relaxed design length");
  std::vector<double> g(p.size());
  const double n = static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) g[i] = 2.0 * (target_[i] - p[i]) / n;
  return g;
}

}  // namespace bintopo
