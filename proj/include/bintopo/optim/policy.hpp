#pragma once

#include <cstdint>
#include <vector>

#include "bintopo/core/design.hpp"
#include "bintopo/core/rng.hpp"
#include "bintopo/nn/mlp.hpp"
#include "bintopo/posenc.hpp"

namespace bintopo {

// A stochastic per-agent policy pi(a_n = 1 | O(n)): one MLP with a sigmoid
// head shared by all agents, fed the positional encoding of each agent.
class AgentPolicy {
 public:
  AgentPolicy() = default;
  AgentPolicy(GridShape shape, int bands, const std::vector<int>& hidden);

  std::size_t agents() const { return static_cast<std::size_t>(encodings_.rows()); }
  const nn::Mlp& net() const { return net_; }
  nn::Mlp& net() { return net_; }
  const nn::Matrix& encodings() const { return encodings_; }

  // Probabilities of action 1 for every agent.
  nn::Vector probs() const;
  nn::Vector probs(nn::Mlp::Cache& cache) const;
  // Same, restricted to the given agent rows.
  nn::Vector probs(const std::vector<std::size_t>& rows, nn::Mlp::Cache& cache) const;

  // Adds dL/dtheta for dL/dp given per row of the cached batch.
  void backward(const nn::Mlp::Cache& cache, const nn::Vector& dloss_dprob,
                nn::Vector& grad) const;

  void reinitialize(std::uint64_t seed) { net_.reinitialize(seed); }

  Design sample(const GridShape& shape, const nn::Vector& p, Rng& rng) const;

 private:
  nn::Matrix encodings_;
  nn::Mlp net_;
};

std::vector<int> with_io(int in, const std::vector<int>& hidden, int out);

}  // namespace bintopo
