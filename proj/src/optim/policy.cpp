#include "bintopo/optim/policy.hpp"

namespace bintopo {

std::vector<int> with_io(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes;
  sizes.reserve(hidden.size() + 2);
  sizes.push_back(in);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

AgentPolicy::AgentPolicy(GridShape shape, int bands, const std::vector<int>& hidden) {
  PositionalEncoder enc(shape, bands);
  encodings_ = enc.encode_all();
  net_ = nn::Mlp(with_io(enc.dim(), hidden, 1), nn::Activation::relu, nn::Head::sigmoid);
}

nn::Vector AgentPolicy::probs() const { return net_.forward(encodings_).col(0); }

nn::Vector AgentPolicy::probs(nn::Mlp::Cache& cache) const {
  return net_.forward(encodings_, cache).col(0);
}

nn::Vector AgentPolicy::probs(const std::vector<std::size_t>& rows, nn::Mlp::Cache& cache) const {
  nn::Matrix x(static_cast<Eigen::Index>(rows.size()), encodings_.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    x.row(static_cast<Eigen::Index>(r)) = encodings_.row(static_cast<Eigen::Index>(rows[r]));
  }
  return net_.forward(x, cache).col(0);
}

void AgentPolicy::backward(const nn::Mlp::Cache& cache, const nn::Vector& dloss_dprob,
                           nn::Vector& grad) const {
  nn::Matrix up = dloss_dprob;
  net_.backward(cache, up, grad, false);
}

Design AgentPolicy::sample(const GridShape& shape, const nn::Vector& p, Rng& rng) const {
  Design d(shape);
  for (std::size_t n = 0; n < d.size(); ++n) {
    d.set(n, rng.uniform() < p(static_cast<Eigen::Index>(n)) ? 1 : 0);
  }
  return d;
}

}  // namespace bintopo
