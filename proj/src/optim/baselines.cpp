#include "bintopo/optim/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bintopo/core/errors.hpp"

namespace bintopo {

// ---------------------------------------------------------------------------
// Random search

RandomSearch RandomSearch::from_params(Params&) { return {}; }

void RandomSearch::start(const ProblemInfo& problem, std::uint64_t seed) {
  shape_ = problem.shape;
  rng_.reseed(seed);
}

Design RandomSearch::propose(std::size_t) { return Design::random(shape_, rng_); }

// ---------------------------------------------------------------------------
// DUCT

DuctConfig DuctConfig::from_params(Params& p) {
  DuctConfig c;
  c.exploration = p.get_double("exploration", c.exploration);
  c.noise_mean = p.get_double("noise_mean", c.noise_mean);
  c.noise_std = p.get_double("noise_std", c.noise_std);
  c.noise = p.get_bool("noise", c.noise);
  c.warmup_random_steps = p.get_size("warmup_random_steps", c.warmup_random_steps);
  return c;
}

void DuctState::record(const Design& d, double payoff) {
  for (std::size_t n = 0; n < visits.size(); ++n) {
    const int a = d[n];
    visits[n][a] += 1;
    rewards[n][a] += payoff;
  }
}

double duct_score(const DuctState& s, std::size_t agent, int action, double g, double c) {
  const auto& v = s.visits[agent];
  const double va = static_cast<double>(v[action]);
  const double total = static_cast<double>(v[0] + v[1]);
  return s.rewards[agent][action] / va + g * c * std::sqrt(total) / va;
}

int duct_select(const DuctState& s, std::size_t agent, double g, double c) {
  const auto& v = s.visits[agent];
  if (v[0] == 0) return 0;
  if (v[1] == 0) return 1;
  return duct_score(s, agent, 1, g, c) > duct_score(s, agent, 0, g, c) ? 1 : 0;
}

void Duct::start(const ProblemInfo& problem, std::uint64_t seed) {
  shape_ = problem.shape;
  state_ = DuctState(shape_.size());
  rng_.reseed(seed);
}

Design Duct::propose(std::size_t step) {
  if (step <= config_.warmup_random_steps) return Design::random(shape_, rng_);
  Design d(shape_);
  for (std::size_t n = 0; n < d.size(); ++n) {
    const double g = config_.noise ? rng_.normal(config_.noise_mean, config_.noise_std) : 1.0;
    d.set(n, static_cast<std::uint8_t>(duct_select(state_, n, g, config_.exploration)));
  }
  return d;
}

void Duct::observe(const Design& d, double payoff, std::span<const double>) {
  state_.record(d, payoff);
}

// ---------------------------------------------------------------------------
// Evolutionary algorithm

EaConfig EaConfig::from_params(Params& p) {
  EaConfig c;
  c.population = p.get_size("population", c.population);
  c.parents_mating = p.get_size("parents_mating", c.parents_mating);
  c.keep_parents = p.get_size("keep_parents", c.keep_parents);
  c.gene_mutation_rate = p.get_double("gene_mutation_rate", c.gene_mutation_rate);
  c.validate();
  return c;
}

void EaConfig::validate() const {
  if (!(population >= parents_mating && parents_mating >= keep_parents)) {
    throw ConfigError("EA needs population >= parents_mating >= keep_parents");
  }
  if (parents_mating < 1) throw ConfigError("EA needs at least one mating parent");
  if (population <= keep_parents) throw ConfigError("EA population must exceed keep_parents");
  if (gene_mutation_rate < 0.0 || gene_mutation_rate > 1.0) {
    throw ConfigError("EA gene_mutation_rate must lie in [0,1]");
  }
}

Design uniform_crossover(const Design& a, const Design& b, Rng& rng) {
  if (!(a.shape() == b.shape())) throw ShapeMismatch("crossover of differently shaped designs");
  Design child = a;
  for (std::size_t n = 0; n < child.size(); ++n) {
    if (rng.bit()) child.set(n, b[n]);
  }
  return child;
}

void swap_mutation(Design& d, double rate, Rng& rng) {
  const std::size_t n = d.size();
  const auto count = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
  if (count == 0 || n < 2) return;
  // Partial Fisher-Yates for `count` distinct genes.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t k = 0; k < count; ++k) {
    std::swap(idx[k], idx[k + rng.below(n - k)]);
    const std::size_t i = idx[k];
    const std::size_t j = rng.below(n);
    const auto bi = d[i];
    d.set(i, d[j]);
    d.set(j, bi);
  }
}

std::vector<Individual> ea_generation(const std::vector<Individual>& pop, const EaConfig& cfg,
                                      Rng& rng) {
  cfg.validate();
  if (pop.size() != cfg.population) throw ConfigError("population size changed");
  std::vector<std::size_t> order(pop.size());
  std::iota(order.begin(), order.end(), 0);
  for (const auto& ind : pop) {
    if (!ind.fitness) throw ConfigError("EA generation needs an evaluated population");
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return *pop[a].fitness > *pop[b].fitness;
  });

  std::vector<Individual> next;
  next.reserve(cfg.population);
  for (std::size_t k = 0; k < cfg.keep_parents; ++k) next.push_back(pop[order[k]]);

  const std::size_t parents = cfg.parents_mating;
  for (std::size_t k = 0; next.size() < cfg.population; ++k) {
    const Design& p1 = pop[order[k % parents]].design;
    const Design& p2 = pop[order[(k + 1) % parents]].design;
    Design child = uniform_crossover(p1, p2, rng);
    swap_mutation(child, cfg.gene_mutation_rate, rng);
    next.push_back(Individual{std::move(child), std::nullopt});
  }
  return next;
}

EvolutionaryAlgorithm::EvolutionaryAlgorithm(EaConfig config) : config_(config) {
  config_.validate();
}

void EvolutionaryAlgorithm::start(const ProblemInfo& problem, std::uint64_t seed) {
  shape_ = problem.shape;
  rng_.reseed(seed);
  pop_.clear();
  for (std::size_t i = 0; i < config_.population; ++i) {
    pop_.push_back(Individual{Design::random(shape_, rng_), std::nullopt});
  }
  cursor_ = 0;
  generation_ = 0;
}

void EvolutionaryAlgorithm::advance_cursor() {
  while (cursor_ < pop_.size() && pop_[cursor_].fitness) ++cursor_;
  if (cursor_ == pop_.size()) {
    pop_ = ea_generation(pop_, config_, rng_);
    ++generation_;
    cursor_ = 0;
    while (cursor_ < pop_.size() && pop_[cursor_].fitness) ++cursor_;
  }
}

Design EvolutionaryAlgorithm::propose(std::size_t) {
  advance_cursor();
  return pop_[cursor_].design;
}

void EvolutionaryAlgorithm::observe(const Design& d, double payoff, std::span<const double>) {
  if (!(pop_[cursor_].design == d)) throw ConfigError("EA observed a design it did not propose");
  pop_[cursor_].fitness = payoff;
  ++cursor_;
}

// ---------------------------------------------------------------------------
// Gradient descent with straight-through quantization

GradDescConfig GradDescConfig::from_params(Params& p) {
  GradDescConfig c;
  c.peak_lr = p.get_double("peak_lr", c.peak_lr);
  c.warmup_fraction = p.get_double("warmup_fraction", c.warmup_fraction);
  c.nesterov = p.get_bool("nesterov", c.nesterov);
  c.init = p.get_string("init", c.init);
  if (c.init != "random" && c.init != "half") throw ConfigError("grad.init must be random or half");
  if (c.warmup_fraction < 0.0 || c.warmup_fraction > 1.0) {
    throw ConfigError("grad.warmup_fraction must lie in [0,1]");
  }
  return c;
}

Design quantize(const GridShape& shape, const nn::Vector& latent, double threshold) {
  Design d(shape);
  for (std::size_t n = 0; n < d.size(); ++n) {
    d.set(n, latent(static_cast<Eigen::Index>(n)) >= threshold ? 1 : 0);
  }
  return d;
}

void GradientDescent::start(const ProblemInfo& problem, std::uint64_t seed) {
  if (!problem.differentiable) {
    throw IncompatibleAlgorithm("gradient descent needs a differentiable environment");
  }
  problem_ = problem;
  const auto n = static_cast<Eigen::Index>(problem.shape.size());
  latent_ = nn::Vector::Constant(n, 0.5);
  if (config_.init == "random") {
    Rng rng(seed);
    for (Eigen::Index i = 0; i < n; ++i) latent_(i) = rng.uniform();
  }
  adam_ = nn::Adam(problem.shape.size(), nn::AdamConfig{0.9, 0.999, 1e-8, config_.nesterov});
  const auto total = static_cast<std::int64_t>(std::max<std::size_t>(problem.budget, 1));
  const auto warmup = static_cast<std::int64_t>(
      std::llround(config_.warmup_fraction * static_cast<double>(total)));
  schedule_ = nn::LrSchedule::cosine_warmup(config_.peak_lr, warmup, total);
  updates_ = 0;
}

Design GradientDescent::propose(std::size_t) {
  Design q = quantize(problem_.shape, latent_);
  return problem_.project ? problem_.project(q) : q;
}

void GradientDescent::observe(const Design&, double, std::span<const double> gradient) {
  if (gradient.size() != static_cast<std::size_t>(latent_.size())) {
    throw IncompatibleAlgorithm("gradient descent observed a missing or mis-sized gradient");
  }
  // Ascent on the payoff, with the gradient copied straight through the
  // quantizer and projection onto the latent.
  nn::Vector descent = -Eigen::Map<const nn::Vector>(gradient.data(), latent_.size());
  ++updates_;
  adam_.step(latent_, descent, schedule_(updates_));
  latent_ = latent_.cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace bintopo
