#pragma once

#include <array>
#include <optional>
#include <vector>

#include "bintopo/core/optimizer.hpp"
#include "bintopo/core/params.hpp"
#include "bintopo/core/rng.hpp"
#include "bintopo/nn/optim.hpp"

namespace bintopo {

// ---------------------------------------------------------------------------
// Random search: iid uniform bits every step.

class RandomSearch final : public Optimizer {
 public:
  static RandomSearch from_params(Params& p);

  std::string name() const override { return "random"; }
  void start(const ProblemInfo& problem, std::uint64_t seed) override;
  Design propose(std::size_t step) override;
  void observe(const Design&, double, std::span<const double>) override {}

 private:
  GridShape shape_;
  Rng rng_;
};

// ---------------------------------------------------------------------------
// Decoupled UCB: each agent keeps visit counts and reward sums for its two
// actions and maximizes
//   w_a / v_a + g * c * sqrt(v_0 + v_1) / v_a,   g ~ Normal(noise_mean, noise_std)
// with one g per (step, agent).

struct DuctConfig {
  double exploration = 0.2145;
  double noise_mean = 0.3242;
  double noise_std = 1.0;
  bool noise = true;  // false fixes g = 1 (textbook DUCT)
  std::size_t warmup_random_steps = 50;

  static DuctConfig from_params(Params& p);
};

struct DuctState {
  std::vector<std::array<std::int64_t, 2>> visits;
  std::vector<std::array<double, 2>> rewards;

  explicit DuctState(std::size_t agents = 0) : visits(agents, {0, 0}), rewards(agents, {0.0, 0.0}) {}
  void record(const Design& d, double payoff);
};

double duct_score(const DuctState& s, std::size_t agent, int action, double g, double c);
// Unvisited actions win outright (action 0 first); ties go to action 0.
int duct_select(const DuctState& s, std::size_t agent, double g, double c);

class Duct final : public Optimizer {
 public:
  explicit Duct(DuctConfig config = {}) : config_(config) {}

  std::string name() const override { return "duct"; }
  void start(const ProblemInfo& problem, std::uint64_t seed) override;
  Design propose(std::size_t step) override;
  void observe(const Design& d, double payoff, std::span<const double>) override;

  const DuctState& state() const { return state_; }

 private:
  DuctConfig config_;
  GridShape shape_;
  DuctState state_;
  Rng rng_;
};

// ---------------------------------------------------------------------------
// Evolutionary algorithm with steady-state parent selection, elitism,
// uniform crossover and swap mutation.

struct EaConfig {
  std::size_t population = 92;
  std::size_t parents_mating = 8;
  std::size_t keep_parents = 2;
  double gene_mutation_rate = 0.34;

  static EaConfig from_params(Params& p);
  void validate() const;
};

struct Individual {
  Design design;
  std::optional<double> fitness;  // known for carried-over elites
};

// Uniform crossover: each gene from either parent with probability 1/2.
Design uniform_crossover(const Design& a, const Design& b, Rng& rng);
// Swaps round(rate * N) distinct genes, each with a uniformly chosen partner.
void swap_mutation(Design& d, double rate, Rng& rng);
// Next generation from a fully evaluated one. The first keep_parents entries
// are the best designs of `pop`, unchanged and with their fitness.
std::vector<Individual> ea_generation(const std::vector<Individual>& pop, const EaConfig& cfg,
                                      Rng& rng);

class EvolutionaryAlgorithm final : public Optimizer {
 public:
  explicit EvolutionaryAlgorithm(EaConfig config = {});

  std::string name() const override { return "ea"; }
  void start(const ProblemInfo& problem, std::uint64_t seed) override;
  Design propose(std::size_t step) override;
  void observe(const Design& d, double payoff, std::span<const double>) override;

  const std::vector<Individual>& population() const { return pop_; }
  std::size_t generation() const { return generation_; }

 private:
  void advance_cursor();

  EaConfig config_;
  GridShape shape_;
  Rng rng_;
  std::vector<Individual> pop_;
  std::size_t cursor_ = 0;
  std::size_t generation_ = 0;
};

// ---------------------------------------------------------------------------
// Gradient ascent on a continuous latent in [0,1]^N with a straight-through
// quantizer: evaluated design = project(latent >= 0.5).

struct GradDescConfig {
  double peak_lr = 0.01;
  double warmup_fraction = 0.1;
  bool nesterov = true;
  std::string init = "random";  // random | half

  static GradDescConfig from_params(Params& p);
};

class GradientDescent final : public Optimizer {
 public:
  explicit GradientDescent(GradDescConfig config = {}) : config_(config) {}

  std::string name() const override { return "grad"; }
  bool requires_gradient() const override { return true; }
  void start(const ProblemInfo& problem, std::uint64_t seed) override;
  Design propose(std::size_t step) override;
  void observe(const Design& d, double payoff, std::span<const double> gradient) override;

  const nn::Vector& latent() const { return latent_; }

 private:
  GradDescConfig config_;
  ProblemInfo problem_;
  nn::Vector latent_;
  nn::Adam adam_;
  nn::LrSchedule schedule_;
  std::int64_t updates_ = 0;
};

Design quantize(const GridShape& shape, const nn::Vector& latent, double threshold = 0.5);

}  // namespace bintopo
