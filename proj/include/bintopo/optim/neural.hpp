#pragma once

#include <memory>
#include <string>
#include <vector>

#include "bintopo/core/buffer.hpp"
#include "bintopo/core/optimizer.hpp"
#include "bintopo/core/params.hpp"
#include "bintopo/core/rng.hpp"
#include "bintopo/nn/mlp.hpp"
#include "bintopo/nn/optim.hpp"
#include "bintopo/optim/policy.hpp"

namespace bintopo {

// ===========================================================================
// Independent Q-learning over payoffs.
//
// One critic C(O(i), a_i) shared by all agents regresses the joint payoff
// from each agent's own action. Acting is per-agent epsilon-greedy on it.

struct IqlConfig {
  double lr = 1e-3;
  std::size_t batch = 32;
  std::size_t buffer = 200;
  std::vector<int> hidden{64, 64};
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_anneal_fraction = 0.6;
  std::size_t updates_per_step = 1;
  int bands = 8;
  bool nesterov = false;

  static IqlConfig from_params(Params& p);
};

// Linear from eps_start at t = 0 to eps_end at t = fraction * T, then flat.
double iql_epsilon(const IqlConfig& cfg, double t, double total);

class IqlCritic {
 public:
  IqlCritic() = default;
  IqlCritic(GridShape shape, int bands, const std::vector<int>& hidden);

  // values(i, a) = C(O(i), a) as an N x 2 matrix.
  nn::Matrix values() const;
  nn::Matrix values(nn::Mlp::Cache& cache) const;
  // One gradient step of the mean over batch entries and agents of
  // (C(O(i), a_i) - r)^2. Returns the loss before the step.
  double update(const ExperienceBuffer& buffer, const std::vector<std::size_t>& batch,
                nn::Adam& adam, double lr);
  double loss(const ExperienceBuffer& buffer, const std::vector<std::size_t>& batch) const;

  nn::Mlp& net() { return net_; }
  const nn::Mlp& net() const { return net_; }

 private:
  nn::Matrix inputs_;  // rows [0, N) action 0, rows [N, 2N) action 1
  nn::Mlp net_;
  std::size_t agents_ = 0;
};

// Greedy action per agent, ties to action 0.
std::vector<std::uint8_t> greedy_actions(const nn::Matrix& values);

class IndependentQ final : public Optimizer {
 public:
  explicit IndependentQ(IqlConfig config = {}) : config_(std::move(config)) {}

  std::string name() const override { return "iql"; }
  void start(const ProblemInfo& problem, std::uint64_t seed) override;
  Design propose(std::size_t step) override;
  void observe(const Design& d, double payoff, std::span<const double>) override;

  const IqlCritic& critic() const { return critic_; }
  void save_state(const std::string& prefix) const;

 private:
  IqlConfig config_;
  ProblemInfo problem_;
  IqlCritic critic_;
  nn::Adam adam_;
  std::unique_ptr<ExperienceBuffer> buffer_;
  Rng act_rng_;
  Rng buffer_rng_;
};

// ===========================================================================
// Bandit actor-critic.
//
// A centralized critic C(a) regresses payoffs of joint actions. The policy is
// re-initialized after every new sample and trained by gradient ascent on C,
// with straight-through samples a_i ~ pi(. | O(i)) and a random fraction of
// agents masked out of every step.

struct BacConfig {
  std::size_t critic_steps = 128;  // U
  std::size_t policy_steps = 1024;  // G
  std::size_t batch = 32;           // B
  double critic_lr = 1e-4;
  double policy_lr = 1e-3;
  std::vector<int> critic_hidden{256, 256};
  std::vector<int> critic_head_hidden{};
  std::vector<int> policy_hidden{128, 128};
  double mask_fraction = 0.95;
  std::size_t critic_reinit_period = 250;
  std::size_t reinit_burst_multiplier = 512;
  std::size_t warmup_samples = 32;
  std::size_t buffer = 10000;
  std::string critic = "pooled";  // pooled | flat
  int bands = 8;
  bool nesterov = false;

  static BacConfig from_params(Params& p);
  std::size_t masked_agents(std::size_t n) const;
};

// Critic over joint actions.
class BacCritic {
 public:
  virtual ~BacCritic() = default;

  virtual void reinitialize(std::uint64_t seed) = 0;
  virtual std::size_t param_count() const = 0;
  virtual nn::Vector& params() = 0;

  // Batch prediction; `actions` is B x N, normally with 0/1 entries.
  virtual nn::Vector predict(const nn::Matrix& actions) const = 0;
  // Mean squared error and its parameter gradient.
  virtual double loss_and_grad(const nn::Matrix& actions, const nn::Vector& payoffs,
                               nn::Vector& grad) const = 0;
  // Critic value at one joint action and dC/da_i for every agent. Call
  // prepare_action_gradients() after changing the parameters.
  virtual void prepare_action_gradients() {}
  // True when dC/da_i depends on a_i alone, so the policy phase can skip
  // sampling agents whose gradient is masked.
  virtual bool action_separable() const { return false; }
  virtual double value_and_action_grad(const nn::Vector& action, nn::Vector& dvalue_daction) const = 0;
};

// C(a) = head(mean_i g([O(i), a_i])). Because g only sees (i, a_i), the
// trunk is evaluated once on the 2N distinct inputs per call.
class PooledCritic final : public BacCritic {
 public:
  PooledCritic(GridShape shape, int bands, const std::vector<int>& trunk_hidden,
               const std::vector<int>& head_hidden);

  void reinitialize(std::uint64_t seed) override;
  std::size_t param_count() const override { return static_cast<std::size_t>(params_.size()); }
  nn::Vector& params() override { return params_; }

  nn::Vector predict(const nn::Matrix& actions) const override;
  double loss_and_grad(const nn::Matrix& actions, const nn::Vector& payoffs,
                       nn::Vector& grad) const override;
  void prepare_action_gradients() override;
  bool action_separable() const override { return head_.layer_count() == 1; }
  double value_and_action_grad(const nn::Vector& action, nn::Vector& dvalue_daction) const override;

 private:
  void sync_in() const;
  nn::Matrix pooled(const nn::Matrix& f0, const nn::Matrix& f1, const nn::Matrix& actions) const;

  std::size_t agents_ = 0;
  nn::Matrix inputs_;  // rows [0, N) action 0, rows [N, 2N) action 1
  mutable nn::Mlp trunk_;
  mutable nn::Mlp head_;
  nn::Vector params_;  // [trunk | head]
  struct Workspace {
    nn::Mlp::Cache trunk, head;
    nn::Matrix delta, pooled, dfeat;
    nn::Vector gtrunk, ghead;
  };
  mutable Workspace work_;
  // Cached for the policy phase.
  nn::Matrix delta_, tangent0_, tangent1_;  // delta = g(i, 1) - g(i, 0)
  nn::Vector base_;                        // sum_i g(i, 0)
  nn::Vector grad0_, grad1_;               // dC/da_i when the head is linear
};

// C(a) = MLP(a) on the flat action vector.
class FlatCritic final : public BacCritic {
 public:
  FlatCritic(std::size_t agents, const std::vector<int>& hidden);

  void reinitialize(std::uint64_t seed) override { net_.reinitialize(seed); }
  std::size_t param_count() const override { return net_.param_count(); }
  nn::Vector& params() override { return net_.params(); }

  nn::Vector predict(const nn::Matrix& actions) const override;
  double loss_and_grad(const nn::Matrix& actions, const nn::Vector& payoffs,
                       nn::Vector& grad) const override;
  double value_and_action_grad(const nn::Vector& action, nn::Vector& dvalue_daction) const override;

 private:
  nn::Mlp net_;
};

std::unique_ptr<BacCritic> make_bac_critic(const BacConfig& cfg, GridShape shape);

class BanditActorCritic final : public Optimizer {
 public:
  explicit BanditActorCritic(BacConfig config = {}) : config_(std::move(config)) {}

  std::string name() const override { return "bac"; }
  void start(const ProblemInfo& problem, std::uint64_t seed) override;
  Design propose(std::size_t step) override;
  void observe(const Design& d, double payoff, std::span<const double>) override;

  // Exposed for tests.
  double train_critic(std::size_t steps);
  void improve_policy();
  const AgentPolicy& policy() const { return policy_; }
  AgentPolicy& policy() { return policy_; }
  BacCritic& critic() { return *critic_; }
  // Replaces the critic after start(); the optimizer takes ownership.
  void set_critic(std::unique_ptr<BacCritic> critic);
  const ExperienceBuffer& buffer() const { return *buffer_; }
  // Agents masked in the most recent policy step.
  const std::vector<std::size_t>& last_mask() const { return last_mask_; }
  // dL/dp per agent in the most recent policy step, zero for masked agents.
  const nn::Vector& last_upstream() const { return last_upstream_; }
  std::size_t critic_reinits() const { return critic_reinits_; }
  void save_state(const std::string& prefix) const;

 private:
  BacConfig config_;
  ProblemInfo problem_;
  std::uint64_t seed_ = 0;
  std::unique_ptr<BacCritic> critic_;
  nn::Adam critic_adam_;
  AgentPolicy policy_;
  nn::Adam policy_adam_;
  std::unique_ptr<ExperienceBuffer> buffer_;
  Rng rng_;
  Rng buffer_rng_;
  std::size_t observed_ = 0;
  std::size_t policy_inits_ = 0;
  std::size_t critic_reinits_ = 0;
  bool policy_ready_ = false;
  std::vector<std::size_t> last_mask_;
  nn::Vector last_upstream_;
};

// ===========================================================================
// Bandit PPO: no critic; the advantage of every agent-action sample is the
// rollout payoff minus the rollout mean, optionally scaled by the rollout
// standard deviation.

struct BppoConfig {
  std::size_t rollout = 32;
  std::size_t updates_per_rollout = 66;
  double clip = 0.4978;
  double entropy_coef = 0.005759;
  double lr = 1e-4;
  std::vector<int> hidden{126, 126, 126, 126};
  std::size_t minibatch = 10000;  // agent-action samples per update
  bool normalize_advantage = true;  // divide by the rollout payoff std
  int bands = 8;
  bool nesterov = false;

  static BppoConfig from_params(Params& p);
};

// min(rho * A, clip(rho, 1 - eps, 1 + eps) * A)
double ppo_clip_objective(double ratio, double advantage, double clip);
// d objective / d ratio: A where the unclipped branch is active, else 0.
double ppo_clip_slope(double ratio, double advantage, double clip);
double bernoulli_entropy(double p);

class BanditPPO final : public Optimizer {
 public:
  explicit BanditPPO(BppoConfig config = {}) : config_(std::move(config)) {}

  std::string name() const override { return "bppo"; }
  void start(const ProblemInfo& problem, std::uint64_t seed) override;
  Design propose(std::size_t step) override;
  void observe(const Design& d, double payoff, std::span<const double>) override;

  // One policy update phase on the given rollout (exposed for tests).
  void update(const std::vector<Design>& rollout, const std::vector<double>& payoffs,
              const nn::Vector& old_probs);
  const AgentPolicy& policy() const { return policy_; }
  AgentPolicy& policy() { return policy_; }
  void save_state(const std::string& prefix) const;

 private:
  BppoConfig config_;
  ProblemInfo problem_;
  AgentPolicy policy_;
  nn::Adam adam_;
  Rng rng_;
  nn::Vector old_probs_;
  std::vector<Design> rollout_;
  std::vector<double> payoffs_;
  std::size_t cursor_ = 0;
};

}  // namespace bintopo
