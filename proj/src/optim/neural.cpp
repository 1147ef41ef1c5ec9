#include "bintopo/optim/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bintopo/core/errors.hpp"

namespace bintopo {

namespace {

void actions_matrix(const ExperienceBuffer& buffer, const std::vector<std::size_t>& batch,
                    std::size_t agents, nn::Matrix& a, nn::Vector& payoffs) {
  a.resize(static_cast<Eigen::Index>(batch.size()), static_cast<Eigen::Index>(agents));
  payoffs.resize(static_cast<Eigen::Index>(batch.size()));
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const auto& e = buffer[batch[s]];
    const auto bits = e.design.bits();
    for (std::size_t n = 0; n < agents; ++n) {
      a(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(n)) = bits[n];
    }
    payoffs(static_cast<Eigen::Index>(s)) = e.payoff;
  }
}

// Shuffles a uniformly random subset of size k into idx[0..k).
void partial_shuffle(std::vector<std::size_t>& idx, std::size_t k, Rng& rng) {
  const std::size_t n = idx.size();
  for (std::size_t i = 0; i < k && i + 1 < n; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
}

// Agent-relative input rows [O(i), a] for a = 0 (rows 0..N-1) and a = 1.
nn::Matrix agent_action_inputs(GridShape shape, int bands) {
  PositionalEncoder enc(shape, bands);
  const nn::Matrix o = enc.encode_all();
  const Eigen::Index n = o.rows();
  nn::Matrix x(2 * n, o.cols() + 1);
  x.topLeftCorner(n, o.cols()) = o;
  x.bottomLeftCorner(n, o.cols()) = o;
  x.col(o.cols()).head(n).setZero();
  x.col(o.cols()).tail(n).setOnes();
  return x;
}

}  // namespace

// ===========================================================================
// IQL

IqlConfig IqlConfig::from_params(Params& p) {
  IqlConfig c;
  c.lr = p.get_double("lr", c.lr);
  c.batch = p.get_size("batch", c.batch);
  c.buffer = p.get_size("buffer", c.buffer);
  c.hidden = p.get_int_list("hidden", c.hidden);
  c.eps_start = p.get_double("eps_start", c.eps_start);
  c.eps_end = p.get_double("eps_end", c.eps_end);
  c.eps_anneal_fraction = p.get_double("eps_anneal_fraction", c.eps_anneal_fraction);
  c.updates_per_step = p.get_size("updates_per_step", c.updates_per_step);
  c.bands = static_cast<int>(p.get_int("bands", c.bands));
  c.nesterov = p.get_bool("nesterov", c.nesterov);
  if (c.batch < 1 || c.buffer < 1) throw ConfigError("iql batch and buffer must be positive");
  if (c.eps_anneal_fraction <= 0.0) throw ConfigError("iql.eps_anneal_fraction must be positive");
  return c;
}

double iql_epsilon(const IqlConfig& cfg, double t, double total) {
  const double end = cfg.eps_anneal_fraction * total;
  if (t >= end) return cfg.eps_end;
  return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * (t / end);
}

IqlCritic::IqlCritic(GridShape shape, int bands, const std::vector<int>& hidden)
    : inputs_(agent_action_inputs(shape, bands)),
      net_(with_io(static_cast<int>(inputs_.cols()), hidden, 1), nn::Activation::relu,
           nn::Head::linear),
      agents_(shape.size()) {}

nn::Matrix IqlCritic::values() const {
  nn::Mlp::Cache cache;
  return values(cache);
}

nn::Matrix IqlCritic::values(nn::Mlp::Cache& cache) const {
  const nn::Matrix out = net_.forward(inputs_, cache);
  const auto n = static_cast<Eigen::Index>(agents_);
  nn::Matrix v(n, 2);
  v.col(0) = out.col(0).head(n);
  v.col(1) = out.col(0).tail(n);
  return v;
}

double IqlCritic::loss(const ExperienceBuffer& buffer, const std::vector<std::size_t>& batch) const {
  const nn::Matrix v = values();
  double total = 0.0;
  for (auto b : batch) {
    const auto& e = buffer[b];
    for (std::size_t i = 0; i < agents_; ++i) {
      const double err = v(static_cast<Eigen::Index>(i), e.design[i]) - e.payoff;
      total += err * err;
    }
  }
  return total / static_cast<double>(batch.size() * agents_);
}

double IqlCritic::update(const ExperienceBuffer& buffer, const std::vector<std::size_t>& batch,
                         nn::Adam& adam, double lr) {
  if (batch.empty()) throw EmptyBuffer("IQL update with an empty batch");
  nn::Mlp::Cache cache;
  const nn::Matrix v = values(cache);
  const auto n = static_cast<Eigen::Index>(agents_);
  // The loss only touches the 2N distinct (agent, action) inputs, so gather
  // per-input counts and payoff sums instead of expanding the batch.
  nn::Matrix count = nn::Matrix::Zero(n, 2), rsum = nn::Matrix::Zero(n, 2);
  double total = 0.0;
  for (auto b : batch) {
    const auto& e = buffer[b];
    for (Eigen::Index i = 0; i < n; ++i) {
      const int a = e.design[static_cast<std::size_t>(i)];
      count(i, a) += 1.0;
      rsum(i, a) += e.payoff;
      const double err = v(i, a) - e.payoff;
      total += err * err;
    }
  }
  const double scale = 2.0 / static_cast<double>(batch.size() * agents_);
  nn::Matrix up(2 * n, 1);
  up.col(0).head(n) = scale * (count.col(0).cwiseProduct(v.col(0)) - rsum.col(0));
  up.col(0).tail(n) = scale * (count.col(1).cwiseProduct(v.col(1)) - rsum.col(1));
  nn::Vector grad;
  net_.backward(cache, up, grad, false);
  adam.step(net_.params(), grad, lr);
  return total / static_cast<double>(batch.size() * agents_);
}

std::vector<std::uint8_t> greedy_actions(const nn::Matrix& values) {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(values.rows()));
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = values(i, 1) > values(i, 0) ? 1 : 0;
  }
  return out;
}

void IndependentQ::start(const ProblemInfo& problem, std::uint64_t seed) {
  problem_ = problem;
  critic_ = IqlCritic(problem.shape, config_.bands, config_.hidden);
  critic_.net().reinitialize(derive_seed(seed, Stream::init));
  adam_ = nn::Adam(critic_.net().param_count(), nn::AdamConfig{0.9, 0.999, 1e-8, config_.nesterov});
  buffer_ = std::make_unique<ExperienceBuffer>(config_.buffer);
  act_rng_.reseed(derive_seed(seed, Stream::algorithm));
  buffer_rng_.reseed(derive_seed(seed, Stream::buffer));
}

Design IndependentQ::propose(std::size_t step) {
  const double eps = iql_epsilon(config_, static_cast<double>(step - 1),
                                 static_cast<double>(problem_.budget));
  const auto greedy = greedy_actions(critic_.values());
  Design d(problem_.shape);
  for (std::size_t n = 0; n < d.size(); ++n) {
    d.set(n, act_rng_.uniform() < eps ? act_rng_.bit() : greedy[n]);
  }
  return d;
}

void IndependentQ::observe(const Design& d, double payoff, std::span<const double>) {
  buffer_->push(d, payoff);
  for (std::size_t k = 0; k < config_.updates_per_step; ++k) {
    critic_.update(*buffer_, buffer_->sample_indices(config_.batch, buffer_rng_), adam_, config_.lr);
  }
}

void IndependentQ::save_state(const std::string& prefix) const {
  nn::save_checkpoint(prefix + ".critic", critic_.net());
  adam_.save(prefix + ".critic_adam");
}

// ===========================================================================
// BAC critics

PooledCritic::PooledCritic(GridShape shape, int bands, const std::vector<int>& trunk_hidden,
                           const std::vector<int>& head_hidden)
    : agents_(shape.size()), inputs_(agent_action_inputs(shape, bands)) {
  if (trunk_hidden.empty()) throw ConfigError("pooled critic needs at least one trunk layer");
  std::vector<int> trunk_sizes{static_cast<int>(inputs_.cols())};
  trunk_sizes.insert(trunk_sizes.end(), trunk_hidden.begin(), trunk_hidden.end());
  trunk_ = nn::Mlp(trunk_sizes, nn::Activation::relu, nn::Head::linear);
  head_ = nn::Mlp(with_io(trunk_hidden.back(), head_hidden, 1), nn::Activation::relu,
                  nn::Head::linear);
  params_ = nn::Vector::Zero(static_cast<Eigen::Index>(trunk_.param_count() + head_.param_count()));
}

void PooledCritic::sync_in() const {
  const auto nt = static_cast<Eigen::Index>(trunk_.param_count());
  trunk_.params() = params_.head(nt);
  head_.params() = params_.tail(static_cast<Eigen::Index>(head_.param_count()));
}

void PooledCritic::reinitialize(std::uint64_t seed) {
  trunk_.reinitialize(seed);
  head_.reinitialize(splitmix64(seed));
  params_ << trunk_.params(), head_.params();
}

nn::Matrix PooledCritic::pooled(const nn::Matrix& f0, const nn::Matrix& f1,
                                const nn::Matrix& actions) const {
  // mean_i g(i, a_i) = (sum_i f0_i + sum_i a_i (f1_i - f0_i)) / N
  const double inv = 1.0 / static_cast<double>(agents_);
  nn::Matrix p = actions * (f1 - f0);
  p.rowwise() += f0.colwise().sum();
  return p * inv;
}

nn::Vector PooledCritic::predict(const nn::Matrix& actions) const {
  sync_in();
  const auto n = static_cast<Eigen::Index>(agents_);
  const bool binary = (actions.array() == 0.0 || actions.array() == 1.0).all();
  if (binary) {
    const nn::Matrix f = trunk_.forward(inputs_);
    return head_.forward(pooled(f.topRows(n), f.bottomRows(n), actions)).col(0);
  }
  // Relaxed actions: run the trunk on each agent's actual action value.
  nn::Matrix x = inputs_.topRows(n);
  nn::Matrix p(actions.rows(), trunk_.output_dim());
  for (Eigen::Index b = 0; b < actions.rows(); ++b) {
    x.col(x.cols() - 1) = actions.row(b).transpose();
    p.row(b) = trunk_.forward(x).colwise().mean();
  }
  return head_.forward(p).col(0);
}

double PooledCritic::loss_and_grad(const nn::Matrix& actions, const nn::Vector& payoffs,
                                   nn::Vector& grad) const {
  sync_in();
  const auto n = static_cast<Eigen::Index>(agents_);
  const double inv = 1.0 / static_cast<double>(agents_);
  auto& w = work_;
  const nn::Matrix& f = trunk_.forward(inputs_, w.trunk);
  w.delta.noalias() = f.bottomRows(n) - f.topRows(n);
  w.pooled.noalias() = actions * w.delta;
  w.pooled.rowwise() += f.topRows(n).colwise().sum();
  w.pooled *= inv;
  const nn::Vector err = head_.forward(w.pooled, w.head).col(0) - payoffs;
  const double b = static_cast<double>(payoffs.size());
  const double loss = err.squaredNorm() / b;

  const nn::Matrix dc = (2.0 / b) * err;
  w.ghead.setZero(static_cast<Eigen::Index>(head_.param_count()));
  const nn::Matrix dp = head_.backward(w.head, dc, w.ghead);
  // d pooled / d g(i, 1) = a_i / N and d pooled / d g(i, 0) = (1 - a_i) / N.
  w.dfeat.resize(2 * n, f.cols());
  w.dfeat.bottomRows(n).noalias() = inv * (actions.transpose() * dp);
  w.dfeat.topRows(n) = -w.dfeat.bottomRows(n);
  w.dfeat.topRows(n).rowwise() += inv * dp.colwise().sum();
  w.gtrunk.setZero(static_cast<Eigen::Index>(trunk_.param_count()));
  trunk_.backward(w.trunk, w.dfeat, w.gtrunk, false);

  grad.resize(params_.size());
  grad << w.gtrunk, w.ghead;
  return loss;
}

void PooledCritic::prepare_action_gradients() {
  sync_in();
  const auto n = static_cast<Eigen::Index>(agents_);
  nn::Mlp::Cache tc;
  const nn::Matrix f = trunk_.forward(inputs_, tc);
  const nn::Matrix t = trunk_.input_tangent(tc, static_cast<int>(inputs_.cols()) - 1);
  delta_ = f.bottomRows(n) - f.topRows(n);
  base_ = f.topRows(n).colwise().sum().transpose();
  tangent0_ = t.topRows(n);
  tangent1_ = t.bottomRows(n);
  if (action_separable()) {
    const double inv = 1.0 / static_cast<double>(agents_);
    const nn::Vector w = head_.weight(0).row(0).transpose();
    grad0_ = inv * (tangent0_ * w);
    grad1_ = inv * (tangent1_ * w);
  }
}

double PooledCritic::value_and_action_grad(const nn::Vector& action,
                                           nn::Vector& dvalue_daction) const {
  const auto n = static_cast<Eigen::Index>(agents_);
  if (action.size() != n) throw ShapeMismatch("critic action length");
  if (delta_.rows() != n) throw ConfigError("prepare_action_gradients() not called");
  const double inv = 1.0 / static_cast<double>(agents_);
  const nn::Matrix p = (inv * (base_ + delta_.transpose() * action)).transpose();
  dvalue_daction.resize(n);
  if (action_separable()) {
    for (Eigen::Index i = 0; i < n; ++i) dvalue_daction(i) = action(i) > 0.5 ? grad1_(i) : grad0_(i);
    return head_.forward(p)(0, 0);
  }
  nn::Mlp::Cache hc;
  const double value = head_.forward(p, hc)(0, 0);
  nn::Vector unused;
  const nn::Vector dp = head_.backward(hc, nn::Matrix::Ones(1, 1), unused).row(0).transpose();
  // dC/da_i = tangent(i, a_i) . dp / N
  const nn::Vector g0 = tangent0_ * dp, g1 = tangent1_ * dp;
  for (Eigen::Index i = 0; i < n; ++i) {
    dvalue_daction(i) = inv * (action(i) > 0.5 ? g1(i) : g0(i));
  }
  return value;
}

FlatCritic::FlatCritic(std::size_t agents, const std::vector<int>& hidden)
    : net_(with_io(static_cast<int>(agents), hidden, 1), nn::Activation::relu, nn::Head::linear) {}

nn::Vector FlatCritic::predict(const nn::Matrix& actions) const {
  return net_.forward(actions).col(0);
}

double FlatCritic::loss_and_grad(const nn::Matrix& actions, const nn::Vector& payoffs,
                                 nn::Vector& grad) const {
  nn::Mlp::Cache cache;
  const nn::Vector c = net_.forward(actions, cache).col(0);
  const nn::Vector err = c - payoffs;
  const double b = static_cast<double>(payoffs.size());
  nn::Matrix dc = (2.0 / b) * err;
  grad.resize(0);
  net_.backward(cache, dc, grad, false);
  return err.squaredNorm() / b;
}

double FlatCritic::value_and_action_grad(const nn::Vector& action, nn::Vector& dvalue_daction) const {
  nn::Mlp::Cache cache;
  const nn::Matrix x = action.transpose();
  const double value = net_.forward(x, cache)(0, 0);
  nn::Vector unused;
  dvalue_daction = net_.backward(cache, nn::Matrix::Ones(1, 1), unused).row(0).transpose();
  return value;
}

std::unique_ptr<BacCritic> make_bac_critic(const BacConfig& cfg, GridShape shape) {
  if (cfg.critic == "pooled") {
    return std::make_unique<PooledCritic>(shape, cfg.bands, cfg.critic_hidden, cfg.critic_head_hidden);
  }
  if (cfg.critic == "flat") return std::make_unique<FlatCritic>(shape.size(), cfg.critic_hidden);
  throw ConfigError("unknown BAC critic '" + cfg.critic + "' (pooled | flat)");
}

// ===========================================================================
// BAC

BacConfig BacConfig::from_params(Params& p) {
  BacConfig c;
  c.critic_steps = p.get_size("critic_steps", c.critic_steps);
  c.policy_steps = p.get_size("policy_steps", c.policy_steps);
  c.batch = p.get_size("batch", c.batch);
  c.critic_lr = p.get_double("critic_lr", c.critic_lr);
  c.policy_lr = p.get_double("policy_lr", c.policy_lr);
  c.critic_hidden = p.get_int_list("critic_hidden", c.critic_hidden);
  c.critic_head_hidden = p.get_int_list("critic_head_hidden", c.critic_head_hidden);
  c.policy_hidden = p.get_int_list("policy_hidden", c.policy_hidden);
  c.mask_fraction = p.get_double("mask_fraction", c.mask_fraction);
  c.critic_reinit_period = p.get_size("critic_reinit_period", c.critic_reinit_period);
  c.reinit_burst_multiplier = p.get_size("reinit_burst_multiplier", c.reinit_burst_multiplier);
  c.warmup_samples = p.get_size("warmup_samples", c.batch);
  c.buffer = p.get_size("buffer", c.buffer);
  c.critic = p.get_string("critic", c.critic);
  c.bands = static_cast<int>(p.get_int("bands", c.bands));
  c.nesterov = p.get_bool("nesterov", c.nesterov);
  if (c.mask_fraction < 0.0 || c.mask_fraction >= 1.0) {
    throw ConfigError("bac.mask_fraction must lie in [0, 1)");
  }
  if (c.batch < 1) throw ConfigError("bac.batch must be positive");
  if (c.warmup_samples < 1) throw ConfigError("bac.warmup_samples must be positive");
  return c;
}

std::size_t BacConfig::masked_agents(std::size_t n) const {
  return static_cast<std::size_t>(std::llround(mask_fraction * static_cast<double>(n)));
}

void BanditActorCritic::start(const ProblemInfo& problem, std::uint64_t seed) {
  problem_ = problem;
  seed_ = seed;
  critic_ = make_bac_critic(config_, problem.shape);
  critic_->reinitialize(derive_seed(seed, Stream::init, 0));
  critic_adam_ = nn::Adam(critic_->param_count(), nn::AdamConfig{0.9, 0.999, 1e-8, config_.nesterov});
  policy_ = AgentPolicy(problem.shape, config_.bands, config_.policy_hidden);
  policy_.reinitialize(derive_seed(seed, Stream::init, 1));
  policy_adam_ = nn::Adam(policy_.net().param_count(), nn::AdamConfig{0.9, 0.999, 1e-8, config_.nesterov});
  buffer_ = std::make_unique<ExperienceBuffer>(config_.buffer);
  rng_.reseed(derive_seed(seed, Stream::algorithm));
  buffer_rng_.reseed(derive_seed(seed, Stream::buffer));
  observed_ = 0;
  policy_inits_ = 0;
  critic_reinits_ = 0;
  policy_ready_ = false;
  last_mask_.clear();
}

Design BanditActorCritic::propose(std::size_t) {
  if (!policy_ready_) return Design::random(problem_.shape, rng_);
  return policy_.sample(problem_.shape, policy_.probs(), rng_);
}

double BanditActorCritic::train_critic(std::size_t steps) {
  nn::Matrix a;
  nn::Vector payoffs, grad;
  double loss = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const auto batch = buffer_->sample_indices(config_.batch, buffer_rng_);
    actions_matrix(*buffer_, batch, problem_.shape.size(), a, payoffs);
    loss = critic_->loss_and_grad(a, payoffs, grad);
    critic_adam_.step(critic_->params(), grad, config_.critic_lr);
  }
  return loss;
}

void BanditActorCritic::improve_policy() {
  const std::size_t n = problem_.shape.size();
  policy_.reinitialize(derive_seed(seed_, Stream::init, 2 + policy_inits_++));
  policy_adam_.reset();
  critic_->prepare_action_gradients();

  const std::size_t masked = config_.masked_agents(n);
  const std::size_t active = n - masked;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const bool separable = critic_->action_separable();
  nn::Vector action = nn::Vector::Zero(static_cast<Eigen::Index>(n)), dc_da;
  for (std::size_t g = 0; g < config_.policy_steps; ++g) {
    // The first `active` entries of the shuffled order keep their gradient.
    partial_shuffle(order, active, rng_);
    std::vector<std::size_t> rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(active));
    last_mask_.assign(order.begin() + static_cast<std::ptrdiff_t>(active), order.end());

    nn::Mlp::Cache cache;
    nn::Vector p_rows;
    if (separable) {
      // Masked agents cannot change dC/da of the active ones: sample only
      // the active rows.
      p_rows = policy_.probs(rows, cache);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto ri = static_cast<Eigen::Index>(rows[r]);
        action(ri) = rng_.uniform() < p_rows(static_cast<Eigen::Index>(r)) ? 1.0 : 0.0;
      }
    } else {
      const nn::Vector p = policy_.probs();
      for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        action(ii) = rng_.uniform() < p(ii) ? 1.0 : 0.0;
      }
      if (rows.empty()) continue;
      p_rows = policy_.probs(rows, cache);
    }
    if (rows.empty()) continue;
    critic_->value_and_action_grad(action, dc_da);

    nn::Vector up(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto ri = static_cast<Eigen::Index>(rows[r]);
      const auto st = nn::straight_through(action(ri), p_rows(static_cast<Eigen::Index>(r)));
      // Ascent on C: descend on -C, straight through the sample.
      up(static_cast<Eigen::Index>(r)) = -st.backward(dc_da(ri));
    }
    if (g + 1 == config_.policy_steps) {
      last_upstream_ = nn::Vector::Zero(static_cast<Eigen::Index>(n));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        last_upstream_(static_cast<Eigen::Index>(rows[r])) = up(static_cast<Eigen::Index>(r));
      }
    }
    nn::Vector grad;
    policy_.backward(cache, up, grad);
    policy_adam_.step(policy_.net().params(), grad, config_.policy_lr);
  }
}

void BanditActorCritic::set_critic(std::unique_ptr<BacCritic> critic) {
  if (!critic) throw ConfigError("set_critic needs a critic");
  critic_ = std::move(critic);
  critic_adam_ = nn::Adam(critic_->param_count(), critic_adam_.config());
}

void BanditActorCritic::observe(const Design& d, double payoff, std::span<const double>) {
  buffer_->push(d, payoff);
  ++observed_;
  if (observed_ < config_.warmup_samples) return;
  if (observed_ >= problem_.budget) return;  // nothing left to propose
  if (config_.critic_reinit_period > 0 && observed_ % config_.critic_reinit_period == 0) {
    critic_->reinitialize(derive_seed(seed_, Stream::init, 1000003 + ++critic_reinits_));
    critic_adam_.reset();
    train_critic(config_.critic_steps * config_.reinit_burst_multiplier);
  } else {
    train_critic(config_.critic_steps);
  }
  improve_policy();
  policy_ready_ = true;
}

void BanditActorCritic::save_state(const std::string& prefix) const {
  nn::save_checkpoint(prefix + ".policy", policy_.net());
  policy_adam_.save(prefix + ".policy_adam");
  critic_adam_.save(prefix + ".critic_adam");
  const auto& cp = const_cast<BacCritic&>(*critic_).params();
  nn::write_f64_le(prefix + ".critic.bin", cp.data(), static_cast<std::size_t>(cp.size()));
}

// ===========================================================================
// BPPO

BppoConfig BppoConfig::from_params(Params& p) {
  BppoConfig c;
  c.rollout = p.get_size("rollout", c.rollout);
  c.updates_per_rollout = p.get_size("updates_per_rollout", c.updates_per_rollout);
  c.clip = p.get_double("clip", c.clip);
  c.entropy_coef = p.get_double("entropy_coef", c.entropy_coef);
  c.lr = p.get_double("lr", c.lr);
  c.hidden = p.get_int_list("hidden", c.hidden);
  c.minibatch = p.get_size("minibatch", c.minibatch);
  c.normalize_advantage = p.get_bool("normalize_advantage", c.normalize_advantage);
  c.bands = static_cast<int>(p.get_int("bands", c.bands));
  c.nesterov = p.get_bool("nesterov", c.nesterov);
  if (c.rollout < 1 || c.minibatch < 1) throw ConfigError("bppo rollout and minibatch must be positive");
  return c;
}

double ppo_clip_objective(double ratio, double advantage, double clip) {
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  return std::min(ratio * advantage, clipped * advantage);
}

double ppo_clip_slope(double ratio, double advantage, double clip) {
  if (advantage > 0.0) return ratio <= 1.0 + clip ? advantage : 0.0;
  if (advantage < 0.0) return ratio >= 1.0 - clip ? advantage : 0.0;
  return 0.0;
}

double bernoulli_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
  return h;
}

void BanditPPO::start(const ProblemInfo& problem, std::uint64_t seed) {
  problem_ = problem;
  policy_ = AgentPolicy(problem.shape, config_.bands, config_.hidden);
  policy_.reinitialize(derive_seed(seed, Stream::init));
  adam_ = nn::Adam(policy_.net().param_count(), nn::AdamConfig{0.9, 0.999, 1e-8, config_.nesterov});
  rng_.reseed(derive_seed(seed, Stream::algorithm));
  rollout_.clear();
  payoffs_.clear();
  cursor_ = 0;
}

Design BanditPPO::propose(std::size_t) {
  if (cursor_ == rollout_.size()) {
    old_probs_ = policy_.probs();
    rollout_.clear();
    payoffs_.clear();
    for (std::size_t s = 0; s < config_.rollout; ++s) {
      rollout_.push_back(policy_.sample(problem_.shape, old_probs_, rng_));
    }
    cursor_ = 0;
  }
  return rollout_[cursor_];
}

void BanditPPO::observe(const Design&, double payoff, std::span<const double>) {
  payoffs_.push_back(payoff);
  ++cursor_;
  if (payoffs_.size() == rollout_.size()) update(rollout_, payoffs_, old_probs_);
}

void BanditPPO::update(const std::vector<Design>& rollout, const std::vector<double>& payoffs,
                       const nn::Vector& old_probs) {
  const std::size_t n = policy_.agents();
  const std::size_t r = rollout.size();
  if (r == 0 || payoffs.size() != r) throw ConfigError("BPPO update needs one payoff per rollout design");
  const double baseline = std::accumulate(payoffs.begin(), payoffs.end(), 0.0) / static_cast<double>(r);
  std::vector<double> adv(r);
  for (std::size_t s = 0; s < r; ++s) adv[s] = payoffs[s] - baseline;
  if (config_.normalize_advantage) {
    double var = 0.0;
    for (double a : adv) var += a * a;
    const double sd = std::sqrt(var / static_cast<double>(r));
    if (sd > 1e-12) {
      for (double& a : adv) a /= sd;
    }
  }

  const std::size_t total = n * r;
  const std::size_t mb = std::min(config_.minibatch, total);
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  nn::Vector slope_sum(static_cast<Eigen::Index>(n)), count(static_cast<Eigen::Index>(n));
  for (std::size_t u = 0; u < config_.updates_per_rollout; ++u) {
    partial_shuffle(idx, mb, rng_);
    nn::Mlp::Cache cache;
    const nn::Vector p = policy_.probs(cache);
    slope_sum.setZero();
    count.setZero();
    for (std::size_t k = 0; k < mb; ++k) {
      const std::size_t agent = idx[k] % n;
      const std::size_t s = idx[k] / n;
      const auto ai = static_cast<Eigen::Index>(agent);
      const bool one = rollout[s][agent] != 0;
      const double po = old_probs(ai);
      const double ratio = one ? p(ai) / po : (1.0 - p(ai)) / (1.0 - po);
      const double dratio = one ? 1.0 / po : -1.0 / (1.0 - po);
      slope_sum(ai) += ppo_clip_slope(ratio, adv[s], config_.clip) * dratio;
      count(ai) += 1.0;
    }
    nn::Vector up(static_cast<Eigen::Index>(n));
    const double inv = 1.0 / static_cast<double>(mb);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
      const double pc = std::clamp(p(i), 1e-12, 1.0 - 1e-12);
      const double dentropy = std::log((1.0 - pc) / pc);
      // Maximize surrogate + entropy bonus; the optimizer minimizes.
      up(i) = -inv * (slope_sum(i) + config_.entropy_coef * count(i) * dentropy);
    }
    nn::Vector grad;
    policy_.backward(cache, up, grad);
    adam_.step(policy_.net().params(), grad, config_.lr);
  }
}

void BanditPPO::save_state(const std::string& prefix) const {
  nn::save_checkpoint(prefix + ".policy", policy_.net());
  adam_.save(prefix + ".policy_adam");
}

}  // namespace bintopo
