#include "bintopo/nn/optim.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>

#include "bintopo/core/errors.hpp"

namespace bintopo::nn {

Adam::Adam(std::size_t n, AdamConfig config)
    : config_(config),
      m_(Vector::Zero(static_cast<Eigen::Index>(n))),
      v_(Vector::Zero(static_cast<Eigen::Index>(n))) {}

void Adam::reset() {
  m_.setZero();
  v_.setZero();
  t_ = 0;
}

void Adam::step(Vector& params, const Vector& grads, double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ShapeMismatch("Adam state has " + std::to_string(m_.size()) +
                        " entries, got params " + std::to_string(params.size()) +
                        " and grads " + std::to_string(grads.size()));
  }
  const double b1 = config_.b1, b2 = config_.b2;
  ++t_;
  const double t = static_cast<double>(t_);
  m_ = b1 * m_ + (1.0 - b1) * grads;
  v_ = b2 * v_ + (1.0 - b2) * grads.cwiseProduct(grads);
  const double bc2 = 1.0 - std::pow(b2, t);
  const auto denom = (v_.array() / bc2).sqrt() + config_.eps;
  if (config_.nesterov) {
    const double bc1_next = 1.0 - std::pow(b1, t + 1.0);
    const double bc1 = 1.0 - std::pow(b1, t);
    params.array() -= lr * ((b1 / bc1_next) * m_.array() + ((1.0 - b1) / bc1) * grads.array()) / denom;
  } else {
    const double bc1 = 1.0 - std::pow(b1, t);
    params.array() -= lr * (m_.array() / bc1) / denom;
  }
}

void Adam::save(const std::string& prefix) const {
  Vector both(m_.size() + v_.size());
  both << m_, v_;
  write_f64_le(prefix + ".bin", both.data(), static_cast<std::size_t>(both.size()));
  nlohmann::json meta;
  meta["format"] = "bintopo-adam-v1";
  meta["count"] = m_.size();
  meta["step"] = t_;
  meta["b1"] = config_.b1;
  meta["b2"] = config_.b2;
  meta["eps"] = config_.eps;
  meta["nesterov"] = config_.nesterov;
  meta["crc32"] = crc32_of(both.data(), static_cast<std::size_t>(both.size()));
  std::ofstream out(prefix + ".json");
  if (!out) throw IoError("cannot open '" + prefix + ".json' for writing");
  out << meta.dump(2) << '\n';
}

Adam Adam::load(const std::string& prefix) {
  std::ifstream in(prefix + ".json");
  if (!in) throw IoError("cannot open '" + prefix + ".json'");
  nlohmann::json meta;
  in >> meta;
  AdamConfig cfg{meta.at("b1").get<double>(), meta.at("b2").get<double>(),
                 meta.at("eps").get<double>(), meta.at("nesterov").get<bool>()};
  const auto n = meta.at("count").get<std::size_t>();
  auto values = read_f64_le(prefix + ".bin");
  if (values.size() != 2 * n) throw FormatError("Adam checkpoint size mismatch");
  if (crc32_of(values.data(), values.size()) != meta.at("crc32").get<std::uint32_t>()) {
    throw FormatError("Adam checkpoint checksum mismatch");
  }
  Adam a(n, cfg);
  a.m_ = Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(n));
  a.v_ = Eigen::Map<Vector>(values.data() + n, static_cast<Eigen::Index>(n));
  a.t_ = meta.at("step").get<std::int64_t>();
  return a;
}

LrSchedule LrSchedule::constant(double lr) {
  LrSchedule s;
  s.kind = Kind::constant;
  s.peak_lr = lr;
  return s;
}

LrSchedule LrSchedule::cosine_warmup(double peak, std::int64_t warmup, std::int64_t total) {
  if (warmup < 0 || total < 1 || warmup > total) {
    throw ConfigError("cosine schedule needs 0 <= warmup <= total, total >= 1");
  }
  LrSchedule s;
  s.kind = Kind::cosine_warmup;
  s.peak_lr = peak;
  s.warmup_steps = warmup;
  s.total_steps = total;
  return s;
}

double LrSchedule::operator()(std::int64_t t) const {
  if (kind == Kind::constant) return peak_lr;
  if (t <= 0) return warmup_steps == 0 ? peak_lr : 0.0;
  if (t < warmup_steps) {
    return peak_lr * static_cast<double>(t) / static_cast<double>(warmup_steps);
  }
  if (t >= total_steps) return 0.0;
  const double span = static_cast<double>(total_steps - warmup_steps);
  const double frac = static_cast<double>(t - warmup_steps) / span;
  return 0.5 * peak_lr * (1.0 + std::cos(std::numbers::pi * frac));
}

StraightThrough straight_through(double sample, double prob) {
  if (!(prob >= 0.0 && prob <= 1.0)) throw ConfigError("straight-through probability outside [0,1]");
  return StraightThrough{sample, prob};
}

}  // namespace bintopo::nn
