#include "bintopo/nn/mlp.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

#include "bintopo/core/errors.hpp"
#include "bintopo/core/rng.hpp"

namespace bintopo::nn {

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }
std::string to_string(Head h) { return h == Head::linear ? "linear" : "sigmoid"; }

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + s + "'");
}

Head parse_head(const std::string& s) {
  if (s == "linear") return Head::linear;
  if (s == "sigmoid") return Head::sigmoid;
  throw ConfigError("unknown output head '" + s + "'");
}

Mlp::Mlp(std::vector<int> layer_sizes, Activation activation, Head head)
    : sizes_(std::move(layer_sizes)), activation_(activation), head_(head) {
  if (sizes_.size() < 2) throw ShapeMismatch("an MLP needs at least input and output sizes");
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] < 1 || sizes_[l + 1] < 1) throw ShapeMismatch("layer sizes must be positive");
    weight_offset_.push_back(offset);
    offset += static_cast<std::size_t>(sizes_[l]) * static_cast<std::size_t>(sizes_[l + 1]);
    bias_offset_.push_back(offset);
    offset += static_cast<std::size_t>(sizes_[l + 1]);
  }
  params_ = Vector::Zero(static_cast<Eigen::Index>(offset));
}

Eigen::Map<const Matrix> Mlp::weight(std::size_t l) const {
  return {params_.data() + weight_offset_[l], sizes_[l + 1], sizes_[l]};
}
Eigen::Map<const Vector> Mlp::bias(std::size_t l) const {
  return {params_.data() + bias_offset_[l], sizes_[l + 1]};
}
Eigen::Map<Matrix> Mlp::weight(std::size_t l) {
  return {params_.data() + weight_offset_[l], sizes_[l + 1], sizes_[l]};
}
Eigen::Map<Vector> Mlp::bias(std::size_t l) {
  return {params_.data() + bias_offset_[l], sizes_[l + 1]};
}

void Mlp::check_input(const Matrix& x) const {
  if (x.cols() != input_dim()) {
    throw ShapeMismatch("MLP expects input width " + std::to_string(input_dim()) +
                        ", got " + std::to_string(x.cols()));
  }
}

namespace {

void apply_activation(Activation a, Matrix& z) {
  if (a == Activation::relu) {
    z = z.cwiseMax(0.0);
  } else {
    z = z.array().tanh().matrix();
  }
}

void apply_head(Head h, Matrix& z) {
  if (h == Head::sigmoid) z = (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

}  // namespace

Matrix Mlp::forward(const Matrix& x) const {
  check_input(x);
  Matrix a = x;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    Matrix z = a * weight(l).transpose();
    z.rowwise() += bias(l).transpose();
    if (l + 1 < layer_count()) {
      apply_activation(activation_, z);
    } else {
      apply_head(head_, z);
    }
    a = std::move(z);
  }
  return a;
}

const Matrix& Mlp::forward(const Matrix& x, Cache& cache) const {
  check_input(x);
  cache.inputs.resize(layer_count());
  cache.pre.resize(layer_count());
  cache.inputs[0] = x;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    Matrix& z = cache.pre[l];
    z.noalias() = cache.inputs[l] * weight(l).transpose();
    z.rowwise() += bias(l).transpose();
    if (l + 1 < layer_count()) {
      if (activation_ == Activation::relu) {
        cache.inputs[l + 1] = z.cwiseMax(0.0);
      } else {
        cache.inputs[l + 1] = z.array().tanh().matrix();
      }
    } else if (head_ == Head::sigmoid) {
      cache.output = (1.0 / (1.0 + (-z.array()).exp())).matrix();
    } else {
      cache.output = z;
    }
  }
  return cache.output;
}

Vector Mlp::forward_one(const Vector& x) const {
  Matrix row = x.transpose();
  return forward(row).row(0).transpose();
}

Matrix Mlp::backward(const Cache& cache, const Matrix& upstream, Vector& param_grad,
                     bool input_grad) const {
  if (upstream.rows() != cache.output.rows() || upstream.cols() != output_dim()) {
    throw ShapeMismatch("upstream gradient shape does not match forward output");
  }
  if (param_grad.size() == 0) param_grad = Vector::Zero(params_.size());
  if (param_grad.size() != params_.size()) throw ShapeMismatch("parameter gradient size");

  cache.work.resize(layer_count() + 1);
  Matrix* dz = &cache.work[layer_count()];
  *dz = upstream;
  if (head_ == Head::sigmoid) {
    dz->array() *= cache.output.array() * (1.0 - cache.output.array());
  }
  for (std::size_t l = layer_count(); l-- > 0;) {
    Eigen::Map<Matrix> dw(param_grad.data() + weight_offset_[l], sizes_[l + 1], sizes_[l]);
    Eigen::Map<Vector> db(param_grad.data() + bias_offset_[l], sizes_[l + 1]);
    dw.noalias() += dz->transpose() * cache.inputs[l];
    db += dz->colwise().sum().transpose();
    if (l == 0) return input_grad ? Matrix(*dz * weight(l)) : Matrix();
    Matrix& da = cache.work[l];
    da.noalias() = *dz * weight(l);
    // da now holds dL/d(inputs[l]); turn it into dL/d(pre[l-1]) in place.
    if (activation_ == Activation::relu) {
      da = (cache.pre[l - 1].array() > 0.0).select(da, 0.0);
    } else {
      const auto t = cache.inputs[l].array();  // tanh(pre[l-1])
      da.array() *= 1.0 - t * t;
    }
    dz = &da;
  }
  return {};  // unreachable
}

Matrix Mlp::input_tangent(const Cache& cache, int col) const {
  if (col < 0 || col >= input_dim()) throw IndexOutOfRange("tangent column out of range");
  const Eigen::Index rows = cache.inputs[0].rows();
  Matrix dz = weight(0).col(col).transpose().replicate(rows, 1);
  for (std::size_t l = 1; l < layer_count(); ++l) {
    const Matrix& zprev = cache.pre[l - 1];
    Matrix da;
    if (activation_ == Activation::relu) {
      da = (zprev.array() > 0.0).select(dz, 0.0);
    } else {
      const auto t = cache.inputs[l].array();
      da = (dz.array() * (1.0 - t * t)).matrix();
    }
    dz = da * weight(l).transpose();
  }
  if (head_ == Head::sigmoid) {
    dz.array() *= cache.output.array() * (1.0 - cache.output.array());
  }
  return dz;
}

void Mlp::reinitialize(std::uint64_t seed, double scale) {
  Rng rng(seed);
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const double bound = scale * std::sqrt(1.0 / static_cast<double>(sizes_[l]));
    auto w = weight(l);
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = bound * (2.0 * rng.uniform() - 1.0);
    }
    auto b = bias(l);
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = bound * (2.0 * rng.uniform() - 1.0);
  }
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

std::string le_bytes(const double* data, std::size_t n) {
  std::string bytes(n * 8, '\0');
  for (std::size_t i = 0; i < n; ++i) {
    auto u = std::bit_cast<std::uint64_t>(data[i]);
    for (int k = 0; k < 8; ++k) bytes[i * 8 + k] = static_cast<char>((u >> (8 * k)) & 0xffU);
  }
  return bytes;
}

std::string hex32(std::uint32_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(8) << std::setfill('0') << v;
  return os.str();
}

}  // namespace

std::uint32_t crc32_of(const double* data, std::size_t n) {
  const auto bytes = le_bytes(data, n);
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

void write_f64_le(const std::string& path, const double* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  const auto bytes = le_bytes(data, n);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<double> read_f64_le(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 8 != 0) throw FormatError("'" + path + "' is not a float64 array");
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t u = 0;
    for (int k = 0; k < 8; ++k) {
      u |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + k])) << (8 * k);
    }
    out[i] = std::bit_cast<double>(u);
  }
  return out;
}

void save_checkpoint(const std::string& prefix, const Mlp& model) {
  const auto& p = model.params();
  write_f64_le(prefix + ".bin", p.data(), model.param_count());
  nlohmann::json meta;
  meta["format"] = "bintopo-mlp-v1";
  meta["layer_sizes"] = model.layer_sizes();
  meta["activation"] = to_string(model.activation());
  meta["head"] = to_string(model.head());
  meta["count"] = model.param_count();
  meta["crc32"] = hex32(crc32_of(p.data(), model.param_count()));
  std::ofstream out(prefix + ".json");
  if (!out) throw IoError("cannot open '" + prefix + ".json' for writing");
  out << meta.dump(2) << '\n';
}

Mlp load_checkpoint(const std::string& prefix) {
  std::ifstream in(prefix + ".json");
  if (!in) throw IoError("cannot open '" + prefix + ".json'");
  nlohmann::json meta;
  try {
    in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad checkpoint sidecar: ") + e.what());
  }
  Mlp model(meta.at("layer_sizes").get<std::vector<int>>(),
            parse_activation(meta.at("activation").get<std::string>()),
            parse_head(meta.at("head").get<std::string>()));
  auto values = read_f64_le(prefix + ".bin");
  if (values.size() != model.param_count()) {
    throw FormatError("checkpoint holds " + std::to_string(values.size()) +
                      " values, layer sizes need " + std::to_string(model.param_count()));
  }
  if (hex32(crc32_of(values.data(), values.size())) != meta.at("crc32").get<std::string>()) {
    throw FormatError("checkpoint checksum mismatch for '" + prefix + "'");
  }
  model.params() = Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  return model;
}

}  // namespace bintopo::nn
