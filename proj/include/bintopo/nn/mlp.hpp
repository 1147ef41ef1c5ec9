#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace bintopo::nn {

using Matrix = Eigen::MatrixXd;  // rows are batch entries
using Vector = Eigen::VectorXd;

enum class Activation { relu, tanh };
enum class Head { linear, sigmoid };

std::string to_string(Activation a);
std::string to_string(Head h);
Activation parse_activation(const std::string& s);
Head parse_head(const std::string& s);

// Fully connected network. All parameters live in one flat vector so an
// optimizer can treat them as a single array. Layer l stores its weight
// matrix (out x in, column-major) followed by its bias.
class Mlp {
 public:
  // Intermediate values kept by forward() for backward(). Reusing one
  // cache across calls of the same batch size avoids reallocation.
  struct Cache {
    std::vector<Matrix> inputs;  // input to each layer (inputs[0] = x)
    std::vector<Matrix> pre;     // pre-activation of each layer
    Matrix output;
    mutable std::vector<Matrix> work;  // backward scratch, one per layer
  };

  Mlp() = default;
  Mlp(std::vector<int> layer_sizes, Activation activation, Head head);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  std::size_t layer_count() const { return sizes_.size() - 1; }
  Activation activation() const { return activation_; }
  Head head() const { return head_; }

  std::size_t param_count() const { return static_cast<std::size_t>(params_.size()); }
  Vector& params() { return params_; }
  const Vector& params() const { return params_; }

  Eigen::Map<const Matrix> weight(std::size_t layer) const;
  Eigen::Map<const Vector> bias(std::size_t layer) const;
  Eigen::Map<Matrix> weight(std::size_t layer);
  Eigen::Map<Vector> bias(std::size_t layer);

  Matrix forward(const Matrix& x) const;
  const Matrix& forward(const Matrix& x, Cache& cache) const;  // returns cache.output
  Vector forward_one(const Vector& x) const;

  // Given dL/d(output) for the batch in `cache`, adds dL/d(params) into
  // param_grad (resized and zeroed if empty) and returns dL/dx (an empty
  // matrix when input_grad is false).
  Matrix backward(const Cache& cache, const Matrix& upstream, Vector& param_grad,
                  bool input_grad = true) const;

  // Forward-mode derivative of every output with respect to input column
  // `col`, one row per cached batch entry.
  Matrix input_tangent(const Cache& cache, int col) const;

  // Weights and biases uniform in +-scale*sqrt(1/fan_in); deterministic per seed.
  void reinitialize(std::uint64_t seed, double scale = 1.0);

 private:
  void check_input(const Matrix& x) const;

  std::vector<int> sizes_;
  std::vector<std::size_t> weight_offset_;
  std::vector<std::size_t> bias_offset_;
  Activation activation_ = Activation::relu;
  Head head_ = Head::linear;
  Vector params_;
};

// Flat little-endian float64 parameter file plus a JSON sidecar holding
// the layer sizes, activation, head and a CRC32 of the binary payload.
// Files written: <prefix>.bin and <prefix>.json.
void save_checkpoint(const std::string& prefix, const Mlp& model);
Mlp load_checkpoint(const std::string& prefix);

void write_f64_le(const std::string& path, const double* data, std::size_t n);
std::vector<double> read_f64_le(const std::string& path);
std::uint32_t crc32_of(const double* data, std::size_t n);

}  // namespace bintopo::nn
