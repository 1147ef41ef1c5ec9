#include "bintopo/posenc.hpp"

#include <cmath>
#include <numbers>

#include "bintopo/core/errors.hpp"

namespace bintopo {

PositionalEncoder::PositionalEncoder(GridShape shape, int bands)
    : shape_(shape), bands_(bands) {
  if (bands_ < 1) throw ConfigError("positional encoding needs >= 1 band");
}

double PositionalEncoder::normalize(int index, int length) {
  if (length <= 1) return 0.0;
  // Integer numerator, so mirrored indices map to exactly opposite values.
  return static_cast<double>(2 * index - (length - 1)) / static_cast<double>(length - 1);
}

void PositionalEncoder::expand(double a, double* out) const {
  out[0] = a;
  double freq = std::numbers::pi;
  for (int k = 0; k < bands_; ++k) {
    out[1 + k] = std::sin(freq * a);
    out[1 + bands_ + k] = std::cos(freq * a);
    freq *= 2.0;
  }
}

void PositionalEncoder::encode_into(std::size_t agent, double* out) const {
  const auto c = shape_.coords(agent);  // throws IndexOutOfRange
  const int width = 2 * bands_ + 1;
  expand(normalize(c[0], shape_.nx), out);
  expand(normalize(c[1], shape_.ny), out + width);
  expand(normalize(c[2], shape_.nz), out + 2 * width);
}

std::vector<double> PositionalEncoder::encode(std::size_t agent) const {
  std::vector<double> out(static_cast<std::size_t>(dim()));
  encode_into(agent, out.data());
  return out;
}

Eigen::MatrixXd PositionalEncoder::encode_all() const {
  const auto n = shape_.size();
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(
      static_cast<Eigen::Index>(n), dim());
  for (std::size_t i = 0; i < n; ++i) encode_into(i, m.row(static_cast<Eigen::Index>(i)).data());
  return m;
}

}  // namespace bintopo
