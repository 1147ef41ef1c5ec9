#pragma once

#include <Eigen/Core>
#include <vector>

#include "bintopo/core/design.hpp"

namespace bintopo {

// Sin/cos positional encoding of an agent's grid position.
//
// Each axis coordinate is normalized to [-1, 1] (index i on an axis of length
// L maps to -1 + 2i/(L-1); L = 1 maps to 0) and expanded as
//   f(a) = [a, sin(2^0 pi a) .. sin(2^(b-1) pi a), cos(2^0 pi a) .. cos(2^(b-1) pi a)]
// The encoding is concat(f(x), f(y), f(z)), length 3 * (2b + 1).
class PositionalEncoder {
 public:
  PositionalEncoder(GridShape shape, int bands);

  int bands() const { return bands_; }
  int dim() const { return 3 * (2 * bands_ + 1); }
  const GridShape& shape() const { return shape_; }

  std::vector<double> encode(std::size_t agent) const;
  void encode_into(std::size_t agent, double* out) const;

  // N x dim matrix, one row per agent.
  Eigen::MatrixXd encode_all() const;

  static double normalize(int index, int length);

 private:
  void expand(double a, double* out) const;

  GridShape shape_;
  int bands_;
};

}  // namespace bintopo
