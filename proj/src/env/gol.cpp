#include "bintopo/env/gol.hpp"

#include <algorithm>

#include "bintopo/core/errors.hpp"

namespace bintopo {

std::vector<std::uint8_t> gol_step(std::span<const std::uint8_t> grid, int width, int height) {
  if (grid.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ShapeMismatch("grid size does not match width x height");
  }
  const auto w = static_cast<std::size_t>(width);
  std::vector<std::uint8_t> next(grid.size(), 0);
  // Row sums of three, computed once per row pair; dead padding at the edges.
  std::vector<std::uint8_t> above(w), here(w), below(w);
  auto triple = [&](std::size_t row, std::vector<std::uint8_t>& out) {
    const std::uint8_t* r = grid.data() + row * w;
    for (std::size_t x = 0; x < w; ++x) {
      std::uint8_t s = r[x];
      if (x > 0) s += r[x - 1];
      if (x + 1 < w) s += r[x + 1];
      out[x] = s;
    }
  };
  std::fill(above.begin(), above.end(), 0);
  triple(0, here);
  for (int y = 0; y < height; ++y) {
    if (y + 1 < height) {
      triple(static_cast<std::size_t>(y) + 1, below);
    } else {
      std::fill(below.begin(), below.end(), 0);
    }
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (std::size_t x = 0; x < w; ++x) {
      const std::uint8_t self = grid[row + x];
      const int neighbours = above[x] + here[x] + below[x] - self;
      next[row + x] = (neighbours == 3 || (self && neighbours == 2)) ? 1 : 0;
    }
    std::swap(above, here);
    std::swap(here, below);
  }
  return next;
}

Design gol_step(const Design& d) {
  if (!d.shape().is_2d()) throw ShapeMismatch("Game of Life needs a 2D design");
  return Design(d.shape(), gol_step(d.bits(), d.shape().nx, d.shape().ny));
}

GolEnv::GolEnv(int width, int height) : shape_(width, height, 1) {}

double GolEnv::alive_ratio(const Design& d) const {
  check_shape(d);
  return static_cast<double>(d.count_ones()) / static_cast<double>(d.size());
}

double GolEnv::changed_ratio(const Design& d) const {
  check_shape(d);
  const auto next = gol_step(d.bits(), shape_.nx, shape_.ny);
  return static_cast<double>(hamming_distance(next, d.bits())) / static_cast<double>(d.size());
}

double GolEnv::evaluate(const Design& d) const {
  check_shape(d);
  const auto next = gol_step(d.bits(), shape_.nx, shape_.ny);
  const double n = static_cast<double>(d.size());
  return static_cast<double>(d.count_ones()) / n -
         static_cast<double>(hamming_distance(next, d.bits())) / n;
}

}  // namespace bintopo
