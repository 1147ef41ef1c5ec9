#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bintopo/core/rng.hpp"

namespace bintopo {

struct GridShape {
  int nx = 1;
  int ny = 1;
  int nz = 1;

  GridShape() = default;
  GridShape(int nx_, int ny_, int nz_ = 1);

  std::size_t size() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }
  bool is_2d() const { return nz == 1; }

  // Row-major with x fastest: n = x + nx * (y + ny * z).
  std::size_t index(int x, int y, int z = 0) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(nx) *
               (static_cast<std::size_t>(y) +
                static_cast<std::size_t>(ny) * static_cast<std::size_t>(z));
  }
  std::array<int, 3> coords(std::size_t n) const;

  bool operator==(const GridShape&) const = default;
};

std::string to_string(const GridShape& shape);

// A joint binary action: one bit per agent (voxel), laid out per GridShape.
class Design {
 public:
  Design() = default;
  explicit Design(GridShape shape);  // all zero
  Design(GridShape shape, std::vector<std::uint8_t> bits);

  static Design random(GridShape shape, Rng& rng);
  static Design filled(GridShape shape, std::uint8_t value);
  // Parses a string of '0'/'1' characters in index order.
  static Design from_string(GridShape shape, const std::string& bits);

  const GridShape& shape() const { return shape_; }
  std::size_t size() const { return bits_.size(); }

  std::uint8_t operator[](std::size_t n) const { return bits_[n]; }
  std::uint8_t at(int x, int y, int z = 0) const {
    return bits_[shape_.index(x, y, z)];
  }
  void set(std::size_t n, std::uint8_t value);
  void set(int x, int y, int z, std::uint8_t value) {
    set(shape_.index(x, y, z), value);
  }

  std::span<const std::uint8_t> bits() const { return bits_; }
  std::size_t count_ones() const;
  Design complement() const;
  std::string to_string() const;

  bool operator==(const Design&) const = default;

 private:
  GridShape shape_;
  std::vector<std::uint8_t> bits_;
};

std::size_t hamming_distance(std::span<const std::uint8_t> a,
                             std::span<const std::uint8_t> b);

// 1 - hamming(d, target) / N.
double hamming_payoff(const Design& d, std::span<const std::uint8_t> target);

// Portable binary design text format:
//   PBD <nx> <ny> <nz>
//   nz blocks of ny lines of nx characters in {0,1}
void write_pbd(std::ostream& out, const Design& d);
Design read_pbd(std::istream& in);
void save_pbd(const std::string& path, const Design& d);
Design load_pbd(const std::string& path);

}  // namespace bintopo
