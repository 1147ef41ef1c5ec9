#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "bintopo/core/errors.hpp"
#include "bintopo/posenc.hpp"

using namespace bintopo;

TEST_SUITE("posenc") {

TEST_CASE("center agent with one band") {
  // 3x3x3 grid: agent (1,1,1) sits at normalized (0,0,0).
  const PositionalEncoder enc(GridShape(3, 3, 3), 1);
  const auto e = enc.encode(GridShape(3, 3, 3).index(1, 1, 1));
  const std::vector<double> expect{0, 0, 1, 0, 0, 1, 0, 0, 1};
  REQUIRE(e.size() == expect.size());
  for (std::size_t i = 0; i < e.size(); ++i) CHECK(e[i] == doctest::Approx(expect[i]).epsilon(1e-15));
}

TEST_CASE("two bands at coordinate one") {
  // Last x index maps to a = 1; f(1) = [1, sin pi, sin 2pi, cos pi, cos 2pi].
  const PositionalEncoder enc(GridShape(5, 1), 2);
  const auto e = enc.encode(4);
  const std::vector<double> fx{1, 0, 0, -1, 1};
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(e[i] - fx[i]) < 1e-12);
}

TEST_CASE("width and normalization") {
  CHECK(PositionalEncoder(GridShape(32, 32), 8).dim() == 51);
  CHECK(PositionalEncoder(GridShape(32, 32), 8).encode(0).size() == 51);
  CHECK(PositionalEncoder::normalize(0, 5) == -1.0);
  CHECK(PositionalEncoder::normalize(4, 5) == 1.0);
  CHECK(PositionalEncoder::normalize(2, 5) == 0.0);
  CHECK(PositionalEncoder::normalize(0, 1) == 0.0);
  // 2D grids: the z block is the encoding of 0.
  const auto e = PositionalEncoder(GridShape(4, 4), 2).encode(5);
  const std::vector<double> z{0, 0, 0, 1, 1};
  for (int i = 0; i < 5; ++i) CHECK(e[10 + i] == z[i]);
}

TEST_CASE("errors") {
  const PositionalEncoder enc(GridShape(4, 4), 2);
  CHECK_THROWS_AS(enc.encode(16), IndexOutOfRange);
  CHECK_THROWS_AS(PositionalEncoder(GridShape(4, 4), 0), ConfigError);
}

TEST_CASE("injective on shipped grids") {
  for (const GridShape s : {GridShape(32, 32), GridShape(16, 16), GridShape(24, 24), GridShape(12, 1),
                            GridShape(6, 6, 6)}) {
    const PositionalEncoder enc(s, 8);
    std::set<std::vector<double>> seen;
    for (std::size_t n = 0; n < s.size(); ++n) seen.insert(enc.encode(n));
    CHECK(seen.size() == s.size());
  }
}

TEST_CASE("mirror symmetry flips odd components only") {
  const GridShape s(7, 5, 3);
  const int b = 3;
  const PositionalEncoder enc(s, b);
  const int block = 2 * b + 1;
  for (std::size_t n = 0; n < s.size(); ++n) {
    const auto c = s.coords(n);
    const std::size_t m = s.index(s.nx - 1 - c[0], c[1], c[2]);
    const auto e = enc.encode(n), f = enc.encode(m);
    for (int k = 0; k <= b; ++k) CHECK(std::abs(e[k] + f[k]) < 1e-12);  // a and sin terms
    for (int k = b + 1; k < block; ++k) CHECK(e[k] == f[k]);           // cos terms
    for (int k = block; k < 3 * block; ++k) CHECK(e[k] == f[k]);       // other axes
  }
}

TEST_CASE("encode_all matches encode") {
  const GridShape s(5, 4);
  const PositionalEncoder enc(s, 4);
  const auto all = enc.encode_all();
  REQUIRE(all.rows() == 20);
  for (std::size_t n = 0; n < s.size(); ++n) {
    const auto e = enc.encode(n);
    for (int k = 0; k < enc.dim(); ++k) CHECK(all(static_cast<Eigen::Index>(n), k) == e[k]);
  }
  CHECK(enc.encode(7) == enc.encode(7));
}

}  // TEST_SUITE
