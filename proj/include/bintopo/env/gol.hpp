#pragma once

#include <cstdint>
#include <vector>

#include "bintopo/core/environment.hpp"

namespace bintopo {

// One Conway step on a width x height grid (x fastest) with dead cells
// beyond the border.
std::vector<std::uint8_t> gol_step(std::span<const std::uint8_t> grid, int width, int height);
Design gol_step(const Design& d);

// Game-of-Life stability payoff: alive ratio minus the ratio of cells that
// change in one step. Unclamped, so the range is [-1, 1].
class GolEnv final : public PayoffEnvironment {
 public:
  explicit GolEnv(int width = 32, int height = 32);

  std::string name() const override { return "gol"; }
  GridShape shape() const override { return shape_; }
  double evaluate(const Design& d) const override;

  double alive_ratio(const Design& d) const;
  double changed_ratio(const Design& d) const;

 private:
  GridShape shape_;
};

}  // namespace bintopo
