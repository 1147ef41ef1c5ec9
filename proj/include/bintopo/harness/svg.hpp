#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bintopo/core/design.hpp"
#include "bintopo/env/scene.hpp"

namespace bintopo::svg {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

// Polylines on shared linear axes.
std::string line_plot(const std::vector<Series>& series, const std::string& title,
                      const std::string& x_label, const std::string& y_label);

// One square per voxel, material dark. z slices are laid out left to right.
std::string design_image(const Design& d, int cell_px = 12);

// Diverging red/blue map of a field snapshot, symmetric about zero.
std::string field_image(const fdtd::FieldSnapshot& s, int cell_px = 3);

}  // namespace bintopo::svg
