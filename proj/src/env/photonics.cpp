#include "bintopo/env/photonics.hpp"

#include <algorithm>
#include <deque>

#include "bintopo/core/errors.hpp"

namespace bintopo {

// ---------------------------------------------------------------------------
// Fabrication mapping

FabricationConstraint FabricationConstraint::parse(const std::string& mode, const std::string& anchor) {
  FabricationConstraint c;
  if (mode == "none") {
    c.mode = Mode::none;
  } else if (mode == "connected-no-cavities") {
    c.mode = Mode::connected_no_cavities;
  } else {
    throw ConfigError("fabrication mode must be none or connected-no-cavities, got '" + mode + "'");
  }
  if (anchor == "bottom") {
    c.anchor = Edge::bottom;
  } else if (anchor == "top") {
    c.anchor = Edge::top;
  } else if (anchor == "left") {
    c.anchor = Edge::left;
  } else if (anchor == "right") {
    c.anchor = Edge::right;
  } else {
    throw ConfigError("fabrication anchor must be bottom, top, left or right, got '" + anchor + "'");
  }
  return c;
}

namespace {

void require_2d(const Design& d) {
  if (!d.shape().is_2d()) throw ShapeMismatch("fabrication mapping needs a 2D design");
}

bool on_edge(int u, int v, int nx, int ny, Edge e) {
  switch (e) {
    case Edge::bottom: return v == 0;
    case Edge::top: return v == ny - 1;
    case Edge::left: return u == 0;
    case Edge::right: return u == nx - 1;
  }
  return false;
}

bool on_boundary(int u, int v, int nx, int ny) {
  return u == 0 || v == 0 || u == nx - 1 || v == ny - 1;
}

// 4-connected flood fill through voxels equal to `value`, seeded from those
// for which seed(u, v) holds.
template <class Seed>
std::vector<std::uint8_t> reach(const Design& d, std::uint8_t value, Seed seed) {
  const int nx = d.shape().nx, ny = d.shape().ny;
  std::vector<std::uint8_t> seen(d.size(), 0);
  std::deque<std::pair<int, int>> queue;
  for (int v = 0; v < ny; ++v) {
    for (int u = 0; u < nx; ++u) {
      const auto k = static_cast<std::size_t>(u + nx * v);
      if (d[k] == value && seed(u, v)) {
        seen[k] = 1;
        queue.emplace_back(u, v);
      }
    }
  }
  constexpr int du[4] = {1, -1, 0, 0};
  constexpr int dv[4] = {0, 0, 1, -1};
  while (!queue.empty()) {
    const auto [u, v] = queue.front();
    queue.pop_front();
    for (int n = 0; n < 4; ++n) {
      const int a = u + du[n], b = v + dv[n];
      if (a < 0 || b < 0 || a >= nx || b >= ny) continue;
      const auto k = static_cast<std::size_t>(a + nx * b);
      if (!seen[k] && d[k] == value) {
        seen[k] = 1;
        queue.emplace_back(a, b);
      }
    }
  }
  return seen;
}

}  // namespace

Design apply_fabrication(const Design& d, const FabricationConstraint& c) {
  require_2d(d);
  if (c.mode == FabricationConstraint::Mode::none) return d;
  const int nx = d.shape().nx, ny = d.shape().ny;
  Design out = d;
  const auto anchored = reach(out, 1, [&](int u, int v) { return on_edge(u, v, nx, ny, c.anchor); });
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (out[k] == 1 && !anchored[k]) out.set(k, 0);
  }
  const auto open = reach(out, 0, [&](int u, int v) { return on_boundary(u, v, nx, ny); });
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (out[k] == 0 && !open[k]) out.set(k, 1);
  }
  return out;
}

bool material_anchored(const Design& d, Edge anchor) {
  require_2d(d);
  const int nx = d.shape().nx, ny = d.shape().ny;
  const auto seen = reach(d, 1, [&](int u, int v) { return on_edge(u, v, nx, ny, anchor); });
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (d[k] == 1 && !seen[k]) return false;
  }
  return true;
}

bool no_enclosed_air(const Design& d) {
  require_2d(d);
  const int nx = d.shape().nx, ny = d.shape().ny;
  const auto seen = reach(d, 0, [&](int u, int v) { return on_boundary(u, v, nx, ny); });
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (d[k] == 0 && !seen[k]) return false;
  }
  return true;
}

double splitter_objective(std::span<const double> measured, std::span<const double> targets) {
  if (measured.size() != targets.size() || measured.empty()) {
    throw LengthMismatch("splitter objective needs one measurement per target");
  }
  double mse = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double e = measured[i] - targets[i];
    mse += e * e;
  }
  mse /= static_cast<double>(measured.size());
  return std::clamp(1.0 - mse, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Environments

PhotonicEnvBase::PhotonicEnvBase(fdtd::SimScene scene, FabricationConstraint fab)
    : scene_(std::move(scene)), fab_(fab) {
  if (!scene_.design) throw ConfigError("photonic environment needs a design region");
  scene_.validate();
  if (scene_.steps == 0) scene_.steps = scene_.steps_for_transits();
  const auto ref = fdtd::simulate(fdtd::reference_scene(scene_));
  incident_ = ref.at("in");
  if (!(incident_ > 0.0)) throw SimulationDiverged("reference run carries no incident power");
}

Design PhotonicEnvBase::project(const Design& d) const { return apply_fabrication(d, fab_); }

std::map<std::string, double> PhotonicEnvBase::fractions(const Design& d) const {
  check_shape(d);
  const Design mapped = project(d);
  auto flux = fdtd::simulate(scene_, &mapped);
  for (auto& [name, value] : flux) value /= incident_;
  return flux;
}

BendEnv::BendEnv(PhotonicsOptions o) : BendEnv(fdtd::bend_scene(o.scene), o.fabrication) {}

BendEnv::BendEnv(fdtd::SimScene scene, FabricationConstraint fab)
    : PhotonicEnvBase(std::move(scene), fab) {}

double BendEnv::evaluate(const Design& d) const {
  return std::clamp(fractions(d).at("out"), 0.0, 1.0);
}

SplitterEnv::SplitterEnv(PhotonicsOptions o, std::array<double, 2> targets)
    : SplitterEnv(fdtd::splitter_scene(o.scene), o.fabrication, targets) {}

SplitterEnv::SplitterEnv(fdtd::SimScene scene, FabricationConstraint fab, std::array<double, 2> targets)
    : PhotonicEnvBase(std::move(scene), fab), targets_(targets) {
  if (targets_[0] < 0.0 || targets_[1] < 0.0 || targets_[0] + targets_[1] > 1.0) {
    throw ConfigError("splitter targets must be non-negative with sum <= 1");
  }
}

double SplitterEnv::evaluate(const Design& d) const {
  const auto f = fractions(d);
  const std::array<double, 2> measured{f.at("out1"), f.at("out2")};
  return splitter_objective(measured, targets_);
}

}  // namespace bintopo
