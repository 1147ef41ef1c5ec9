#pragma once

#include <array>
#include <map>
#include <span>
#include <string>

#include "bintopo/core/environment.hpp"
#include "bintopo/env/scene.hpp"

namespace bintopo {

enum class Edge { bottom, top, left, right };

// Projection onto manufacturable designs. connected_no_cavities removes
// material not 4-connected to the anchor edge, then fills air that cannot
// reach the region boundary.
struct FabricationConstraint {
  enum class Mode { none, connected_no_cavities };
  Mode mode = Mode::none;
  Edge anchor = Edge::bottom;

  static FabricationConstraint parse(const std::string& mode, const std::string& anchor);
};

Design apply_fabrication(const Design& d, const FabricationConstraint& c);

// Invariant checks used by tests: every material voxel reaches the anchor
// edge, and every air voxel reaches the region boundary.
bool material_anchored(const Design& d, Edge anchor);
bool no_enclosed_air(const Design& d);

// 1 - mean_i (measured_i - target_i)^2, clamped to [0, 1].
double splitter_objective(std::span<const double> measured, std::span<const double> targets);

struct PhotonicsOptions {
  fdtd::SceneOptions scene;
  FabricationConstraint fabrication;
};

// Shared machinery: a scene with a design region and the incident flux
// from its reference run.
class PhotonicEnvBase : public PayoffEnvironment {
 public:
  GridShape shape() const override { return scene_.design->shape(); }
  Design project(const Design& d) const override;

  const fdtd::SimScene& scene() const { return scene_; }
  double incident_flux() const { return incident_; }
  const FabricationConstraint& fabrication() const { return fab_; }
  // Fluxes normalized by the incident flux, keyed by detector name.
  std::map<std::string, double> fractions(const Design& d) const;

 protected:
  PhotonicEnvBase(fdtd::SimScene scene, FabricationConstraint fab);

 private:
  fdtd::SimScene scene_;
  FabricationConstraint fab_;
  double incident_ = 0.0;
};

// 90 degree waveguide bend; payoff is the transmitted fraction.
class BendEnv final : public PhotonicEnvBase {
 public:
  explicit BendEnv(PhotonicsOptions o = {});
  explicit BendEnv(fdtd::SimScene scene, FabricationConstraint fab = {});

  std::string name() const override { return "bend"; }
  double evaluate(const Design& d) const override;
};

// 1 -> 2 power splitter; payoff is splitter_objective against the targets.
class SplitterEnv final : public PhotonicEnvBase {
 public:
  explicit SplitterEnv(PhotonicsOptions o = {}, std::array<double, 2> targets = {0.65, 0.35});
  SplitterEnv(fdtd::SimScene scene, FabricationConstraint fab, std::array<double, 2> targets);

  std::string name() const override { return "splitter"; }
  double evaluate(const Design& d) const override;
  const std::array<double, 2>& targets() const { return targets_; }

 private:
  std::array<double, 2> targets_;
};

}  // namespace bintopo
