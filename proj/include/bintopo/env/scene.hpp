#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bintopo/core/design.hpp"
#include "bintopo/env/fdtd.hpp"

namespace bintopo::fdtd {

enum class Axis { x, y };

// Axis-aligned block of material, half-open cell range [x0, x1) x [y0, y1).
struct Rect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double eps = 1.0;
};

// Rectangle of design voxels, each covering k x k cells, with (x0, y0) the
// lower-left cell. Voxel (u, v) of a design maps to cells
// [x0 + k*u, x0 + k*(u+1)) x [y0 + k*v, y0 + k*(v+1)).
struct DesignRegion {
  int x0 = 0, y0 = 0;
  int voxels_x = 0, voxels_y = 0;
  int k = 4;
  double eps_material = 12.25;
  double eps_void = 1.0;

  GridShape shape() const { return GridShape(voxels_x, voxels_y, 1); }
};

// Soft line source on the line `normal = pos`, spanning transverse cells
// [lo, hi), with the fundamental mode of a slab of the given width and
// core permittivity centered at `center` (cells). The CW amplitude is
// ramped up with a raised cosine over ramp_periods periods.
struct SourceSpec {
  Axis normal = Axis::x;
  int pos = 0;
  int lo = 0, hi = 0;
  double center = 0.0;
  double width = 8.0;  // cells
  double eps_core = 12.25;
  double amplitude = 1.0;
  int ramp_periods = 3;
};

// Flux line on `normal = pos` over transverse cells [lo, hi). sign = +1
// counts power flowing toward +normal as positive.
struct DetectorSpec {
  std::string name;
  Axis normal = Axis::x;
  int pos = 0;
  int lo = 0, hi = 0;
  int sign = 1;
};

struct SimScene {
  int nx = 0, ny = 0;
  double dx = 25e-9;
  double wavelength = 1550e-9;
  PmlSpec pml;
  double eps_background = 1.0;
  std::vector<Rect> blocks;
  std::optional<DesignRegion> design;
  SourceSpec source;
  std::vector<DetectorSpec> detectors;
  int steps = 0;             // total time steps; 0 picks steps_for_transits()
  double transits = 3.0;     // used when steps = 0
  double divergence_bound = 1e6;

  // Time steps per optical period. dt is chosen so one period is an exact
  // number of steps with Courant factor <= 0.99.
  int steps_per_period() const;
  double courant() const;
  int ramp_steps() const { return source.ramp_periods * steps_per_period(); }
  // Steps for `transits` crossings of the domain diagonal at the slowest
  // phase velocity present, plus the ramp and one averaging period.
  int steps_for_transits() const;
  int total_steps() const { return steps > 0 ? steps : steps_for_transits(); }

  // Throws ConfigError on geometry outside the grid, detectors inside the
  // PML, or a design region that does not fit.
  void validate() const;
};

// Runs the scene with `design` painted into the design region (required
// iff the scene has one). Flux is the Poynting flux through each
// detector averaged over the final optical period. Throws
// SimulationDiverged if |Ez| exceeds divergence_bound * amplitude and
// NotSteadyState if the averaging window starts before the ramp ends.
std::map<std::string, double> simulate(const SimScene& scene, const Design* design = nullptr);

// Grid with materials painted, before any time stepping.
YeeGrid2D build_grid(const SimScene& scene, const Design* design = nullptr);

// Accumulates the time-averaged flux through one detector line.
class FluxMonitor {
 public:
  FluxMonitor(const YeeGrid2D& grid, DetectorSpec spec);

  // Call after every step; samples are accumulated once `record` is set.
  void sample(const YeeGrid2D& grid, bool record);
  std::size_t samples() const { return samples_; }
  // Mean flux over the recorded samples. Throws NotSteadyState if fewer
  // than `required` samples were recorded.
  double flux(std::size_t required) const;
  const DetectorSpec& spec() const { return spec_; }

 private:
  DetectorSpec spec_;
  std::vector<double> e_prev_;
  double sum_ = 0.0;
  std::size_t samples_ = 0;
};

// Ez field after running a scene, as a flat array plus its dimensions.
struct FieldSnapshot {
  int nx = 0, ny = 0;
  std::vector<double> values;  // x fastest
};

FieldSnapshot snapshot_ez(const SimScene& scene, const Design* design = nullptr);
// Binary layout: "BTFS" magic, uint32 nx, uint32 ny, then nx*ny float64,
// all little-endian.
void save_snapshot(const std::string& path, const FieldSnapshot& s);
FieldSnapshot load_snapshot(const std::string& path);

// INI-style scene description; see configs/ for the section layout.
SimScene parse_scene(std::istream& in);
SimScene load_scene(const std::string& path);
// Inverse of parse_scene; blocks are written as [block.0], [block.1], ...
void write_scene(std::ostream& out, const SimScene& scene);

// Built-in scenes. `resolution` multiplies the cell count per length.
struct SceneOptions {
  int resolution = 1;
  int voxels = 16;  // design voxels per side
  double eps_core = 12.25;
};

// Straight guide along x with an input and a downstream detector.
SimScene straight_guide_scene(const SceneOptions& o = {});
// 90 degree bend: input guide from the left, output guide leaving the
// design region downward. Detectors "in" and "out".
SimScene bend_scene(const SceneOptions& o = {});
// Input guide from the left, two output guides to the right. Detectors
// "in", "out1" (upper) and "out2" (lower).
SimScene splitter_scene(const SceneOptions& o = {});
// The scene's input guide run straight through to the far PML, with only
// the "in" detector. Its flux is the incident power used for normalizing.
SimScene reference_scene(const SimScene& scene);

}  // namespace bintopo::fdtd
