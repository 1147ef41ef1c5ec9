#include "bintopo/env/scene.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <charconv>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bintopo/core/errors.hpp"
#include "bintopo/core/params.hpp"

namespace bintopo::fdtd {

// ---------------------------------------------------------------------------
// Timing

int SimScene::steps_per_period() const {
  // c*dt = wavelength / P with P the smallest integer keeping S <= 0.99.
  return static_cast<int>(std::ceil(wavelength * std::numbers::sqrt2 / (dx * 0.99)));
}

double SimScene::courant() const {
  return wavelength * std::numbers::sqrt2 / (dx * steps_per_period());
}

int SimScene::steps_for_transits() const {
  double eps_max = eps_background;
  for (const auto& b : blocks) eps_max = std::max(eps_max, b.eps);
  if (design) eps_max = std::max({eps_max, design->eps_material, design->eps_void});
  const double cells_per_step = courant() / std::numbers::sqrt2 / std::sqrt(eps_max);
  const double transit = static_cast<double>(std::max(nx, ny)) / cells_per_step;
  return static_cast<int>(std::ceil(transits * transit)) + ramp_steps() + steps_per_period();
}

void SimScene::validate() const {
  if (nx < 3 || ny < 3) throw ConfigError("scene grid must be at least 3x3");
  if (!(dx > 0.0) || !(wavelength > 0.0)) throw ConfigError("dx and wavelength must be positive");
  auto inside = [&](int x0, int y0, int x1, int y1) {
    return x0 >= 0 && y0 >= 0 && x1 <= nx && y1 <= ny && x0 < x1 && y0 < y1;
  };
  for (const auto& b : blocks) {
    if (!inside(b.x0, b.y0, b.x1, b.y1)) throw ConfigError("material block outside the grid");
    if (!(b.eps >= 1.0)) throw ConfigError("block permittivity must be >= 1");
  }
  if (design) {
    const auto& d = *design;
    if (d.voxels_x < 1 || d.voxels_y < 1 || d.k < 1) throw ConfigError("empty design region");
    if (!inside(d.x0, d.y0, d.x0 + d.k * d.voxels_x, d.y0 + d.k * d.voxels_y)) {
      throw ConfigError("design region outside the grid");
    }
  }
  const int p = pml.cells;
  auto outside_pml = [&](Axis normal, int pos, int lo, int hi) {
    const int n_norm = normal == Axis::x ? nx : ny;
    const int n_tan = normal == Axis::x ? ny : nx;
    return pos >= p + 1 && pos <= n_norm - p - 2 && lo >= p && hi <= n_tan - p && lo < hi;
  };
  if (!outside_pml(source.normal, source.pos, source.lo, source.hi)) {
    throw ConfigError("source line must lie outside the PML");
  }
  if (source.ramp_periods < 0) throw ConfigError("source ramp must be non-negative");
  for (const auto& det : detectors) {
    if (!outside_pml(det.normal, det.pos, det.lo, det.hi)) {
      throw ConfigError("detector '" + det.name + "' must lie outside the PML");
    }
    if (det.sign != 1 && det.sign != -1) throw ConfigError("detector sign must be +1 or -1");
  }
  if (steps < 0) throw ConfigError("scene steps must be non-negative");
}

// ---------------------------------------------------------------------------
// Simulation

YeeGrid2D build_grid(const SimScene& scene, const Design* design) {
  scene.validate();
  YeeGrid2D grid(scene.nx, scene.ny, scene.dx, scene.courant(), scene.pml);
  auto& eps = grid.eps_r();
  std::fill(eps.begin(), eps.end(), scene.eps_background);
  for (const auto& b : scene.blocks) {
    for (int j = b.y0; j < b.y1; ++j) {
      for (int i = b.x0; i < b.x1; ++i) eps[grid.index(i, j)] = b.eps;
    }
  }
  if (scene.design) {
    const auto& r = *scene.design;
    if (design == nullptr) throw ConfigError("scene has a design region but no design was given");
    if (!(design->shape() == r.shape())) throw ShapeMismatch("design does not match the design region");
    for (int v = 0; v < r.voxels_y; ++v) {
      for (int u = 0; u < r.voxels_x; ++u) {
        const double e = design->at(u, v, 0) ? r.eps_material : r.eps_void;
        for (int j = r.y0 + r.k * v; j < r.y0 + r.k * (v + 1); ++j) {
          for (int i = r.x0 + r.k * u; i < r.x0 + r.k * (u + 1); ++i) eps[grid.index(i, j)] = e;
        }
      }
    }
  } else if (design != nullptr) {
    throw ConfigError("scene has no design region");
  }
  grid.commit_materials();
  return grid;
}

FluxMonitor::FluxMonitor(const YeeGrid2D& grid, DetectorSpec spec) : spec_(std::move(spec)) {
  e_prev_.assign(static_cast<std::size_t>(spec_.hi - spec_.lo), 0.0);
  for (int t = spec_.lo; t < spec_.hi; ++t) {
    e_prev_[static_cast<std::size_t>(t - spec_.lo)] =
        spec_.normal == Axis::x ? grid.ez(spec_.pos, t) : grid.ez(t, spec_.pos);
  }
}

void FluxMonitor::sample(const YeeGrid2D& grid, bool record) {
  const auto& hx = grid.hx();
  const auto& hy = grid.hy();
  double total = 0.0;
  for (int t = spec_.lo; t < spec_.hi; ++t) {
    auto& prev = e_prev_[static_cast<std::size_t>(t - spec_.lo)];
    if (spec_.normal == Axis::x) {
      const int i = spec_.pos;
      const double e = grid.ez(i, t);
      const double h = 0.5 * (hy[grid.index(i - 1, t)] + hy[grid.index(i, t)]);
      total += -0.5 * (prev + e) * h;  // S_x = -Ez Hy
      prev = e;
    } else {
      const int j = spec_.pos;
      const double e = grid.ez(t, j);
      const double h = 0.5 * (hx[grid.index(t, j - 1)] + hx[grid.index(t, j)]);
      total += 0.5 * (prev + e) * h;  // S_y = Ez Hx
      prev = e;
    }
  }
  if (record) {
    sum_ += spec_.sign * total * grid.dx();
    ++samples_;
  }
}

double FluxMonitor::flux(std::size_t required) const {
  if (samples_ < required || samples_ == 0) {
    throw NotSteadyState("detector '" + spec_.name + "' has " + std::to_string(samples_) +
                         " of " + std::to_string(required) + " period samples");
  }
  return sum_ / static_cast<double>(samples_);
}

namespace {

struct SourceDriver {
  SourceDriver(const SimScene& scene, const YeeGrid2D& grid) : spec(scene.source) {
    const double n_core = std::sqrt(spec.eps_core);
    const double n_clad = std::sqrt(scene.eps_background);
    const SlabMode mode = solve_slab_mode(scene.wavelength, spec.width * scene.dx, n_core, n_clad);
    for (int t = spec.lo; t < spec.hi; ++t) profile.push_back(mode((t - spec.center) * scene.dx));
    omega = 2.0 * std::numbers::pi * c0 / scene.wavelength;
    ramp_time = spec.ramp_periods * scene.wavelength / c0;
    dt = grid.dt();
  }

  double envelope(double t) const {
    if (t >= ramp_time) return 1.0;
    return 0.5 * (1.0 - std::cos(std::numbers::pi * t / ramp_time));
  }

  void inject(YeeGrid2D& grid) const {
    const double t = grid.time();
    const double s = spec.amplitude * envelope(t) * std::sin(omega * t);
    for (int k = spec.lo; k < spec.hi; ++k) {
      const double v = s * profile[static_cast<std::size_t>(k - spec.lo)];
      if (spec.normal == Axis::x) {
        grid.add_ez(spec.pos, k, v);
      } else {
        grid.add_ez(k, spec.pos, v);
      }
    }
  }

  SourceSpec spec;
  std::vector<double> profile;
  double omega = 0.0, ramp_time = 0.0, dt = 0.0;
};

void run(const SimScene& scene, YeeGrid2D& grid, std::vector<FluxMonitor>* monitors) {
  const SourceDriver source(scene, grid);
  const int period = scene.steps_per_period();
  const int total = scene.total_steps();
  if (total - period < scene.ramp_steps()) {
    throw NotSteadyState("averaging window starts before the source ramp completes");
  }
  const double bound = scene.divergence_bound * std::abs(scene.source.amplitude);
  for (int n = 0; n < total; ++n) {
    grid.step();
    source.inject(grid);
    if (monitors != nullptr) {
      const bool record = n >= total - period;
      for (auto& m : *monitors) m.sample(grid, record);
    }
    if ((n + 1) % period == 0 || n + 1 == total) {
      const double m = grid.max_abs_ez();
      if (!(m <= bound)) {
        throw SimulationDiverged("|Ez| reached " + std::to_string(m) + " after " +
                                 std::to_string(n + 1) + " steps");
      }
    }
  }
}

}  // namespace

std::map<std::string, double> simulate(const SimScene& scene, const Design* design) {
  YeeGrid2D grid = build_grid(scene, design);
  std::vector<FluxMonitor> monitors;
  for (const auto& d : scene.detectors) monitors.emplace_back(grid, d);
  run(scene, grid, &monitors);
  std::map<std::string, double> out;
  const auto period = static_cast<std::size_t>(scene.steps_per_period());
  for (const auto& m : monitors) out[m.spec().name] = m.flux(period);
  return out;
}

FieldSnapshot snapshot_ez(const SimScene& scene, const Design* design) {
  YeeGrid2D grid = build_grid(scene, design);
  run(scene, grid, nullptr);
  return FieldSnapshot{grid.nx(), grid.ny(), grid.ez()};
}

void save_snapshot(const std::string& path, const FieldSnapshot& s) {
  if (s.values.size() != static_cast<std::size_t>(s.nx) * static_cast<std::size_t>(s.ny)) {
    throw LengthMismatch("snapshot size does not match its dimensions");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  auto put32 = [&](std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.put(static_cast<char>((v >> (8 * k)) & 0xffU));
  };
  out.write("BTFS", 4);
  put32(static_cast<std::uint32_t>(s.nx));
  put32(static_cast<std::uint32_t>(s.ny));
  for (double v : s.values) {
    const auto u = std::bit_cast<std::uint64_t>(v);
    for (int k = 0; k < 8; ++k) out.put(static_cast<char>((u >> (8 * k)) & 0xffU));
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

FieldSnapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || bytes.compare(0, 4, "BTFS") != 0) {
    throw FormatError("'" + path + "' is not a field snapshot");
  }
  auto byte = [&](std::size_t i) { return static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i])); };
  auto get32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(byte(off + k) << (8 * k));
    return v;
  };
  FieldSnapshot s;
  s.nx = static_cast<int>(get32(4));
  s.ny = static_cast<int>(get32(8));
  const std::size_t count = static_cast<std::size_t>(s.nx) * static_cast<std::size_t>(s.ny);
  if (bytes.size() != 12 + 8 * count) throw FormatError("snapshot payload size mismatch in '" + path + "'");
  s.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t u = 0;
    for (int k = 0; k < 8; ++k) u |= byte(12 + 8 * i + k) << (8 * k);
    s.values[i] = std::bit_cast<double>(u);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Text scenes

namespace {

Axis parse_axis(const std::string& s) {
  if (s == "x") return Axis::x;
  if (s == "y") return Axis::y;
  throw ConfigError("axis must be x or y, got '" + s + "'");
}

Params section_params(const boost::property_tree::ptree& sec, const std::string& name) {
  std::map<std::string, std::string> kv;
  for (const auto& [k, v] : sec) kv[k] = v.data();
  return Params(kv, name);
}

}  // namespace

SimScene parse_scene(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw FormatError(std::string("scene file: ") + e.what());
  }
  SimScene s;
  bool have_grid = false, have_source = false;
  for (const auto& [name, sec] : tree) {
    Params p = section_params(sec, name);
    if (name == "grid") {
      have_grid = true;
      s.nx = static_cast<int>(p.get_int("nx", 0));
      s.ny = static_cast<int>(p.get_int("ny", 0));
      s.dx = p.get_double("dx", s.dx);
      s.wavelength = p.get_double("wavelength", s.wavelength);
      s.eps_background = p.get_double("eps_background", s.eps_background);
      s.steps = static_cast<int>(p.get_int("steps", 0));
      s.transits = p.get_double("transits", s.transits);
      s.divergence_bound = p.get_double("divergence_bound", s.divergence_bound);
    } else if (name == "pml") {
      s.pml.cells = static_cast<int>(p.get_int("cells", s.pml.cells));
      s.pml.order = p.get_double("order", s.pml.order);
      s.pml.r0 = p.get_double("r0", s.pml.r0);
      s.pml.sigma_max = p.get_double("sigma_max", s.pml.sigma_max);
    } else if (name == "source") {
      have_source = true;
      auto& src = s.source;
      src.normal = parse_axis(p.get_string("normal", "x"));
      src.pos = static_cast<int>(p.get_int("pos", 0));
      src.lo = static_cast<int>(p.get_int("lo", 0));
      src.hi = static_cast<int>(p.get_int("hi", 0));
      src.center = p.get_double("center", 0.5 * (src.lo + src.hi - 1));
      src.width = p.get_double("width", src.width);
      src.eps_core = p.get_double("eps_core", src.eps_core);
      src.amplitude = p.get_double("amplitude", src.amplitude);
      src.ramp_periods = static_cast<int>(p.get_int("ramp_periods", src.ramp_periods));
    } else if (name == "design") {
      DesignRegion d;
      d.x0 = static_cast<int>(p.get_int("x0", 0));
      d.y0 = static_cast<int>(p.get_int("y0", 0));
      d.voxels_x = static_cast<int>(p.get_int("voxels_x", 0));
      d.voxels_y = static_cast<int>(p.get_int("voxels_y", 0));
      d.k = static_cast<int>(p.get_int("k", d.k));
      d.eps_material = p.get_double("eps_material", d.eps_material);
      d.eps_void = p.get_double("eps_void", d.eps_void);
      s.design = d;
    } else if (name.rfind("block.", 0) == 0) {
      Rect r;
      r.x0 = static_cast<int>(p.get_int("x0", 0));
      r.y0 = static_cast<int>(p.get_int("y0", 0));
      r.x1 = static_cast<int>(p.get_int("x1", 0));
      r.y1 = static_cast<int>(p.get_int("y1", 0));
      r.eps = p.get_double("eps", r.eps);
      s.blocks.push_back(r);
    } else if (name.rfind("detector.", 0) == 0) {
      DetectorSpec d;
      d.name = name.substr(9);
      d.normal = parse_axis(p.get_string("normal", "x"));
      d.pos = static_cast<int>(p.get_int("pos", 0));
      d.lo = static_cast<int>(p.get_int("lo", 0));
      d.hi = static_cast<int>(p.get_int("hi", 0));
      d.sign = static_cast<int>(p.get_int("sign", 1));
      s.detectors.push_back(d);
    } else {
      throw ConfigError("unknown scene section [" + name + "]");
    }
    p.finish();
  }
  if (!have_grid || !have_source) throw ConfigError("scene needs [grid] and [source] sections");
  s.validate();
  return s;
}

SimScene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene '" + path + "'");
  return parse_scene(in);
}

void write_scene(std::ostream& out, const SimScene& s) {
  const auto num = [](double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  };
  const auto axis = [](Axis a) { return a == Axis::x ? "x" : "y"; };
  out << "[grid]\nnx = " << s.nx << "\nny = " << s.ny << "\ndx = " << num(s.dx)
      << "\nwavelength = " << num(s.wavelength) << "\neps_background = " << num(s.eps_background)
      << "\nsteps = " << s.steps << "\ntransits = " << num(s.transits)
      << "\ndivergence_bound = " << num(s.divergence_bound) << "\n";
  out << "\n[pml]\ncells = " << s.pml.cells << "\norder = " << num(s.pml.order)
      << "\nr0 = " << num(s.pml.r0) << "\nsigma_max = " << num(s.pml.sigma_max) << "\n";
  const auto& src = s.source;
  out << "\n[source]\nnormal = " << axis(src.normal) << "\npos = " << src.pos << "\nlo = " << src.lo
      << "\nhi = " << src.hi << "\ncenter = " << num(src.center) << "\nwidth = " << num(src.width)
      << "\neps_core = " << num(src.eps_core) << "\namplitude = " << num(src.amplitude)
      << "\nramp_periods = " << src.ramp_periods << "\n";
  if (s.design) {
    const auto& d = *s.design;
    out << "\n[design]\nx0 = " << d.x0 << "\ny0 = " << d.y0 << "\nvoxels_x = " << d.voxels_x
        << "\nvoxels_y = " << d.voxels_y << "\nk = " << d.k << "\neps_material = " << num(d.eps_material)
        << "\neps_void = " << num(d.eps_void) << "\n";
  }
  for (std::size_t b = 0; b < s.blocks.size(); ++b) {
    const auto& r = s.blocks[b];
    out << "\n[block." << b << "]\nx0 = " << r.x0 << "\ny0 = " << r.y0 << "\nx1 = " << r.x1
        << "\ny1 = " << r.y1 << "\neps = " << num(r.eps) << "\n";
  }
  for (const auto& d : s.detectors) {
    out << "\n[detector." << d.name << "]\nnormal = " << axis(d.normal) << "\npos = " << d.pos
        << "\nlo = " << d.lo << "\nhi = " << d.hi << "\nsign = " << d.sign << "\n";
  }
}

// ---------------------------------------------------------------------------
// Built-in scenes

namespace {

struct Layout {
  int r, pml, guide, k, design, span, out_span;

  explicit Layout(const SceneOptions& o)
      : r(o.resolution), pml(16 * o.resolution), guide(8 * o.resolution), k(4 * o.resolution),
        design(o.voxels * 4 * o.resolution), span(32 * o.resolution),
        out_span(12 * o.resolution) {
    if (o.resolution < 1 || o.voxels < 1) throw ConfigError("resolution and voxels must be positive");
  }
};

SimScene base_scene(const SceneOptions& o, const Layout& l) {
  SimScene s;
  s.dx = 25e-9 / l.r;
  s.pml.cells = l.pml;
  s.source.width = l.guide;
  s.source.eps_core = o.eps_core;
  return s;
}

// Source and "in" detector on a guide along x centered at node row yc.
void add_x_feed(SimScene& s, const Layout& l, int yc) {
  s.source.normal = Axis::x;
  s.source.pos = l.pml + 8 * l.r;
  s.source.center = yc;
  s.source.lo = yc - l.span;
  s.source.hi = yc + l.span + 1;
  s.detectors.push_back({"in", Axis::x, l.pml + 24 * l.r, yc - l.span, yc + l.span + 1, 1});
}

// Guide of width l.guide whose node rows are centered on yc.
Rect x_guide(const Layout& l, int yc, int x0, int x1, double eps) {
  return Rect{x0, yc - l.guide / 2, x1, yc - l.guide / 2 + l.guide, eps};
}

Rect y_guide(const Layout& l, int xc, int y0, int y1, double eps) {
  return Rect{xc - l.guide / 2, y0, xc - l.guide / 2 + l.guide, y1, eps};
}

}  // namespace

SimScene straight_guide_scene(const SceneOptions& o) {
  const Layout l(o);
  SimScene s = base_scene(o, l);
  s.nx = 2 * l.pml + 128 * l.r;
  s.ny = 2 * l.pml + 2 * l.span + 16 * l.r;
  const int yc = s.ny / 2;
  s.blocks.push_back(x_guide(l, yc, 0, s.nx, o.eps_core));
  add_x_feed(s, l, yc);
  s.source.center = yc - 0.5;
  s.detectors.push_back({"out", Axis::x, s.nx - l.pml - 24 * l.r, yc - l.span, yc + l.span + 1, 1});
  s.validate();
  return s;
}

SimScene bend_scene(const SceneOptions& o) {
  const Layout l(o);
  SimScene s = base_scene(o, l);
  DesignRegion d;
  d.x0 = l.pml + 40 * l.r;
  d.y0 = l.pml + 40 * l.r;
  d.voxels_x = d.voxels_y = o.voxels;
  d.k = l.k;
  d.eps_material = o.eps_core;
  s.design = d;
  s.nx = d.x0 + l.design + 24 * l.r + l.pml;
  s.ny = d.y0 + l.design + 24 * l.r + l.pml;
  const int yc = d.y0 + (3 * l.design) / 4;
  const int xc = d.x0 + (3 * l.design) / 4;
  s.blocks.push_back(x_guide(l, yc, 0, d.x0, o.eps_core));
  s.blocks.push_back(y_guide(l, xc, 0, d.y0, o.eps_core));
  add_x_feed(s, l, yc);
  s.source.center = yc - 0.5;
  // Output flows toward -y.
  s.detectors.push_back({"out", Axis::y, l.pml + 8 * l.r, xc - l.out_span, xc + l.out_span, -1});
  s.validate();
  return s;
}

SimScene splitter_scene(const SceneOptions& o) {
  const Layout l(o);
  SimScene s = base_scene(o, l);
  DesignRegion d;
  d.x0 = l.pml + 40 * l.r;
  d.y0 = l.pml + 24 * l.r;
  d.voxels_x = d.voxels_y = o.voxels;
  d.k = l.k;
  d.eps_material = o.eps_core;
  s.design = d;
  s.nx = d.x0 + l.design + 40 * l.r + l.pml;
  s.ny = d.y0 + l.design + 24 * l.r + l.pml;
  const int yc = d.y0 + l.design / 2;
  const int y_hi = d.y0 + 3 * l.design / 4;
  const int y_lo = d.y0 + l.design / 4;
  const int xe = d.x0 + l.design;
  s.blocks.push_back(x_guide(l, yc, 0, d.x0, o.eps_core));
  s.blocks.push_back(x_guide(l, y_hi, xe, s.nx, o.eps_core));
  s.blocks.push_back(x_guide(l, y_lo, xe, s.nx, o.eps_core));
  add_x_feed(s, l, yc);
  s.source.center = yc - 0.5;
  const int half = l.design / 4;
  const int xo = xe + 24 * l.r;
  s.detectors.push_back({"out1", Axis::x, xo, y_hi - half, y_hi + half, 1});
  s.detectors.push_back({"out2", Axis::x, xo, y_lo - half, y_lo + half, 1});
  s.validate();
  return s;
}

SimScene reference_scene(const SimScene& scene) {
  SimScene ref = scene;
  ref.design.reset();
  ref.blocks.clear();
  const auto& src = scene.source;
  const int extent = src.normal == Axis::x ? scene.nx : scene.ny;
  for (const auto& b : scene.blocks) {
    Rect r = b;
    if (src.normal == Axis::x && b.x0 <= src.pos && src.pos < b.x1) {
      r.x1 = extent;
      ref.blocks.push_back(r);
    } else if (src.normal == Axis::y && b.y0 <= src.pos && src.pos < b.y1) {
      r.y1 = extent;
      ref.blocks.push_back(r);
    }
  }
  ref.detectors.clear();
  for (const auto& d : scene.detectors) {
    if (d.name == "in") ref.detectors.push_back(d);
  }
  if (ref.detectors.empty()) throw ConfigError("scene has no 'in' detector to normalize against");
  // Keep the original step count so both runs share the same window.
  ref.steps = scene.total_steps();
  return ref;
}

}  // namespace bintopo::fdtd
