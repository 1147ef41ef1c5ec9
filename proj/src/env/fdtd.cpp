#include "bintopo/env/fdtd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bintopo/core/errors.hpp"

namespace bintopo::fdtd {

double PmlSpec::max_loss_rate(double dx) const {
  if (sigma_max > 0.0) return sigma_max;
  if (cells <= 0) return 0.0;
  return -(order + 1.0) * c0 * std::log(r0) / (2.0 * cells * dx);
}

YeeGrid2D::YeeGrid2D(int nx, int ny, double dx, double courant, PmlSpec pml)
    : nx_(nx), ny_(ny), dx_(dx), courant_(courant), pml_(pml) {
  if (nx < 3 || ny < 3) throw ShapeMismatch("Yee grid needs at least 3x3 cells");
  if (!(dx > 0.0)) throw ConfigError("grid spacing must be positive");
  if (!(courant > 0.0 && courant <= 1.0)) throw ConfigError("Courant factor must lie in (0, 1]");
  if (pml.cells < 0 || 2 * pml.cells >= std::min(nx, ny)) {
    throw ConfigError("PML thickness leaves no interior");
  }
  dt_ = courant * dx / (c0 * std::numbers::sqrt2);
  const std::size_t n = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  eps_.assign(n, 1.0);
  inv_eps_.assign(n, 1.0);
  ez_.assign(n, 0.0);
  ezx_.assign(n, 0.0);
  ezy_.assign(n, 0.0);
  hx_.assign(n, 0.0);
  hy_.assign(n, 0.0);
  build_coefficients();
}

void YeeGrid2D::build_coefficients() {
  const double cn = c0 * dt_ / dx_;
  const double smax = pml_.max_loss_rate(dx_);
  const double p = pml_.cells;
  auto coeffs = [&](int count, double offset, std::vector<double>& a, std::vector<double>& b) {
    a.assign(static_cast<std::size_t>(count), 1.0);
    b.assign(static_cast<std::size_t>(count), cn);
    if (pml_.cells == 0) return;
    const double hi = static_cast<double>(count) - 1.0 - p;
    for (int i = 0; i < count; ++i) {
      const double x = i + offset;
      const double depth = std::max({p - x, x - hi, 0.0});
      if (depth <= 0.0) continue;
      const double s = smax * std::pow(std::min(depth, p) / p, pml_.order);
      const double e = std::exp(-s * dt_);
      a[static_cast<std::size_t>(i)] = e;
      b[static_cast<std::size_t>(i)] = (1.0 - e) / (s * dt_) * cn;
    }
  };
  // Node counts along each axis are nx, ny; the half-node arrays use the
  // same length and the last entry is unused.
  coeffs(nx_, 0.0, ax_e_, bx_e_);
  coeffs(nx_, 0.5, ax_h_, bx_h_);
  coeffs(ny_, 0.0, ay_e_, by_e_);
  coeffs(ny_, 0.5, ay_h_, by_h_);
}

bool YeeGrid2D::in_pml(int i, int j) const {
  const int p = pml_.cells;
  return i < p || j < p || i > nx_ - 1 - p || j > ny_ - 1 - p;
}

void YeeGrid2D::set_eps(int i, int j, double eps) {
  if (!(eps >= 1.0)) throw ConfigError("relative permittivity must be >= 1");
  eps_[index(i, j)] = eps;
  inv_eps_[index(i, j)] = 1.0 / eps;
}

void YeeGrid2D::commit_materials() {
  for (std::size_t k = 0; k < eps_.size(); ++k) {
    if (!(eps_[k] >= 1.0)) throw ConfigError("relative permittivity must be >= 1");
    inv_eps_[k] = 1.0 / eps_[k];
  }
}

void YeeGrid2D::set_ez(int i, int j, double v) {
  const auto k = index(i, j);
  ez_[k] = v;
  ezx_[k] = v;
  ezy_[k] = 0.0;
}

void YeeGrid2D::add_ez(int i, int j, double v) {
  const auto k = index(i, j);
  ez_[k] += v;
  ezx_[k] += v;
}

void YeeGrid2D::clear_fields() {
  for (auto* f : {&ez_, &ezx_, &ezy_, &hx_, &hy_}) std::fill(f->begin(), f->end(), 0.0);
  if (track_energy_) std::fill(ez_prev_.begin(), ez_prev_.end(), 0.0);
  steps_ = 0;
}

void YeeGrid2D::set_track_energy(bool on) {
  track_energy_ = on;
  if (on) {
    ez_prev_ = ez_;
  } else {
    ez_prev_.clear();
  }
}

void YeeGrid2D::step() {
  const int nx = nx_, ny = ny_;
  double* ez = ez_.data();
  double* hx = hx_.data();
  double* hy = hy_.data();

  for (int j = 0; j + 1 < ny; ++j) {
    const double a = ay_h_[static_cast<std::size_t>(j)], b = by_h_[static_cast<std::size_t>(j)];
    double* h = hx + index(0, j);
    const double* e0 = ez + index(0, j);
    const double* e1 = e0 + nx;
    for (int i = 0; i < nx; ++i) h[i] = a * h[i] - b * (e1[i] - e0[i]);
  }
  for (int j = 0; j < ny; ++j) {
    double* h = hy + index(0, j);
    const double* e = ez + index(0, j);
    for (int i = 0; i + 1 < nx; ++i) h[i] = ax_h_[static_cast<std::size_t>(i)] * h[i] + bx_h_[static_cast<std::size_t>(i)] * (e[i + 1] - e[i]);
  }

  if (track_energy_) ez_prev_ = ez_;
  const double* axe = ax_e_.data();
  const double* bxe = bx_e_.data();
  for (int j = 1; j + 1 < ny; ++j) {
    const double ay = ay_e_[static_cast<std::size_t>(j)], by = by_e_[static_cast<std::size_t>(j)];
    const std::size_t row = index(0, j);
    double* e = ez + row;
    double* ex = ezx_.data() + row;
    double* ey = ezy_.data() + row;
    const double* ie = inv_eps_.data() + row;
    const double* hyr = hy + row;
    const double* hxr = hx + row;
    const double* hxd = hxr - nx;
    for (int i = 1; i + 1 < nx; ++i) {
      ex[i] = axe[i] * ex[i] + bxe[i] * ie[i] * (hyr[i] - hyr[i - 1]);
      ey[i] = ay * ey[i] - by * ie[i] * (hxr[i] - hxd[i]);
      e[i] = ex[i] + ey[i];
    }
  }
  // PEC outer wall.
  for (int i = 0; i < nx; ++i) {
    for (int j : {0, ny - 1}) {
      const auto k = index(i, j);
      ez_[k] = ezx_[k] = ezy_[k] = 0.0;
    }
  }
  for (int j = 0; j < ny; ++j) {
    for (int i : {0, nx - 1}) {
      const auto k = index(i, j);
      ez_[k] = ezx_[k] = ezy_[k] = 0.0;
    }
  }
  ++steps_;
}

double YeeGrid2D::energy() const {
  if (!track_energy_) throw ConfigError("energy() needs set_track_energy(true) before stepping");
  double we = 0.0, wh = 0.0;
  for (std::size_t k = 0; k < ez_.size(); ++k) we += eps_[k] * ez_prev_[k] * ez_[k];
  for (int j = 0; j + 1 < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) wh += hx_[index(i, j)] * hx_[index(i, j)];
  }
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i + 1 < nx_; ++i) wh += hy_[index(i, j)] * hy_[index(i, j)];
  }
  return we + wh;
}

double YeeGrid2D::max_abs_ez() const {
  double m = 0.0;
  for (double v : ez_) m = std::max(m, std::abs(v));
  return m;
}

// ---------------------------------------------------------------------------

double SlabMode::operator()(double y) const {
  const double a = std::abs(y);
  if (a <= half_width) return std::cos(kappa * y);
  return std::cos(kappa * half_width) * std::exp(-gamma * (a - half_width));
}

SlabMode solve_slab_mode(double wavelength, double width, double n_core, double n_clad) {
  if (!(n_core > n_clad) || !(width > 0.0) || !(wavelength > 0.0)) {
    throw ConfigError("slab mode needs n_core > n_clad and positive width and wavelength");
  }
  const double v = std::numbers::pi * width / wavelength * std::sqrt(n_core * n_core - n_clad * n_clad);
  // Even mode: u tan u = sqrt(V^2 - u^2) with u in (0, min(V, pi/2)).
  auto f = [v](double u) { return u * std::tan(u) - std::sqrt(std::max(v * v - u * u, 0.0)); };
  double lo = 0.0, hi = std::min(v, std::numbers::pi / 2.0) * (1.0 - 1e-15);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  const double u = 0.5 * (lo + hi);
  SlabMode m;
  m.half_width = 0.5 * width;
  m.kappa = u / m.half_width;
  m.gamma = std::sqrt(std::max(v * v - u * u, 0.0)) / m.half_width;
  return m;
}

}  // namespace bintopo::fdtd
