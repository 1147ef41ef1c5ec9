#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace bintopo::fdtd {

inline constexpr double c0 = 299792458.0;

// Absorbing layer on all four sides: conductivity grows as (depth/L)^order
// up to the value giving a normal-incidence reflection of r0.
struct PmlSpec {
  int cells = 16;
  double order = 3.0;
  double r0 = 1e-8;
  double sigma_max = 0.0;  // loss rate in 1/s; 0 selects the r0-derived value

  double max_loss_rate(double dx) const;
};

// 2D TM Yee grid (Ez, Hx, Hy) with split-field PML and a PEC outer wall.
//
// Arrays are nx*ny, x fastest. Ez(i,j) sits on nodes, Hx(i,j) at
// (i, j+1/2) and Hy(i,j) at (i+1/2, j). H is stored scaled by the vacuum
// impedance so E and H share units.
class YeeGrid2D {
 public:
  // dt = courant * dx / (c0 * sqrt(2)); pml.cells = 0 gives a closed cavity.
  YeeGrid2D(int nx, int ny, double dx, double courant, PmlSpec pml = {});

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double dx() const { return dx_; }
  double dt() const { return dt_; }
  double courant() const { return courant_; }
  const PmlSpec& pml() const { return pml_; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(nx_) * static_cast<std::size_t>(j);
  }
  bool in_pml(int i, int j) const;

  std::vector<double>& eps_r() { return eps_; }
  const std::vector<double>& eps_r() const { return eps_; }
  void set_eps(int i, int j, double eps);
  // Recomputes cached 1/eps after eps_r() was edited in bulk.
  void commit_materials();

  const std::vector<double>& ez() const { return ez_; }
  const std::vector<double>& hx() const { return hx_; }
  const std::vector<double>& hy() const { return hy_; }
  double ez(int i, int j) const { return ez_[index(i, j)]; }
  // Direct field access for initial conditions; the outer Ez ring is
  // forced to zero on the next step.
  void set_ez(int i, int j, double v);
  void add_ez(int i, int j, double v);
  void clear_fields();

  // H^(n-1/2) -> H^(n+1/2), then E^n -> E^(n+1).
  void step();
  std::size_t steps_taken() const { return steps_; }
  double time() const { return static_cast<double>(steps_) * dt_; }

  // Keep E^n around so energy() can pair it with E^(n+1).
  void set_track_energy(bool on);
  // Discrete energy sum eps Ez^n Ez^(n+1) + |H^(n+1/2)|^2, exactly conserved
  // by the lossless leapfrog in a closed cavity. Requires track_energy.
  double energy() const;

  double max_abs_ez() const;

 private:
  void build_coefficients();

  int nx_, ny_;
  double dx_, dt_, courant_;
  PmlSpec pml_;
  std::vector<double> eps_, inv_eps_;
  std::vector<double> ez_, ezx_, ezy_, hx_, hy_, ez_prev_;
  // Update coefficients along x at nodes and half nodes, same along y.
  std::vector<double> ax_e_, bx_e_, ax_h_, bx_h_, ay_e_, by_e_, ay_h_, by_h_;
  bool track_energy_ = false;
  std::size_t steps_ = 0;
};

// Fundamental even TE mode of a symmetric slab (field parallel to the
// interfaces): core index n_core, width w, cladding n_clad.
struct SlabMode {
  double kappa = 0.0;  // transverse wavenumber in the core
  double gamma = 0.0;  // decay rate in the cladding
  double half_width = 0.0;

  // Field at transverse offset y from the core center, 1 at the center.
  double operator()(double y) const;
};

SlabMode solve_slab_mode(double wavelength, double width, double n_core, double n_clad = 1.0);

}  // namespace bintopo::fdtd
