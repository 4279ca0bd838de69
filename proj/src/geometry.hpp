#pragma once

// Damping profile a(x) and Carleman geometry function eta(x) for slab-union
// observation regions on T^d.

#include <array>
#include <vector>

#include "torus.hpp"

namespace nlslab {

using Point = std::array<double, 3>;

/// omega = union of coordinate slabs of half-width eps around the cell
/// faces, omega0 the same with eps0, omega1 with eps0/2.
struct OmegaSpec {
  int d = 1;
  double eps = 1.0;
  double eps0 = 0.5;

  void validate() const;
};

enum class Region { omega, omega0, omega1 };

/// Distance from a coordinate to the nearest cell face {0 = 2pi}.
double face_distance(double x);
bool region_membership(const Point& x, const OmegaSpec& spec, Region which);

/// C^inf step: 0 for y <= 0, 1 for y >= 1, built from exp(-1/y).
double smooth_step(double y);
/// (S, S', S'') at y.
std::array<double, 3> smooth_step_derivatives(double y);

struct DampingProfile {
  TorusGrid grid;
  std::vector<double> values;                 // a at grid points
  std::vector<std::array<double, 3>> gradient;  // closed-form gradient at grid points
  double a0 = 0.0;
  double amax = 0.0;       // achieved sup over the grid
  double sharpness = 32.0; // smooth-maximum parameter (d > 1)
  OmegaSpec spec;

  PhysicalField as_field() const;
  /// a^2 sampled on the grid.
  std::vector<double> squared() const;
};

inline constexpr double kDefaultSharpness = 32.0;

/// Plateau bump equal to amax on omega0 slabs, zero outside omega, combined
/// across axes with a support-preserving log-sum-exp maximum.
DampingProfile build_damping(const OmegaSpec& spec, double a0, double amax, const TorusGrid& grid,
                             double sharpness = kDefaultSharpness);
/// Closed-form a(x) and its gradient at an arbitrary point.
double damping_value(const OmegaSpec& spec, double amax, double sharpness, const Point& x,
                     std::array<double, 3>* grad = nullptr);
/// Spatially constant damping (a = c everywhere); degenerate test geometry.
DampingProfile constant_damping(const TorusGrid& grid, double c);

/// Smallest C with |grad a|^2 <= C a + eps_l at every grid point.
double gradient_bound_constant(const DampingProfile& a, double eps_l);

struct CarlemanGeometry {
  OmegaSpec spec;
  TorusGrid grid;
  double scale = 0.0;          // eta = scale * chi(x) |x|^2 on (0, 2pi)^d
  std::vector<double> values;  // eta at grid points
  double sup_norm = 0.0;       // max over an oversampled grid
  double gradient_constant = 0.0;       // min |grad eta| outside closure(omega0)
  double pseudoconvexity_constant = 0.0;  // min of D2 eta(xi,xi) + (grad eta . xi)^2
  double c = 0.0;              // min of the two constants above
};

struct EtaDerivatives {
  double value = 0.0;
  std::array<double, 3> grad{0.0, 0.0, 0.0};
  std::array<std::array<double, 3>, 3> hess{};
};

EtaDerivatives eta_at(const OmegaSpec& spec, double scale, const Point& x);
/// 0.1 / ((2pi)^2 d), which keeps sup eta near 0.1 so the weights stay in range.
double default_eta_scale(int d);
/// Sup of eta over a grid with `per_axis` points per axis.
double eta_sup_norm(const OmegaSpec& spec, double scale, int per_axis);

/// Builds eta and verifies the gradient and pseudoconvexity conditions at
/// grid points outside closure(omega0) over 16 seeded random unit directions
/// plus the coordinate axes. Throws NumericalError if the achieved c <= 0.
CarlemanGeometry build_eta(const OmegaSpec& spec, const TorusGrid& grid, double scale = 0.0,
                           unsigned seed = 12345);

/// Least-squares decay rate rho in |fhat(k)| ~ K exp(-rho |k|) over the
/// maximum coefficient per integer shell of |k|, on shells above `floor`.
double spectral_decay_rate(const SpectralField& f, double floor = 1e-13);

}  // namespace nlslab
