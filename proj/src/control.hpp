#pragma once

// HUM control operator S, its CG inversion, the nonlinear correction K, the
// local fixed point phi = S^{-1} u0 - S^{-1} K phi, and the global
// damp-then-control pipeline.

#include <functional>
#include <vector>

#include "evolve.hpp"
#include "geometry.hpp"

namespace nlslab {

/// exp(4 - 1/(tau (1 - tau))), tau = t / T: peak 1 at T/2, 0 outside (0, T).
double hum_bump(double t, double T);

enum class Preconditioner { none, bracket_inverse };

struct HUMConfig {
  double T = 1.0;
  std::function<double(double)> phi;  // defaults to hum_bump(., T)
  double cg_tol = 1e-8;
  int cg_maxiter = 200;
  int quad_nodes = 8;    // Gauss-Legendre nodes per panel
  int quad_panels = 0;   // 0: ceil(T max|k|^2 / 2) panels
  Preconditioner preconditioner = Preconditioner::bracket_inverse;
  double dt = 5e-4;      // step for the nonlinear solves and the certification
  Scheme scheme = Scheme::strang2;
  double eps_loc = 1e-2;
  double cert_tol = 1e-6;
  double picard_tol = 1e-10;  // relative to max(1, ||phi||_H1)
  int picard_maxiter = 20;

  void validate() const;
  double phi_at(double t) const { return phi ? phi(t) : hum_bump(t, T); }
  /// Number of panels used on the given grid.
  int panels(const TorusGrid& grid) const;
};

/// Composite Gauss-Legendre nodes and weights on [0, T].
struct TimeQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};
TimeQuadrature gauss_legendre(double T, int panels, int order);

/// int_0^T phi^2 by the same quadrature apply_S uses.
double phi_squared_integral(const HUMConfig& cfg, const TorusGrid& grid);

/// G phi0 = int_0^T phi^2(s) e^{-is Delta} [a^2 e^{is Delta} phi0] ds.
SpectralField apply_G(const SpectralField& phi0, const HUMConfig& cfg, const DampingProfile& a);
/// S = i G: the value at 0 of the terminal-value problem with Psi(T) = 0.
SpectralField apply_S(const SpectralField& phi0, const HUMConfig& cfg, const DampingProfile& a);

struct SolveResult {
  SpectralField phi0;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Preconditioned CG on G phi0 = -i u0 in the L2 inner product. Throws
/// NumericalError (with the final residual) if cg_maxiter is exhausted.
SolveResult solve_S(const SpectralField& u0, const HUMConfig& cfg, const DampingProfile& a);

/// Control of the HUM construction, g(t) = a^2 phi^2(t) e^{it Delta} phi0.
SourceTerm hum_control(const SpectralField& phi0, const HUMConfig& cfg, const DampingProfile& a);
/// Same control on the physical grid, formed without a round trip so that it
/// is exactly zero where a is.
PhysicalField hum_control_physical(const SpectralField& phi0, const HUMConfig& cfg, const DampingProfile& a,
                                   double t);

/// v(0) for i v_t = -Delta v + |u|^2 u, v(T) = 0, with u the undamped backward
/// solution of i u_t = -Delta u + |u|^2 u + g_phi0, u(T) = 0.
SpectralField apply_K(const SpectralField& phi0, const HUMConfig& cfg, const DampingProfile& a);

/// Value at time t between recorded samples: free propagation of the two
/// neighbours to t, blended linearly. Exact at the samples.
SpectralField interpolate_trajectory(const Trajectory& traj, double t);

struct ControlResult {
  SpectralField phi0;
  SourceTerm control;
  double terminal_h1 = 0.0;
  int picard_iters = 0;
  int cg_iters_total = 0;
  bool certified = false;
  std::vector<double> increments;          // ||phi^{n+1} - phi^n||_{H1}
  std::vector<double> contraction_factors; // increments[n] / increments[n-1]
  std::vector<double> iterate_norms;       // ||phi^n||_{H1}
  double max_contraction = 0.0;
};

/// Picard iteration for the fixed point, then a forward certification solve.
/// Throws InvalidArgument when ||u0||_{H1} > eps_loc and NumericalError when
/// the iteration diverges.
ControlResult local_null_control(const SpectralField& u0, const HUMConfig& cfg, const DampingProfile& a);

/// Closed-loop damping phase settings.
struct DampingPhase {
  double dt = 1e-3;
  int record_stride = 10;
  double max_time = 500.0;
  Scheme scheme = Scheme::strang2;
  int max_retries = 3;
};

struct GlobalControlResult {
  double tau = 0.0;
  double switch_time = 0.0;   // end of the damping phase
  double switch_h1 = 0.0;
  int retries = 0;
  ControlResult local;
};

/// Damps until the first recorded t with ||u(t)||_{H1} <= eps, then controls
/// on [t, t + T]. A failed certification continues damping, doubling the wait,
/// up to max_retries times. tau = t + T.
GlobalControlResult global_null_control(const SpectralField& u0, double eps, const HUMConfig& cfg,
                                        const DampingProfile& a, const DampingPhase& phase = {});

struct TauSample {
  double R = 0.0;
  double tau = 0.0;
  double switch_time = 0.0;
  double terminal_h1 = 0.0;
  bool certified = false;
  int retries = 0;
};

struct TauScanResult {
  std::vector<TauSample> samples;
  double C_fit = 0.0;  // max tau / log(R + 1)
  double eps = 0.0;
  bool monotone = false;
  bool all_certified = false;
};

/// For each R the reference profile is rescaled to E = R before the global run.
TauScanResult tau_scan(const std::vector<double>& R_list, double eps, const SpectralField& reference,
                       const HUMConfig& cfg, const DampingProfile& a, const DampingPhase& phase = {});

}  // namespace nlslab
