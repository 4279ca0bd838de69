#pragma once

// Energy identities of the damped, forced cubic NLS as residual checks,
// the Gronwall a-priori bound, and exponential decay fits.

#include <optional>
#include <utility>
#include <vector>

#include "evolve.hpp"

namespace nlslab {

inline EnergyRecord total_energy(const SpectralField& u) { return energy_record(u, 0.0); }

/// Positive c with E(c u) = target. E(c u) = c^2 (mass + grad) / 2 + c^4 quartic / 4
/// is increasing in c, so the root is unique. Throws for u = 0 and target > 0.
double energy_scale_factor(const SpectralField& u, double target);
SpectralField scale_to_energy(const SpectralField& u, double target);

/// Instantaneous spatial integrals entering the three identities, evaluated
/// on a 2x-padded grid with u_t reconstructed from the equation.
struct IdentityTerms {
  double t = 0.0;
  double damp_mass = 0.0;      // int a |u|^2
  double forcing_mass = 0.0;   // int Im(g conj u)
  double damp_energy = 0.0;    // int a Im(u conj u_t)
  double forcing_energy = 0.0; // int Re(g conj u_t)
  double morawetz_lhs = 0.0;   // int (Im(u conj u_t) - |grad u|^2 - |u|^4) P
  double morawetz_rhs = 0.0;   // 1/2 int grad P . grad |u|^2 + int Re(g P conj u)
};

IdentityTerms identity_terms(const SpectralField& u, double t, const DampingProfile* a,
                             const SourceTerm* g, const PhysicalField* P);

std::vector<IdentityTerms> identity_terms(const Trajectory& traj, const DampingProfile* a,
                                          const SourceTerm* g, const PhysicalField* P);

/// |LHS - RHS| of the L2 identity between recorded times t and t'.
double l2_identity_residual(const Trajectory& traj, const DampingProfile* a, const SourceTerm* g,
                            double t, double t_prime);
double energy_identity_residual(const Trajectory& traj, const DampingProfile* a, const SourceTerm* g,
                                double t, double t_prime);
double morawetz_residual(const Trajectory& traj, const PhysicalField& P, const DampingProfile* a,
                         const SourceTerm* g, double t, double t_prime);

/// Residuals between the first sample and every sample, as CSV columns.
struct ResidualSeries {
  std::vector<double> l2;
  std::vector<double> energy;
  std::vector<double> morawetz;
};
ResidualSeries residual_series(const Trajectory& traj, const DampingProfile* a, const SourceTerm* g,
                               const PhysicalField* P);

struct GronwallResult {
  bool holds = false;
  double margin = 0.0;  // min_t C (E(0) + G + G^2) - E(t), G = ||g||^2_{L2 H1}
  double constant = 10.0;
  double forcing_norm_sq = 0.0;
};

inline constexpr double kDefaultGronwallConstant = 10.0;

GronwallResult gronwall_check(const Trajectory& traj, const SourceTerm* g,
                              double constant = kDefaultGronwallConstant);

struct DecayFit {
  double C = 1.0;
  double gamma = 0.0;
  double intercept = 1.0;  // exp of the fitted log-intercept, relative to E(t0)
  double residual = 0.0;   // RMS of the log-linear fit
  double t_a = 0.0;
  double t_b = 0.0;
  bool positive_prefix = false;  // E reached 0; fit used the positive prefix
  std::size_t samples = 0;
};

/// Least squares on (t, log E) over records inside [t_a, t_b] (times taken
/// relative to the first record); C >= 1 is inflated until
/// E(t) <= C e^{-gamma (t - t0)} E(t0) holds at every sample in the window.
DecayFit fit_decay(const std::vector<EnergyRecord>& records, std::pair<double, double> window);

/// One (C*, gamma*) for several runs: gamma* from the pooled normalized
/// log-energies in the window, C* inflated over every sample of every run.
DecayFit cover_fit(const std::vector<std::vector<EnergyRecord>>& runs, std::pair<double, double> window);

/// Default fit window [1, T].
std::pair<double, double> default_decay_window(double T);

}  // namespace nlslab
