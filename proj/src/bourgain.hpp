#pragma once

// Discrete X^{s,b} norms of sampled space-time fields and the trilinear
// probe |u|^2 u in X^{s,-b'} against ||u||^3 in X^{s,b'}.
//
// The norm is taken on one fixed extension (time cutoff times the samples),
// so it bounds the restricted norm from above.

#include <cstdint>
#include <vector>

#include "torus.hpp"

namespace nlslab {

/// C^inf bump exp(1 - 1/(1 - y^2)) with y = 2t/T - 1, peak 1 at T/2, 0 outside (0, T).
double time_cutoff(double t, double T);

struct SpaceTimeField {
  double T = 1.0;
  std::vector<SpectralField> samples;  // at t_j = j T / (N - 1), j = 0..N-1
  std::vector<double> cutoff;          // time_cutoff(t_j, T)

  SpaceTimeField() = default;
  SpaceTimeField(double T, std::vector<SpectralField> samples);

  std::size_t count() const { return samples.size(); }
  double spacing() const { return T / double(samples.size() - 1); }
  double time(std::size_t j) const { return double(j) * spacing(); }
  const TorusGrid& grid() const { return samples.front().grid(); }
  void validate() const;
};

inline constexpr int kMinTimeSamples = 32;
inline constexpr int kTimePadding = 4;

struct XsbParams {
  double s = 1.0;
  double b = 0.5;
  double bprime = 0.375;

  void validate() const;
};

/// Discrete H^b norm in time of samples f_j on spacing h, zero padded to
/// 4 N samples: sqrt(sum_m (h / M) <tau_m>^{2b} |F_m|^2), tau_m = 2 pi m / (M h).
double time_sobolev_norm(const std::vector<cplx>& f, double h, double b);

/// sqrt(sum_k sum_m <k>^{2s} (h / M) <tau_m>^{2b} |F_k(tau_m)|^2) with F the
/// padded time transform of psi(t) e^{i |k|^2 t} u_k(t).
double xsb_norm(const SpaceTimeField& f, double s, double b);

/// |u|^2 u per sample on the 2x-oversampled grid.
SpaceTimeField cubic_field(const SpaceTimeField& f);

/// ||u|^2 u||_{X^{s,-b'}} / ||u||_{X^{s,b'}}^3. Throws NumericalError on a zero denominator.
double trilinear_ratio(const SpaceTimeField& f, double s, double bprime);

/// u_k(t) = e^{-i |k|^2 t} sum_{|l| <= time_band} c_{k,l} e^{2 pi i l t / T} on
/// the modes with every |k_i| < n/3, Gaussian c damped by e^{-(|k| + |l|)/2}.
SpaceTimeField random_band_limited(const TorusGrid& grid, double T, int time_samples, int time_band,
                                   std::uint64_t seed);

struct TrilinearSweep {
  std::size_t samples = 0;
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
  std::vector<double> ratios;
};

TrilinearSweep trilinear_sweep(const TorusGrid& grid, double T, int time_samples, int time_band,
                               std::size_t samples, double s, double bprime, std::uint64_t seed);

}  // namespace nlslab
