#include "bourgain.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "errors.hpp"

namespace nlslab {

double time_cutoff(double t, double T) {
  const double y = 2.0 * t / T - 1.0;
  if (!(std::abs(y) < 1.0)) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - y * y));
}

SpaceTimeField::SpaceTimeField(double T_, std::vector<SpectralField> s) : T(T_), samples(std::move(s)) {
  validate();
  cutoff.resize(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) cutoff[j] = time_cutoff(time(j), T);
}

void SpaceTimeField::validate() const {
  if (!(T > 0.0)) throw InvalidArgument("space-time field needs T > 0");
  if (samples.size() < std::size_t(kMinTimeSamples)) {
    std::ostringstream msg;
    msg << "space-time field needs >= " << kMinTimeSamples << " time samples, got " << samples.size();
    throw InvalidArgument(msg.str());
  }
  for (const auto& f : samples) {
    if (f.grid() != samples.front().grid()) throw InvalidArgument("space-time samples on different grids");
  }
}

void XsbParams::validate() const {
  if (b < -1.0 || b > 1.0) throw InvalidArgument("b must lie in [-1, 1]");
  if (!(bprime > 0.0 && bprime < 0.5)) throw InvalidArgument("bprime must lie in (0, 1/2)");
}

namespace {

// Weighted sum over the padded transform of one time series.
double padded_time_sum(const std::vector<cplx>& f, double h, double b) {
  const int M = kTimePadding * static_cast<int>(f.size());
  const TorusGrid line(1, M);
  PhysicalField padded(line);
  for (std::size_t j = 0; j < f.size(); ++j) padded[j] = f[j];
  // to_spectral divides by M; the unnormalized transform is M times it.
  const auto coeffs = to_spectral(padded);
  const double t_pad = double(M) * h;
  double acc = 0.0;
  for (int m = 0; m < M; ++m) {
    const double tau = kTwoPi * double(line.wavenumber(m)) / t_pad;
    const double weight = std::pow(1.0 + tau * tau, b);
    acc += weight * std::norm(double(M) * coeffs[m]);
  }
  return acc * h / double(M);
}

}  // namespace

double time_sobolev_norm(const std::vector<cplx>& f, double h, double b) {
  return std::sqrt(padded_time_sum(f, h, b));
}

double xsb_norm(const SpaceTimeField& f, double s, double b) {
  f.validate();
  const auto& grid = f.grid();
  const double h = f.spacing();
  std::vector<cplx> series(f.count());
  double acc = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double k2 = grid.k_squared(k);
    bool nonzero = false;
    for (std::size_t j = 0; j < f.count(); ++j) {
      const double t = f.time(j);
      series[j] = f.cutoff[j] * std::polar(1.0, k2 * t) * f.samples[j][k];
      nonzero = nonzero || series[j] != cplx(0.0);
    }
    if (!nonzero) continue;
    acc += std::pow(1.0 + k2, s) * padded_time_sum(series, h, b);
  }
  return std::sqrt(acc);
}

SpaceTimeField cubic_field(const SpaceTimeField& f) {
  std::vector<SpectralField> out;
  out.reserve(f.count());
  for (const auto& u : f.samples) out.push_back(cubic_product(u));
  return SpaceTimeField(f.T, std::move(out));
}

double trilinear_ratio(const SpaceTimeField& f, double s, double bprime) {
  XsbParams{s, bprime, bprime}.validate();
  const double den = xsb_norm(f, s, bprime);
  if (!(den > 0.0)) throw NumericalError("trilinear ratio of a zero field");
  const double num = xsb_norm(cubic_field(f), s, -bprime);
  return num / (den * den * den);
}

SpaceTimeField random_band_limited(const TorusGrid& grid, double T, int time_samples, int time_band,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const int n = grid.points_per_axis();
  const int d = grid.dim();
  std::vector<std::size_t> modes;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto k = grid.wavevector(i);
    bool inside = true;
    for (int a = 0; a < d; ++a) inside = inside && 3 * std::abs(k[a]) < n;
    if (inside) modes.push_back(i);
  }
  const int L = 2 * time_band + 1;
  std::vector<cplx> c(modes.size() * L);
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const double kn = std::sqrt(grid.k_squared(modes[m]));
    for (int l = -time_band; l <= time_band; ++l) {
      const double damp = std::exp(-0.5 * (kn + std::abs(l)));
      const double re = normal(rng), im = normal(rng);
      c[m * L + (l + time_band)] = damp * cplx(re, im);
    }
  }
  std::vector<SpectralField> samples;
  const double h = T / double(time_samples - 1);
  for (int j = 0; j < time_samples; ++j) {
    const double t = double(j) * h;
    SpectralField u(grid);
    for (std::size_t m = 0; m < modes.size(); ++m) {
      cplx acc = 0.0;
      for (int l = -time_band; l <= time_band; ++l) {
        acc += c[m * L + (l + time_band)] * std::polar(1.0, kTwoPi * l * t / T);
      }
      u[modes[m]] = std::polar(1.0, -grid.k_squared(modes[m]) * t) * acc;
    }
    samples.push_back(std::move(u));
  }
  return SpaceTimeField(T, std::move(samples));
}

TrilinearSweep trilinear_sweep(const TorusGrid& grid, double T, int time_samples, int time_band,
                               std::size_t samples, double s, double bprime, std::uint64_t seed) {
  TrilinearSweep out;
  out.samples = samples;
  double sum = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto f = random_band_limited(grid, T, time_samples, time_band, seed + i);
    const double r = trilinear_ratio(f, s, bprime);
    out.ratios.push_back(r);
    out.max_ratio = std::max(out.max_ratio, r);
    sum += r;
  }
  out.mean_ratio = samples ? sum / double(samples) : 0.0;
  return out;
}

}  // namespace nlslab
