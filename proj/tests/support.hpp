#pragma once

#include <cmath>
#include <random>

#include "torus.hpp"

namespace nlslab::testing {

/// Complex Gaussian coefficients damped by e^{-rate |k|}; optionally limited
/// to the dealiased band.
inline SpectralField random_field(const TorusGrid& g, unsigned seed, double rate = 1.0, bool band = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  SpectralField u(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double re = normal(rng), im = normal(rng);
    if (band && !is_dealiased_mode(g, i)) continue;
    u[i] = std::exp(-rate * std::sqrt(g.k_squared(i))) * cplx(re, im);
  }
  return u;
}

/// u(x_j) = sum_k uhat(k) e^{i k . x_j} by direct summation.
inline PhysicalField brute_physical(const SpectralField& u) {
  const auto& g = u.grid();
  PhysicalField out(g);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const auto x = g.point(j);
    cplx acc = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const auto kv = g.wavevector(k);
      double phase = 0.0;
      for (int a = 0; a < g.dim(); ++a) phase += kv[a] * x[a];
      acc += u[k] * std::polar(1.0, phase);
    }
    out[j] = acc;
  }
  return out;
}

inline double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const PhysicalField& a, const PhysicalField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace nlslab::testing
