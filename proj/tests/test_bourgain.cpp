#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bourgain.hpp"
#include "errors.hpp"
#include "support.hpp"

using namespace nlslab;

namespace {

// u(t, x) = e^{ikx} e^{-i k^2 t} c on N uniform samples of [0, T].
SpaceTimeField single_mode(const TorusGrid& g, int k, cplx c, double T, int N) {
  std::vector<SpectralField> s;
  for (int j = 0; j < N; ++j) {
    const double t = T * j / double(N - 1);
    SpectralField u(g);
    u.mode({k, 0, 0}) = c * std::polar(1.0, -double(k * k) * t);
    s.push_back(u);
  }
  return SpaceTimeField(T, std::move(s));
}

// Direct double sum: for every mode and frequency, the padded DFT evaluated
// term by term.
double brute_xsb(const SpaceTimeField& f, double s, double b) {
  const auto& g = f.grid();
  const std::size_t N = f.count(), M = kTimePadding * N;
  const double h = f.spacing();
  double total = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double k2 = g.k_squared(k);
    for (std::size_t m = 0; m < M; ++m) {
      const long mm = m <= M / 2 ? long(m) : long(m) - long(M);
      const double tau = kTwoPi * double(mm) / (double(M) * h);
      cplx F = 0.0;
      for (std::size_t j = 0; j < N; ++j) {
        const double t = f.time(j);
        const cplx v = f.cutoff[j] * std::polar(1.0, k2 * t) * f.samples[j][k];
        F += v * std::polar(1.0, -kTwoPi * double(m * j) / double(M));
      }
      total += std::pow(1.0 + k2, s) * (h / double(M)) * std::pow(1.0 + tau * tau, b) * std::norm(F);
    }
  }
  return std::sqrt(total);
}

}  // namespace

TEST_CASE("time cutoff") {
  CHECK(time_cutoff(0.5, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(time_cutoff(0.0, 1.0) <= 1e-12);
  CHECK(time_cutoff(1.0, 1.0) <= 1e-12);
  CHECK(time_cutoff(1.5, 1.0) == 0.0);
}

TEST_CASE("space-time field guards") {
  const TorusGrid g(1, 8);
  CHECK_THROWS_AS(single_mode(g, 1, 1.0, 1.0, 16).validate(), InvalidArgument);
  XsbParams p;
  p.bprime = 0.5;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("time Sobolev norm at b = 0 is the discrete L2 norm") {
  std::vector<cplx> f;
  for (int j = 0; j < 40; ++j) f.emplace_back(std::sin(0.3 * j), std::cos(0.7 * j));
  double l2 = 0.0;
  for (const auto& v : f) l2 += std::norm(v);
  const double h = 0.05;
  CHECK(time_sobolev_norm(f, h, 0.0) == doctest::Approx(std::sqrt(h * l2)).epsilon(1e-12));
}

TEST_CASE("single mode separates") {
  const TorusGrid g(1, 8);
  const cplx c(0.6, -0.3);
  for (const int k : {0, 1, 2}) {
    const auto f = single_mode(g, k, c, 1.0, 48);
    std::vector<cplx> psi(f.cutoff.begin(), f.cutoff.end());
    for (const double b : {-0.375, 0.375, 0.5}) {
      const double expect = std::pow(1.0 + k * k, 0.5) * std::abs(c) * time_sobolev_norm(psi, f.spacing(), b);
      CHECK(xsb_norm(f, 1.0, b) == doctest::Approx(expect).epsilon(1e-10));
    }
    CHECK(std::isfinite(trilinear_ratio(f, 1.0, 0.375)));
  }
}

TEST_CASE("zero field and direct double sum") {
  const TorusGrid g(1, 8);
  const auto zero = single_mode(g, 1, 0.0, 1.0, 32);
  CHECK(xsb_norm(zero, 1.0, 0.5) == 0.0);
  CHECK_THROWS_AS(trilinear_ratio(zero, 1.0, 0.375), NumericalError);

  const auto f = random_band_limited(g, 1.0, 32, 2, 3);
  for (const double b : {-0.375, 0.0, 0.375}) {
    const double ref = brute_xsb(f, 1.0, b);
    CHECK(std::abs(xsb_norm(f, 1.0, b) - ref) <= 1e-10 * ref);
  }
}

TEST_CASE("b = 0 is the cutoff-weighted L2 H^s norm") {
  const TorusGrid g(1, 8);
  const auto f = random_band_limited(g, 1.0, 32, 2, 4);
  double sum = 0.0;
  for (std::size_t j = 0; j < f.count(); ++j) {
    const double s = sobolev_norm(f.samples[j], 1.0);
    sum += f.spacing() * std::pow(f.cutoff[j] * s, 2);
  }
  CHECK(xsb_norm(f, 1.0, 0.0) == doctest::Approx(std::sqrt(sum)).epsilon(1e-10));
}

TEST_CASE("monotone in s and b") {
  const TorusGrid g(1, 16);
  const auto f = random_band_limited(g, 1.0, 32, 2, 5);
  CHECK(xsb_norm(f, 0.0, 0.375) <= xsb_norm(f, 1.0, 0.375));
  CHECK(xsb_norm(f, 1.0, -0.375) <= xsb_norm(f, 1.0, 0.0));
  CHECK(xsb_norm(f, 1.0, 0.0) <= xsb_norm(f, 1.0, 0.375));
}

TEST_CASE("ratio symmetries") {
  const TorusGrid g(1, 16);
  auto f = random_band_limited(g, 1.0, 32, 2, 6);
  const double r = trilinear_ratio(f, 1.0, 0.375);
  auto scaled = f;
  for (auto& u : scaled.samples) u *= cplx(-2.5);
  CHECK(std::abs(trilinear_ratio(scaled, 1.0, 0.375) - r) <= 1e-12 * r);
  auto rotated = f;
  for (auto& u : rotated.samples) u *= std::polar(1.0, 0.7);
  CHECK(std::abs(trilinear_ratio(rotated, 1.0, 0.375) - r) <= 1e-12 * r);
  // Spatial translation by one grid cell multiplies mode k by e^{-i k h}.
  auto shifted = f;
  for (auto& u : shifted.samples) {
    for (std::size_t i = 0; i < u.size(); ++i) u[i] *= std::polar(1.0, -double(g.wavevector(i)[0]) * g.spacing());
  }
  CHECK(std::abs(trilinear_ratio(shifted, 1.0, 0.375) - r) <= 1e-12 * r);
}

TEST_CASE("cubic field is the pointwise cube") {
  const TorusGrid g(1, 8);
  const auto f = random_band_limited(g, 1.0, 32, 1, 7);
  const auto c = cubic_field(f);
  REQUIRE(c.count() == f.count());
  const auto u = to_physical(resample(f.samples[5], 64));
  const auto v = to_physical(resample(c.samples[5], 64));
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) worst = std::max(worst, std::abs(v[i] - std::norm(u[i]) * u[i]));
  CHECK(worst < 1e-12);
}

TEST_CASE("sweep is finite and stable under doubling the sample count") {
  const TorusGrid g(1, 16);
  const auto s100 = trilinear_sweep(g, 1.0, 32, 2, 100, 1.0, 0.375, 1);
  const auto s200 = trilinear_sweep(g, 1.0, 32, 2, 200, 1.0, 0.375, 1);
  REQUIRE(s100.ratios.size() == 100);
  CHECK(std::isfinite(s100.max_ratio));
  CHECK(s100.max_ratio > 0.0);
  CHECK(s100.mean_ratio <= s100.max_ratio);
  CHECK(s200.max_ratio <= 1.5 * s100.max_ratio);
  CHECK(s200.max_ratio >= s100.max_ratio);
}
