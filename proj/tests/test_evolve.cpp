#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "diagnostics.hpp"
#include "errors.hpp"
#include "evolve.hpp"
#include "support.hpp"

using namespace nlslab;
using nlslab::testing::max_abs_diff;
using nlslab::testing::random_field;

namespace {

SpectralField plane_wave(const TorusGrid& g, double A, int k, double t) {
  SpectralField u(g);
  u.mode({k, 0, 0}) = A * std::polar(1.0, -(double(k * k) + A * A) * t);
  return u;
}

EvolutionConfig forward(double dt, double T, int stride = 1 << 30) {
  EvolutionConfig c;
  c.dt = dt;
  c.t_end = T;
  c.record_stride = stride;
  return c;
}

SpectralField terminal(const SpectralField& u0, double dt, double T, const DampingProfile* a, const SourceTerm* g,
                       Scheme scheme = Scheme::strang2) {
  auto c = forward(dt, T);
  c.scheme = scheme;
  return evolve(u0, c, a, g).back();
}

}  // namespace

TEST_CASE("pointwise substep") {
  const TorusGrid g(1, 8);
  PhysicalField u(g);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = 0.7;
  const auto r = nonlinear_damped_substep(u, std::span<const double>(), 0.3);
  CHECK(std::abs(r[0] - 0.7 * std::polar(1.0, -0.49 * 0.3)) < 1e-15);

  std::vector<double> a(g.size(), 0.0);
  a[0] = 0.4;
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = 1.0;
  const auto d = nonlinear_damped_substep(u, a, 1.0);
  CHECK(std::abs(d[0]) == doctest::Approx(std::exp(-0.4)).epsilon(1e-15));

  const PhysicalField w = to_physical(random_field(g, 3, 0.2, false));
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = 0.1 * double(i);
  const auto once = nonlinear_damped_substep(w, a, 0.2);
  const auto twice = nonlinear_damped_substep(nonlinear_damped_substep(w, a, 0.1), a, 0.1);
  CHECK(max_abs_diff(once, twice) < 1e-14);
}

TEST_CASE("one step on a plane wave and on zero") {
  const TorusGrid g(1, 64);
  const Physics free_phys;
  for (const double dt : {1e-2, 5e-3}) {
    const auto u1 = step(plane_wave(g, 0.5, 1, 0.0), 0.0, dt, Scheme::strang2, free_phys);
    CHECK(sobolev_norm(u1 - plane_wave(g, 0.5, 1, dt), 1.0) < dt * dt * dt);
  }
  const auto z = step(SpectralField(g), 0.0, 1e-3, Scheme::strang2, free_phys);
  CHECK(sobolev_norm(z, 1.0) == 0.0);
}

TEST_CASE("step reversibility on random data") {
  const TorusGrid g(1, 32);
  const auto u = random_field(g, 4);
  const Physics linear{nullptr, nullptr, false};
  const auto lin = step(step(u, 0.0, 4e-3, Scheme::strang2, linear), 4e-3, -4e-3, Scheme::strang2, linear);
  CHECK(sobolev_norm(lin - u, 1.0) < 1e-13);

  // The 2/3 truncation after the cubic substep is not invertible, so the
  // nonlinear round trip only closes to second order.
  const Physics phys;
  std::vector<double> err;
  for (const double dt : {4e-3, 2e-3, 1e-3}) {
    const auto back = step(step(u, 0.0, dt, Scheme::strang2, phys), dt, -dt, Scheme::strang2, phys);
    err.push_back(sobolev_norm(back - u, 1.0));
    CHECK(err.back() < 100.0 * dt * dt);
  }
  CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.2));
  CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("plane-wave trajectory") {
  const TorusGrid g(1, 64);
  const auto u = terminal(plane_wave(g, 0.5, 1, 0.0), 1e-3, 1.0, nullptr, nullptr);
  CHECK(sobolev_norm(u - plane_wave(g, 0.5, 1, 1.0), 1.0) <= 1e-5);
  const auto z = evolve(SpectralField(g), forward(1e-3, 0.1, 10), nullptr, nullptr);
  for (const auto& s : z.states) CHECK(sobolev_norm(s, 1.0) == 0.0);
}

TEST_CASE("order 2 by self-convergence on smooth random data") {
  const TorusGrid g(1, 32);
  const auto a = build_damping({1, 1.0, 0.2}, 1.0, 1.0, g);
  const auto u0 = scale_to_energy(random_field(g, 11), 1.0);
  for (const Scheme scheme : {Scheme::strang2}) {
    const auto ref = terminal(u0, 1.25e-4, 0.5, &a, nullptr, scheme);
    const double e1 = sobolev_norm(terminal(u0, 2e-3, 0.5, &a, nullptr, scheme) - ref, 1.0);
    const double e2 = sobolev_norm(terminal(u0, 1e-3, 0.5, &a, nullptr, scheme) - ref, 1.0);
    const double e3 = sobolev_norm(terminal(u0, 5e-4, 0.5, &a, nullptr, scheme) - ref, 1.0);
    const double order12 = std::log2(e1 / e2), order23 = std::log2(e2 / e3);
    CHECK(order12 == doctest::Approx(2.0).epsilon(0.1));
    CHECK(order23 == doctest::Approx(2.0).epsilon(0.1));
  }
}

TEST_CASE("forced nonlinear step stays second order") {
  const TorusGrid g(1, 32);
  const auto a = build_damping({1, 1.0, 0.2}, 1.0, 1.0, g);
  const auto u0 = scale_to_energy(random_field(g, 12), 0.5);
  const auto shape = random_field(g, 13);
  SourceTerm src;
  src.eval = [shape](double t) { return cplx(std::sin(3.0 * t)) * shape; };
  const auto ref = terminal(u0, 1.25e-4, 0.5, &a, &src);
  const double e1 = sobolev_norm(terminal(u0, 2e-3, 0.5, &a, &src) - ref, 1.0);
  const double e2 = sobolev_norm(terminal(u0, 1e-3, 0.5, &a, &src) - ref, 1.0);
  CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("strang2 and rk4ei agree on the damped problem") {
  const TorusGrid g(1, 32);
  const auto a = build_damping({1, 1.0, 0.2}, 1.0, 1.0, g);
  const auto u0 = scale_to_energy(random_field(g, 14), 1.0);
  const double dt = 1e-3;
  const auto s1 = terminal(u0, dt, 0.5, &a, nullptr, Scheme::strang2);
  const auto s2 = terminal(u0, dt / 2, 0.5, &a, nullptr, Scheme::strang2);
  const auto r1 = terminal(u0, dt, 0.5, &a, nullptr, Scheme::rk4ei);
  const auto r2 = terminal(u0, dt / 2, 0.5, &a, nullptr, Scheme::rk4ei);
  // Richardson-style error estimates of each scheme.
  const double est_s = sobolev_norm(s1 - s2, 1.0) * 4.0 / 3.0;
  const double est_r = sobolev_norm(r1 - r2, 1.0) * 16.0 / 15.0;
  CHECK(sobolev_norm(s1 - r1, 1.0) <= 1.5 * (est_s + est_r));
}

TEST_CASE("linear evolution") {
  const TorusGrid g(1, 16);
  SpectralField e(g);
  e.mode({1, 0, 0}) = 1.0;
  const auto tr = evolve_linear(e, forward(1e-2, 1.0, 10), nullptr);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    CHECK(std::abs(tr.states[i].mode({1, 0, 0}) - std::polar(1.0, -tr.times[i])) < 1e-13);
  }

  SourceTerm one;
  one.eval = [g](double) {
    SpectralField s(g);
    s.mode({0, 0, 0}) = 1.0;
    return s;
  };
  const auto d = evolve_linear(SpectralField(g), forward(1e-2, 1.0, 25), &one);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(std::abs(d.states[i].mode({0, 0, 0}) - cplx(0.0, -d.times[i])) < 1e-13);
  }

  EvolutionConfig back;
  back.dt = 1e-2;
  back.t_start = 1.0;
  back.t_end = 0.0;
  back.direction = Direction::backward;
  const auto b = evolve_linear(SpectralField(g), back, nullptr);
  for (const auto& s : b.states) CHECK(sobolev_norm(s, 1.0) == 0.0);
}

TEST_CASE("conservation without damping") {
  const TorusGrid g(1, 64);
  const auto u0 = scale_to_energy(random_field(g, 20), 1.0);
  const auto tr = evolve(u0, forward(1e-4, 0.5, 50), nullptr, nullptr);
  const double e0 = tr.energies.front().E;
  double drift = 0.0;
  for (const auto& r : tr.energies) drift = std::max(drift, std::abs(r.E - e0));
  CHECK(drift <= 1e-8 * e0);
}

TEST_CASE("mass is non-increasing with damping") {
  const TorusGrid g(1, 64);
  const auto a = build_damping({1, 1.0, 0.5}, 1.0, 1.0, g);
  const auto u0 = scale_to_energy(random_field(g, 21), 2.0);
  const auto tr = evolve(u0, forward(1e-3, 2.0, 5), &a, nullptr);
  for (std::size_t i = 1; i < tr.size(); ++i) {
    CHECK(tr.energies[i].mass <= tr.energies[i - 1].mass * (1.0 + 1e-14));
  }
  CHECK(tr.energies.back().E < tr.energies.front().E);
}

TEST_CASE("energy is non-increasing with constant damping") {
  const TorusGrid g(1, 64);
  const auto a = constant_damping(g, 0.7);
  const auto u0 = scale_to_energy(random_field(g, 21), 2.0);
  const auto tr = evolve(u0, forward(1e-3, 2.0, 5), &a, nullptr);
  for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr.energies[i].E <= tr.energies[i - 1].E + 1e-9);
}

TEST_CASE("slab damping can raise E through the grad a term") {
  // dE/dt = -int a (|u|^2 + |grad u|^2 + |u|^4) + 1/2 int (Lap a) |u|^2, which
  // is positive for data concentrated where Lap a > 0.
  const TorusGrid g(1, 64);
  const auto a = build_damping({1, 1.0, 0.5}, 1.0, 1.0, g);
  const auto u0 = scale_to_energy(random_field(g, 21), 2.0);
  const auto tr = evolve(u0, forward(1e-3, 2.0, 5), &a, nullptr);
  double rise = 0.0;
  for (std::size_t i = 1; i < tr.size(); ++i) rise = std::max(rise, tr.energies[i].E - tr.energies[i - 1].E);
  CHECK(rise > 1e-9);
}

TEST_CASE("evolution guards") {
  const TorusGrid g(1, 16);
  EvolutionConfig bad;
  bad.dt = 0.0;
  CHECK_THROWS_AS(evolve(SpectralField(g), bad, nullptr, nullptr), InvalidArgument);
  EvolutionConfig dir;
  dir.t_start = 1.0;
  dir.t_end = 0.0;
  CHECK_THROWS_AS(evolve(SpectralField(g), dir, nullptr, nullptr), InvalidArgument);
  CHECK(is_blowup_growth(1.0, 2.0, 1e-3, 0.0));
  CHECK_FALSE(is_blowup_growth(1.0, 1.0, 1e-3, 0.0));

  SpectralField huge(g);
  huge.mode({0, 0, 0}) = 1e200;
  CHECK_THROWS_AS(step(huge, 0.0, 1e-3, Scheme::strang2, Physics{}), NumericalError);
}
