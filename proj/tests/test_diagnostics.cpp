#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "diagnostics.hpp"
#include "errors.hpp"
#include "support.hpp"

using namespace nlslab;
using nlslab::testing::random_field;

namespace {

EvolutionConfig forward(double dt, double T, int stride = 1) {
  EvolutionConfig c;
  c.dt = dt;
  c.t_end = T;
  c.record_stride = stride;
  return c;
}

std::vector<EnergyRecord> synthetic(double C, double gamma, int count, double dt) {
  std::vector<EnergyRecord> out;
  for (int i = 0; i < count; ++i) {
    EnergyRecord r;
    r.t = dt * i;
    r.E = C * std::exp(-gamma * r.t);
    out.push_back(r);
  }
  return out;
}

struct Damped {
  TorusGrid g{1, 64};
  DampingProfile a = build_damping({1, 1.0, 0.5}, 1.0, 1.0, g);
  SpectralField u0 = scale_to_energy(random_field(g, 2), 1.0);
};

}  // namespace

TEST_CASE("total energy of simple fields") {
  const TorusGrid g(1, 16);
  SpectralField c(g);
  c.mode({0, 0, 0}) = 1.0;
  CHECK(total_energy(c).E == doctest::Approx(1.5 * kPi).epsilon(1e-14));
  SpectralField e(g);
  e.mode({1, 0, 0}) = 1.0;
  CHECK(total_energy(e).E == doctest::Approx(2.5 * kPi).epsilon(1e-14));
  const auto z = total_energy(SpectralField(g));
  CHECK(z.E == 0.0);
  CHECK(z.mass == 0.0);
}

TEST_CASE("energy rescaling matches a bisection root") {
  const TorusGrid g(1, 32);
  const auto u = random_field(g, 3);
  for (const double target : {0.1, 1.0, 10.0, 100.0}) {
    double lo = 0.0, hi = 1.0;
    while (total_energy(hi * u).E < target) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (total_energy(mid * u).E < target ? lo : hi) = mid;
    }
    CHECK(energy_scale_factor(u, target) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-12));
    CHECK(total_energy(scale_to_energy(u, target)).E == doctest::Approx(target).epsilon(1e-12));
  }
  CHECK_THROWS(energy_scale_factor(SpectralField(g), 1.0));
}

TEST_CASE("identities vanish without damping") {
  const TorusGrid g(1, 64);
  const auto u0 = scale_to_energy(random_field(g, 4), 1.0);
  const auto tr = evolve(u0, forward(1e-3, 0.5), nullptr, nullptr);
  const double T = tr.times.back();
  CHECK(l2_identity_residual(tr, nullptr, nullptr, 0.0, T) <= 1e-8 * tr.energies[0].mass);
  CHECK(energy_identity_residual(tr, nullptr, nullptr, 0.0, T) <= 1e-7 * tr.energies[0].E);
  const PhysicalField zero(g);
  CHECK(morawetz_residual(tr, zero, nullptr, nullptr, 0.0, T) == 0.0);
}

TEST_CASE("damped identity residuals are small and second order") {
  const Damped s;
  const auto P = s.a.as_field();
  std::array<double, 3> prev{};
  for (const double dt : {2e-3, 1e-3}) {
    const auto tr = evolve(s.u0, forward(dt, 2.0), &s.a, nullptr);
    const double e0 = tr.energies[0].E, m0 = tr.energies[0].mass;
    const double l2 = l2_identity_residual(tr, &s.a, nullptr, 0.0, 2.0);
    const double en = energy_identity_residual(tr, &s.a, nullptr, 0.0, 2.0);
    const double mo = morawetz_residual(tr, P, &s.a, nullptr, 0.0, 2.0);
    if (dt == 1e-3) {
      CHECK(l2 <= 1e-5 * m0);
      CHECK(en <= 1e-5 * e0);
      CHECK(mo <= 1e-5 * e0);
      CHECK(prev[0] / l2 == doctest::Approx(4.0).epsilon(0.25));
      CHECK(prev[1] / en == doctest::Approx(4.0).epsilon(0.25));
    }
    prev = {l2, en, mo};
  }
}

TEST_CASE("constant damping on a plane wave") {
  const TorusGrid g(1, 32);
  const double A = 0.6, c = 0.3;
  const auto a = constant_damping(g, c);
  SpectralField u0(g);
  u0.mode({1, 0, 0}) = A;
  const auto tr = evolve(u0, forward(1e-3, 1.0), &a, nullptr);
  for (std::size_t i = 0; i < tr.size(); i += 100) {
    const double t = tr.times[i];
    const double m = kTwoPi * A * A * std::exp(-2.0 * c * t);
    CHECK(tr.energies[i].mass == doctest::Approx(m).epsilon(1e-10));
    const auto terms = identity_terms(tr.states[i], t, &a, nullptr, nullptr);
    CHECK(terms.damp_mass == doctest::Approx(c * m).epsilon(1e-10));
    // u_t = -i (1 + |u|^2) u - c u, so Im(u conj u_t) = (1 + |u|^2) |u|^2 pointwise.
    const double amp2 = A * A * std::exp(-2.0 * c * t);
    CHECK(terms.damp_energy == doctest::Approx(c * kTwoPi * (1.0 + amp2) * amp2).epsilon(1e-6));
  }
  CHECK(l2_identity_residual(tr, &a, nullptr, 0.0, 1.0) <= 1e-6);
  CHECK(energy_identity_residual(tr, &a, nullptr, 0.0, 1.0) <= 1e-6);
}

TEST_CASE("multiplier identity with P = 1 on a plane wave") {
  const TorusGrid g(1, 16);
  SpectralField u(g);
  u.mode({2, 0, 0}) = 0.8;
  PhysicalField one(g);
  for (std::size_t i = 0; i < one.size(); ++i) one[i] = 1.0;
  const auto terms = identity_terms(u, 0.0, nullptr, nullptr, &one);
  CHECK(std::abs(terms.morawetz_lhs) < 1e-12);
  CHECK(std::abs(terms.morawetz_rhs) < 1e-12);
}

TEST_CASE("gronwall bound") {
  const Damped s;
  const auto tr = evolve(s.u0, forward(1e-3, 1.0, 10), &s.a, nullptr);
  const auto r = gronwall_check(tr, nullptr, 1.0);
  CHECK(r.holds);
  CHECK(r.margin >= 0.0);
  const auto z = evolve(SpectralField(s.g), forward(1e-3, 0.2, 10), &s.a, nullptr);
  CHECK(gronwall_check(z, nullptr, 1.0).holds);

  const auto shape = 0.05 * random_field(s.g, 6);
  SourceTerm src;
  src.eval = [shape](double t) { return cplx(std::cos(t)) * shape; };
  const auto f = evolve(s.u0, forward(1e-3, 1.0, 10), &s.a, &src);
  CHECK(gronwall_check(f, &src, 10.0).holds);
}

TEST_CASE("decay fit on exact exponentials") {
  const auto f1 = fit_decay(synthetic(1.0, 2.0, 50, 0.05), {0.0, 10.0});
  CHECK(f1.gamma == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f1.C == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f1.residual < 1e-12);
  const auto f2 = fit_decay(synthetic(5.0, 0.3, 50, 0.1), {0.0, 10.0});
  CHECK(std::abs(f2.gamma - 0.3) <= 1e-12);
  CHECK(f2.C == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f2.intercept == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("decay fit inflation, prefix and guards") {
  auto rec = synthetic(1.0, 1.0, 40, 0.1);
  rec[20].E *= 3.0;
  const auto f = fit_decay(rec, {0.0, 10.0});
  for (const auto& r : rec) CHECK(r.E <= f.C * std::exp(-f.gamma * r.t) * rec[0].E * (1 + 1e-12));
  CHECK(f.C > 1.0);

  auto zero_tail = synthetic(1.0, 1.0, 40, 0.1);
  for (std::size_t i = 30; i < zero_tail.size(); ++i) zero_tail[i].E = 0.0;
  const auto p = fit_decay(zero_tail, {0.0, 10.0});
  CHECK(p.positive_prefix);
  CHECK(p.gamma == doctest::Approx(1.0).epsilon(1e-10));

  CHECK_THROWS_AS(fit_decay(synthetic(1.0, 1.0, 5, 0.1), {0.0, 10.0}), NumericalError);
}

TEST_CASE("damped run decays and a cover fit bounds several runs") {
  const Damped s;
  std::vector<std::vector<EnergyRecord>> runs;
  for (const double E : {0.1, 1.0}) {
    const auto tr = evolve(scale_to_energy(s.u0, E), forward(1e-3, 4.0, 10), &s.a, nullptr);
    const auto fit = fit_decay(tr.energies, default_decay_window(4.0));
    CHECK(fit.gamma > 0.0);
    runs.push_back(tr.energies);
  }
  const auto cover = cover_fit(runs, default_decay_window(4.0));
  CHECK(cover.gamma > 0.0);
  for (const auto& run : runs) {
    for (const auto& r : run) CHECK(r.E <= cover.C * std::exp(-cover.gamma * r.t) * run[0].E * (1 + 1e-12));
  }
  const auto w = default_decay_window(0.5);
  CHECK(w.first == 0.5);
  CHECK(w.second == 0.5);
}
