#include "verify.hpp"

#include <cmath>
#include <functional>
#include <random>

#include "bourgain.hpp"
#include "carleman.hpp"
#include "control.hpp"
#include "diagnostics.hpp"

namespace nlslab {

namespace {

struct Outcome {
  double value;
  double tolerance;
};

SpectralField random_field(const TorusGrid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  SpectralField u(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double re = normal(rng), im = normal(rng);
    u[i] = std::exp(-std::sqrt(g.k_squared(i))) * cplx(re, im);
  }
  return dealias(u);
}

Outcome sobolev_vs_dft() {
  double worst = 0.0;
  for (const int d : {1, 2}) {
    const TorusGrid g(d, 8);
    const auto u = random_field(g, 7u + unsigned(d));
    const auto p = to_physical(u);
    double sum = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const auto kv = g.wavevector(k);
      cplx c = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        const auto x = g.point(j);
        double phase = 0.0;
        for (int a = 0; a < d; ++a) phase += kv[a] * x[a];
        c += p[j] * std::polar(1.0, -phase);
      }
      c /= double(g.size());
      sum += (1.0 + g.k_squared(k)) * std::norm(c);
    }
    worst = std::max(worst, std::abs(std::sqrt(sum) - sobolev_norm(u, 1.0)) / std::sqrt(sum));
  }
  return {worst, 1e-12};
}

Outcome quartic_vs_oversampled() {
  const TorusGrid g(1, 8);
  const auto u = random_field(g, 11);
  const auto fine = to_physical(resample(u, 64));
  double sum = 0.0;
  for (std::size_t i = 0; i < fine.size(); ++i) sum += std::norm(fine[i]) * std::norm(fine[i]);
  sum *= kTwoPi / double(fine.size());
  return {std::abs(sum - quartic(u)) / sum, 1e-12};
}

Outcome plane_wave_exact() {
  const TorusGrid g(1, 64);
  const double A = 0.5, T = 1.0;
  SpectralField u0(g);
  u0.mode({1, 0, 0}) = A;
  EvolutionConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = T;
  cfg.record_stride = 1 << 30;
  const auto traj = evolve(u0, cfg, nullptr, nullptr);
  SpectralField exact(g);
  exact.mode({1, 0, 0}) = A * std::polar(1.0, -(1.0 + A * A) * T);
  return {sobolev_norm(traj.back() - exact, 1.0), 1e-10};
}

Outcome conservation() {
  const TorusGrid g(1, 32);
  const auto u0 = scale_to_energy(random_field(g, 3), 1.0);
  EvolutionConfig cfg;
  cfg.dt = 1e-4;
  cfg.t_end = 0.25;
  cfg.record_stride = 25;
  const auto traj = evolve(u0, cfg, nullptr, nullptr);
  double drift = 0.0;
  for (const auto& e : traj.energies) drift = std::max(drift, std::abs(e.E - traj.energies.front().E));
  return {drift / traj.energies.front().E, 1e-8};
}

Outcome damped_monotone() {
  const TorusGrid g(1, 32);
  const auto a = constant_damping(g, 1.0);
  const auto u0 = scale_to_energy(random_field(g, 5), 1.0);
  EvolutionConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.record_stride = 10;
  const auto traj = evolve(u0, cfg, &a, nullptr);
  double rise = 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) rise = std::max(rise, traj.energies[i].E - traj.energies[i - 1].E);
  return {rise, 1e-9};
}

Outcome reversibility() {
  const TorusGrid g(1, 32);
  const auto u0 = random_field(g, 9);
  EvolutionConfig fwd;
  fwd.dt = 1e-3;
  fwd.t_end = 0.5;
  fwd.record_stride = 1 << 30;
  const auto there = evolve_linear(u0, fwd, nullptr).back();
  EvolutionConfig bwd = fwd;
  bwd.t_start = 0.5;
  bwd.t_end = 0.0;
  bwd.direction = Direction::backward;
  const auto back = evolve_linear(there, bwd, nullptr).back();
  return {sobolev_norm(back - u0, 1.0) / sobolev_norm(u0, 1.0), 1e-12};
}

Outcome weights_positive() {
  const TorusGrid g(1, 32);
  const OmegaSpec spec{1, 1.0, 0.5};
  const auto geom = build_eta(spec, g);
  const auto p = default_carleman_params(1.0, 1.0);
  const auto w = eval_weights(geom, p, chebyshev_interior_nodes(1.0, 16, default_node_margin(1.0)));
  double bad = 0.0;
  for (std::size_t j = 0; j < w.times.size(); ++j) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!(w.alpha[j][i] >= 0.0) || !(w.beta[j][i] > 0.0)) bad += 1.0;
    }
  }
  return {bad, 0.0};
}

Outcome gram_hermitian() {
  const TorusGrid g(1, 32);
  const auto a = build_damping({1, 1.0, 0.2}, 1.0, 1.0, g);
  const HUMConfig cfg;
  double worst = 0.0;
  for (unsigned i = 0; i < 3; ++i) {
    const auto f = random_field(g, 100 + 2 * i), h = random_field(g, 101 + 2 * i);
    const auto Gf = apply_G(f, cfg, a), Gh = apply_G(h, cfg, a);
    const double scale = std::sqrt(mass(f) * mass(h)) * phi_squared_integral(cfg, g);
    worst = std::max(worst, std::abs(l2_inner(Gf, h) - std::conj(l2_inner(Gh, f))) / scale);
    if (!(l2_inner(Gf, f).real() > 0.0)) worst = std::max(worst, 1.0);
  }
  return {worst, 1e-10};
}

Outcome decay_fit_exact() {
  std::vector<EnergyRecord> rec;
  for (int i = 0; i <= 40; ++i) {
    EnergyRecord r;
    r.t = 0.1 * i;
    r.E = 5.0 * std::exp(-0.3 * r.t);
    rec.push_back(r);
  }
  const auto fit = fit_decay(rec, {0.0, 4.0});
  return {std::abs(fit.gamma - 0.3), 1e-12};
}

Outcome trilinear_scale() {
  const TorusGrid g(1, 16);
  auto f = random_band_limited(g, 1.0, 32, 2, 17);
  const double r1 = trilinear_ratio(f, 1.0, 0.375);
  for (auto& u : f.samples) u *= cplx(3.7);
  const double r2 = trilinear_ratio(f, 1.0, 0.375);
  return {std::abs(r2 - r1) / r1, 1e-12};
}

Outcome scenario_round_trip(const Scenario& s) {
  const auto text = serialize_scenario(s);
  return {normalize_scenario(text) == text ? 0.0 : 1.0, 0.0};
}

}  // namespace

nlohmann::json verify_suite(const Scenario& s) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> checks{
      {"sobolev_norm_vs_dft", sobolev_vs_dft},
      {"quartic_vs_oversampled", quartic_vs_oversampled},
      {"plane_wave_exact", plane_wave_exact},
      {"energy_conservation", conservation},
      {"damped_energy_nonincreasing", damped_monotone},
      {"linear_reversibility", reversibility},
      {"carleman_weights_positive", weights_positive},
      {"gramian_hermitian_positive", gram_hermitian},
      {"decay_fit_exact_exponential", decay_fit_exact},
      {"trilinear_scale_invariance", trilinear_scale},
      {"scenario_round_trip", [&] { return scenario_round_trip(s); }},
  };
  auto out = nlohmann::json::object();
  auto list = nlohmann::json::array();
  bool all = true;
  for (const auto& [name, fn] : checks) {
    nlohmann::json entry{{"name", name}};
    try {
      const auto o = fn();
      const bool ok = std::isfinite(o.value) && o.value <= o.tolerance;
      entry["passed"] = ok;
      entry["value"] = o.value;
      entry["tolerance"] = o.tolerance;
      all = all && ok;
    } catch (const std::exception& e) {
      entry["passed"] = false;
      entry["error"] = e.what();
      all = false;
    }
    list.push_back(entry);
  }
  out["checks"] = list;
  out["all_passed"] = all;
  return out;
}

}  // namespace nlslab
