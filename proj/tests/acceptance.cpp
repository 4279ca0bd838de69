// Acceptance checks 1-11. One PASS/FAIL line per criterion.
//
//   acceptance [--only 1,5] [--expect-fail 1,3]
//
// Exit status is 0 iff every criterion outside the expect-fail list passed.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "bourgain.hpp"
#include "carleman.hpp"
#include "control.hpp"
#include "diagnostics.hpp"
#include "scenario.hpp"
#include "support.hpp"

using namespace nlslab;
using nlslab::testing::random_field;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

class Detail {
 public:
  template <class T>
  Detail& operator()(const char* key, const T& v) {
    if (!first_) os_ << ' ';
    first_ = false;
    os_ << key << '=' << v;
    return *this;
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
  bool first_ = true;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

EvolutionConfig forward(double dt, double T, int stride) {
  EvolutionConfig c;
  c.dt = dt;
  c.t_end = T;
  c.record_stride = stride;
  return c;
}

SpectralField smooth_data(const TorusGrid& g, std::uint64_t seed, double energy) {
  return scale_to_energy(random_smooth(g, g.points_per_axis() / 3, seed), energy);
}

bool near_four(double r, double tol) { return std::abs(r - 4.0) <= tol; }

// 1. Strang order on the exact plane wave.
Verdict integrator_order() {
  const auto t0 = std::chrono::steady_clock::now();
  const TorusGrid g(1, 64);
  const double A = 0.5, T = 1.0;
  SpectralField u0(g), exact(g);
  u0.mode({1, 0, 0}) = A;
  exact.mode({1, 0, 0}) = A * std::polar(1.0, -(1.0 + A * A) * T);
  std::vector<double> err;
  for (const double dt : {2e-3, 1e-3, 5e-4}) {
    err.push_back(sobolev_norm(evolve(u0, forward(dt, T, 1 << 30), nullptr, nullptr).back() - exact, 1.0));
  }
  const double r1 = err[0] / err[1], r2 = err[1] / err[2];
  const double secs = seconds_since(t0);
  Detail d;
  d("err", err[0])("err", err[1])("err", err[2])("ratio", r1)("ratio", r2)("runtime_s", secs);
  return {near_four(r1, 0.8) && near_four(r2, 0.8) && secs < 5.0, d.str()};
}

// 2. Energy conservation without damping or forcing.
Verdict conservation() {
  const auto t0 = std::chrono::steady_clock::now();
  Detail d;
  bool ok = true;
  for (const auto& [dim, n, dt] : {std::tuple{1, 64, 1e-4}, std::tuple{2, 32, 2e-4}}) {
    const TorusGrid g(dim, n);
    const auto u0 = smooth_data(g, kDefaultSeed, 1.0);
    const auto tr = evolve(u0, forward(dt, 0.5, 10), nullptr, nullptr);
    const double e0 = tr.energies.front().E;
    double drift = 0.0;
    for (const auto& r : tr.energies) drift = std::max(drift, std::abs(r.E - e0) / e0);
    d(dim == 1 ? "drift_d1" : "drift_d2", drift);
    ok = ok && drift <= 1e-6;
  }
  const double secs = seconds_since(t0);
  d("runtime_s", secs);
  return {ok && secs < 60.0, d.str()};
}

struct DampedScenario {
  TorusGrid g{1, 64};
  DampingProfile a = build_damping({1, 1.0, 0.5}, 1.0, 1.0, g);
  double T = 2.0;
};

// 3. Identity residuals.
Verdict identity_residuals() {
  const DampedScenario s;
  const auto u0 = smooth_data(s.g, kDefaultSeed, 1.0);
  const auto P = s.a.as_field();
  std::vector<std::array<double, 3>> res;
  double e0 = 0.0;
  for (const double dt : {1e-3, 5e-4}) {
    const auto tr = evolve(u0, forward(dt, s.T, 1), &s.a, nullptr);
    e0 = tr.energies.front().E;
    res.push_back({l2_identity_residual(tr, &s.a, nullptr, 0.0, s.T) / e0,
                   energy_identity_residual(tr, &s.a, nullptr, 0.0, s.T) / e0,
                   morawetz_residual(tr, P, &s.a, nullptr, 0.0, s.T) / e0});
  }
  bool small = true, shrink = true;
  Detail d;
  const char* names[3] = {"l2", "energy", "morawetz"};
  for (int k = 0; k < 3; ++k) {
    const double ratio = res[0][k] / res[1][k];
    small = small && res[0][k] <= 1e-4;
    const bool sh = std::isfinite(ratio) && near_four(ratio, 1.0);
    shrink = shrink && sh;
    d(names[k], res[0][k])((std::string(names[k]) + "_shrink").c_str(), ratio);
  }
  d("all_small", small ? "yes" : "no")("all_shrink", shrink ? "yes" : "no");
  return {small && shrink, d.str()};
}

// 4. Uniform exponential decay.
Verdict exponential_decay() {
  const DampedScenario s;
  const auto base = random_smooth(s.g, s.g.points_per_axis() / 3, kDefaultSeed);
  const auto window = default_decay_window(s.T);
  std::vector<std::vector<EnergyRecord>> runs;
  Detail d;
  bool ok = true;
  double gmin = 1e300, gmax = 0.0;
  for (const double E : {0.1, 1.0, 10.0}) {
    const auto tr = evolve(scale_to_energy(base, E), forward(1e-3, s.T, 1), &s.a, nullptr);
    const auto fit = fit_decay(tr.energies, window);
    ok = ok && fit.gamma > 0.0;
    gmin = std::min(gmin, fit.gamma);
    gmax = std::max(gmax, fit.gamma);
    d("gamma", fit.gamma);
    runs.push_back(tr.energies);
  }
  const auto cover = cover_fit(runs, window);
  bool covered = cover.gamma > 0.0;
  for (const auto& run : runs) {
    for (const auto& r : run) {
      covered = covered && r.E <= cover.C * std::exp(-cover.gamma * (r.t - run[0].t)) * run[0].E * (1.0 + 1e-12);
    }
  }
  d("C_star", cover.C)("gamma_star", cover.gamma)("spread", gmax / gmin)("cover_holds", covered ? "yes" : "no");
  return {ok && covered, d.str()};
}

// 5. Observability ratio stability.
Verdict observability() {
  const DampedScenario s;
  Detail d;
  bool ok = true;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto u0 = smooth_data(s.g, kDefaultSeed + seed, 1.0);
    const auto o1 = observability_ratio(evolve(u0, forward(1e-3, s.T, 1), &s.a, nullptr), s.a);
    const auto o2 = observability_ratio(evolve(u0, forward(5e-4, s.T, 2), &s.a, nullptr), s.a);
    const double change = std::abs(o2.integrated - o1.integrated) / o1.integrated;
    ok = ok && std::isfinite(o1.integrated) && o1.integrated > 0.0 && std::isfinite(o2.integrated) && change <= 0.25;
    worst = std::max(worst, change);
    d("ratio", o1.integrated);
  }
  d("max_rel_change", worst);
  return {ok, d.str()};
}

// 6. Carleman empirical constant.
Verdict carleman() {
  const DampedScenario s;
  const OmegaSpec spec{1, 1.0, 0.5};
  const auto geom = build_eta(spec, TorusGrid(1, 128));
  auto p = default_carleman_params(1.0, s.a.amax);
  p.lambda = 2.0;
  const Physics phys{&s.a, nullptr, true};
  std::array<CorpusConstant, 2> consts;
  bool bounded = true;
  for (int level = 0; level < 2; ++level) {
    const int nodes = 128 << level;
    const auto times = chebyshev_interior_nodes(p.T, nodes, default_node_margin(p.T));
    const auto w = eval_weights(geom, p, times);
    std::vector<CarlemanSides> sides;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto u0 = random_smooth(s.g, s.g.points_per_axis() / 3, kDefaultSeed + seed);
      const auto tr = evolve_to_times(u0, 0.0, times, 1e-3, Scheme::strang2, phys);
      sides.push_back(carleman_sides(tr, w, p, nullptr));
    }
    consts[level] = corpus_constant(sides);
    for (const auto& c : sides) bounded = bounded && c.log_lhs <= consts[level].log_c_emp + c.log_rhs + 1e-12;
  }
  const double log_change = std::abs(consts[1].log_c_emp - consts[0].log_c_emp);
  Detail d;
  d("lambda", p.lambda)("s", p.s)("m", p.m)("T", p.T)("log_C_emp", consts[0].log_c_emp)
      ("log_C_emp_2N", consts[1].log_c_emp)("refinement_factor", std::exp(log_change));
  return {bounded && std::isfinite(consts[0].log_c_emp) && log_change <= std::log(2.0), d.str()};
}

struct HumScenario {
  TorusGrid g{1, 32};
  DampingProfile a = build_damping({1, 1.0, 0.2}, 1.0, 1.0, g);
  HUMConfig cfg;
};

// 7. Gramian checks, CG convergence, closed form with a = 1.
Verdict hum() {
  const HumScenario s;
  const double I = phi_squared_integral(s.cfg, s.g);
  double herm = 0.0;
  bool positive = true;
  for (unsigned i = 0; i < 20; ++i) {
    const auto f = random_field(s.g, 1000 + i, 0.5), h = random_field(s.g, 2000 + i, 0.5);
    const auto Gf = apply_G(f, s.cfg, s.a), Gh = apply_G(h, s.cfg, s.a);
    herm = std::max(herm, std::abs(l2_inner(Gf, h) - std::conj(l2_inner(Gh, f))) / (std::sqrt(mass(f) * mass(h)) * I));
    positive = positive && l2_inner(Gf, f).real() > 0.0;
  }
  const auto u0 = random_field(s.g, 77);
  const auto r = solve_S(u0, s.cfg, s.a);
  // With a = 1, G is a multiple of the identity: unpreconditioned CG lands in one step.
  const auto one = constant_damping(s.g, 1.0);
  HUMConfig plain = s.cfg;
  plain.preconditioner = Preconditioner::none;
  const auto c = solve_S(u0, plain, one);
  const auto expect = cplx(0.0, -1.0 / I) * u0;
  const double closed = sobolev_norm(c.phi0 - expect, 0.0) / sobolev_norm(expect, 0.0);
  Detail d;
  d("hermitian_err", herm)("positive", positive ? "yes" : "no")("cg_iters", r.iterations)
      ("cg_residual", r.relative_residual)("closed_form_err", closed)("closed_form_iters", c.iterations);
  return {herm <= 1e-10 && positive && r.converged && r.relative_residual <= 1e-8 && r.iterations <= 200 &&
              closed <= 1e-10,
          d.str()};
}

// 8. Local null control.
Verdict local_control() {
  const HumScenario s;
  SpectralField u0(s.g);
  u0.mode({1, 0, 0}) = 1e-2 / std::sqrt(2.0);
  const auto r = local_null_control(u0, s.cfg, s.a);
  Detail d;
  d("u0_h1", sobolev_norm(u0, 1.0))("picard_iters", r.picard_iters)("max_contraction", r.max_contraction)
      ("terminal_h1", r.terminal_h1);
  return {r.picard_iters <= 20 && r.max_contraction <= 0.8 && r.terminal_h1 <= 1e-6 && r.certified, d.str()};
}

// 9. Control time against energy.
Verdict tau_scan_check() {
  const auto t0 = std::chrono::steady_clock::now();
  const DampedScenario s;
  HUMConfig cfg;
  const auto reference = random_smooth(s.g, s.g.points_per_axis() / 3, kDefaultSeed);
  const auto r = tau_scan({1.0, 10.0, 100.0}, 1e-2, reference, cfg, s.a);
  bool bounded = std::isfinite(r.C_fit);
  Detail d;
  for (const auto& t : r.samples) {
    bounded = bounded && t.tau / std::log(t.R + 1.0) <= r.C_fit * (1.0 + 1e-12);
    d("tau", t.tau);
  }
  const double secs = seconds_since(t0);
  d("C_fit", r.C_fit)("monotone", r.monotone ? "yes" : "no")("certified", r.all_certified ? "yes" : "no")
      ("runtime_s", secs);
  return {r.all_certified && bounded && r.monotone && secs < 600.0, d.str()};
}

// 10. Trilinear probe.
Verdict bourgain() {
  const TorusGrid g(1, 16);
  const auto sweep = trilinear_sweep(g, 1.0, 32, 2, 100, 1.0, 0.375, kDefaultSeed);
  // Single mode: psi(t) e^{ikx} e^{-ik^2 t} separates.
  const int k = 2;
  const cplx c(0.3, 0.4);
  std::vector<SpectralField> samples;
  for (int j = 0; j < 48; ++j) {
    SpectralField u(g);
    u.mode({k, 0, 0}) = c * std::polar(1.0, -double(k * k) * (j / 47.0));
    samples.push_back(u);
  }
  const SpaceTimeField f(1.0, samples);
  const std::vector<cplx> psi(f.cutoff.begin(), f.cutoff.end());
  const double expect = std::sqrt(1.0 + k * k) * std::abs(c) * time_sobolev_norm(psi, f.spacing(), 0.375);
  const double sep = std::abs(xsb_norm(f, 1.0, 0.375) - expect) / expect;
  auto rnd = random_band_limited(g, 1.0, 32, 2, kDefaultSeed);
  const double r1 = trilinear_ratio(rnd, 1.0, 0.375);
  for (auto& u : rnd.samples) u *= cplx(4.2);
  const double scale = std::abs(trilinear_ratio(rnd, 1.0, 0.375) - r1) / r1;
  Detail d;
  d("max_ratio", sweep.max_ratio)("mean_ratio", sweep.mean_ratio)("separated_err", sep)("scale_err", scale);
  return {std::isfinite(sweep.max_ratio) && sep <= 1e-10 && scale <= 1e-12, d.str()};
}

// 11. Oracle equivalences on n = 8.
Verdict oracles() {
  double sob = 0.0;
  for (const int dim : {1, 2}) {
    const TorusGrid g(dim, 8);
    const auto u = random_field(g, 5u + unsigned(dim), 0.4, false);
    const auto p = nlslab::testing::brute_physical(u);
    double sum = 0.0;
    for (std::size_t kk = 0; kk < g.size(); ++kk) {
      const auto kv = g.wavevector(kk);
      cplx acc = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        const auto x = g.point(j);
        double ph = 0.0;
        for (int a = 0; a < dim; ++a) ph += kv[a] * x[a];
        acc += p[j] * std::polar(1.0, -ph);
      }
      acc /= double(g.size());
      double k2 = 0.0;
      for (int a = 0; a < dim; ++a) k2 += double(kv[a] * kv[a]);
      sum += std::pow(1.0 + k2, 2.0) * std::norm(acc);
    }
    sob = std::max(sob, std::abs(std::sqrt(sum) - sobolev_norm(to_spectral(p), 2.0)) / std::sqrt(sum));
  }

  const TorusGrid g(1, 8);
  const auto u = random_field(g, 9, 0.4, false);
  const auto fine = nlslab::testing::brute_physical(resample(u, 64));
  double q = 0.0;
  for (std::size_t i = 0; i < fine.size(); ++i) q += std::pow(std::norm(fine[i]), 2);
  q *= kTwoPi / double(fine.size());
  const double quart = std::abs(q - quartic(u)) / q;

  const auto f = random_band_limited(g, 1.0, 32, 2, 3);
  const std::size_t N = f.count(), M = kTimePadding * N;
  const double h = f.spacing();
  double x2 = 0.0;
  for (std::size_t kk = 0; kk < g.size(); ++kk) {
    const double k2 = g.k_squared(kk);
    for (std::size_t m = 0; m < M; ++m) {
      const long mm = m <= M / 2 ? long(m) : long(m) - long(M);
      const double tau = kTwoPi * double(mm) / (double(M) * h);
      cplx F = 0.0;
      for (std::size_t j = 0; j < N; ++j) {
        F += f.cutoff[j] * std::polar(1.0, k2 * f.time(j)) * f.samples[j][kk] *
             std::polar(1.0, -kTwoPi * double(m * j) / double(M));
      }
      x2 += (1.0 + k2) * (h / double(M)) * std::pow(1.0 + tau * tau, 0.375) * std::norm(F);
    }
  }
  const double xsb = std::abs(std::sqrt(x2) - xsb_norm(f, 1.0, 0.375)) / std::sqrt(x2);
  Detail d;
  d("sobolev_err", sob)("quartic_err", quart)("xsb_err", xsb);
  return {sob <= 1e-12 && quart <= 1e-10 && xsb <= 1e-10, d.str()};
}

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(std::stoi(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string only, expect_fail;
  app.add_option("--only", only, "comma-separated criteria to run");
  app.add_option("--expect-fail", expect_fail, "criteria whose FAIL does not affect the exit status");
  CLI11_PARSE(app, argc, argv);
  const auto selected = parse_list(only);
  const auto expected = parse_list(expect_fail);

  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"integrator order (plane wave)", integrator_order},
      {"energy conservation", conservation},
      {"identity residuals", identity_residuals},
      {"exponential decay", exponential_decay},
      {"observability ratio", observability},
      {"carleman constant", carleman},
      {"gramian and CG", hum},
      {"local null control", local_control},
      {"tau(R) scan", tau_scan_check},
      {"trilinear probe", bourgain},
      {"oracle equivalences", oracles},
  };
  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = int(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const bool excused = !v.pass && expected.count(id);
    std::printf("%s %2d %s: %s%s\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first, v.detail.c_str(),
                excused ? " (expected)" : "");
    std::fflush(stdout);
    if (!v.pass && !excused) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
