#include "harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>

#include "diagnostics.hpp"
#include "errors.hpp"
#include "verify.hpp"

#ifndef NLSLAB_VERSION
#define NLSLAB_VERSION "0.1.0"
#endif

namespace nlslab {

namespace fs = std::filesystem;

const char* version_string() { return NLSLAB_VERSION; }

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"simulate", "decay-scan",    "carleman",       "observability",
                                              "control-local", "control-global", "tau-scan", "bourgain-probe",
                                              "verify"};
  return names;
}

bool is_subcommand(const std::string& name) {
  const auto& s = subcommands();
  return std::find(s.begin(), s.end(), name) != s.end();
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const VerificationError*>(&e)) return 3;
  if (dynamic_cast<const NumericalError*>(&e)) return 2;
  return 1;
}

namespace {

struct Context {
  const Scenario& s;
  fs::path dir;
  json timings = json::object();
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create directory '" + p.string() + "': " + ec.message());
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw IoError("cannot write '" + p.string() + "'");
  return os;
}

const DampingProfile* damping_or_null(const std::optional<DampingProfile>& a) { return a ? &*a : nullptr; }

std::optional<DampingProfile> scenario_damping_opt(const Scenario& s) {
  if (s.geometry.amax == 0.0) return std::nullopt;
  return scenario_damping(s);
}

EvolutionConfig evolution_config(const Scenario& s, double dt) {
  EvolutionConfig cfg;
  cfg.dt = dt;
  cfg.t_start = 0.0;
  cfg.t_end = s.evolution.T;
  cfg.scheme = s.evolution.scheme;
  cfg.record_stride = s.evolution.record_stride;
  return cfg;
}

void write_series(const fs::path& path, const Trajectory& traj, const ResidualSeries& res) {
  auto os = open_out(path);
  os << "t,mass,grad_energy,quartic,E,l2_residual,energy_residual,morawetz_residual\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& e = traj.energies[i];
    os << g17(e.t) << ',' << g17(e.mass) << ',' << g17(e.grad_energy) << ',' << g17(e.quartic) << ','
       << g17(e.E) << ',' << g17(res.l2[i]) << ',' << g17(res.energy[i]) << ',' << g17(res.morawetz[i]) << '\n';
  }
}

void write_snapshots(const fs::path& dir, const Trajectory& traj, int stride) {
  if (stride <= 0) return;
  ensure_dir(dir);
  char name[64];
  for (std::size_t i = 0; i < traj.size(); i += std::size_t(stride)) {
    std::snprintf(name, sizeof(name), "snap_%06zu.nlsf", i);
    write_snapshot_file((dir / name).string(), to_physical(traj.states[i]), traj.times[i]);
  }
}

json fit_json(const DecayFit& f) {
  return {{"C", f.C},         {"gamma", f.gamma},         {"intercept", f.intercept},
          {"residual", f.residual}, {"t_a", f.t_a},       {"t_b", f.t_b},
          {"positive_prefix", f.positive_prefix}, {"samples", f.samples}};
}

std::pair<double, double> decay_window(const Scenario& s) {
  const double end = s.decay.window_end > 0.0 ? s.decay.window_end : s.evolution.T;
  return {std::min(s.decay.window_start, end), end};
}

// --- simulate ---------------------------------------------------------------

json simulate(Context& ctx) {
  const auto& s = ctx.s;
  const auto a = scenario_damping_opt(s);
  const auto u0 = initial_data(s);
  Stopwatch sw;
  const auto traj = evolve(u0, evolution_config(s, s.time_step()), damping_or_null(a), nullptr);
  ctx.timings["evolve_s"] = sw.seconds();
  std::optional<PhysicalField> P;
  if (a) P = a->as_field();
  const auto res = residual_series(traj, damping_or_null(a), nullptr, P ? &*P : nullptr);
  const auto gw = gronwall_check(traj, nullptr);

  const double e0 = traj.energies.front().E;
  double drift = 0.0, rise = 0.0;
  for (const auto& e : traj.energies) drift = std::max(drift, std::abs(e.E - e0));
  for (std::size_t i = 1; i < traj.size(); ++i) rise = std::max(rise, traj.energies[i].E - traj.energies[i - 1].E);

  json payload;
  payload["steps"] = evolution_config(s, s.time_step()).num_steps();
  payload["dt"] = s.time_step();
  payload["samples"] = traj.size();
  payload["E0"] = e0;
  payload["E_end"] = traj.energies.back().E;
  payload["max_energy_drift"] = drift;
  payload["relative_energy_drift"] = e0 > 0.0 ? drift / e0 : 0.0;
  payload["max_energy_rise"] = rise;
  payload["residuals"] = {{"l2", res.l2.back()}, {"energy", res.energy.back()}, {"morawetz", res.morawetz.back()}};
  payload["margins"] = {{"gronwall", gw.margin}, {"gronwall_holds", gw.holds}};
  payload["gamma"] = nullptr;
  payload["C"] = nullptr;
  if (a) {
    try {
      const auto fit = fit_decay(traj.energies, decay_window(s));
      payload["gamma"] = fit.gamma;
      payload["C"] = fit.C;
      payload["fit"] = fit_json(fit);
    } catch (const NumericalError&) {
      // Too few samples in the window: no fit is reported.
    }
  }
  if (s.output.series) write_series(ctx.dir / "series.csv", traj, res);
  if (s.output.snapshots) write_snapshots(ctx.dir / "snaps", traj, s.evolution.snapshot_stride);
  return payload;
}

// --- decay-scan -------------------------------------------------------------

json decay_scan(Context& ctx) {
  const auto& s = ctx.s;
  if (s.decay.energies.size() < 2) throw ConfigError("decay.energies: decay-scan needs at least two values");
  const auto a = scenario_damping(s);
  const auto base = initial_data(s);
  const auto window = decay_window(s);
  std::vector<std::vector<EnergyRecord>> runs;
  json per_run = json::array();
  double gmin = std::numeric_limits<double>::infinity(), gmax = 0.0;
  bool all_positive = true;
  Stopwatch sw;
  for (const double target : s.decay.energies) {
    const auto u0 = scale_to_energy(base, target);
    const auto traj = evolve(u0, evolution_config(s, s.time_step()), &a, nullptr);
    const auto fit = fit_decay(traj.energies, window);
    all_positive = all_positive && fit.gamma > 0.0;
    gmin = std::min(gmin, fit.gamma);
    gmax = std::max(gmax, fit.gamma);
    auto r = fit_json(fit);
    r["E0"] = traj.energies.front().E;
    r["E_target"] = target;
    r["E_end"] = traj.energies.back().E;
    per_run.push_back(r);
    runs.push_back(traj.energies);
  }
  ctx.timings["runs_s"] = sw.seconds();
  const auto cover = cover_fit(runs, window);
  // Direct check of the common bound at every recorded sample.
  double worst = 0.0;
  for (const auto& run : runs) {
    const double t0 = run.front().t, e0 = run.front().E;
    for (const auto& r : run) worst = std::max(worst, r.E / (cover.C * std::exp(-cover.gamma * (r.t - t0)) * e0));
  }
  json payload;
  payload["runs"] = per_run;
  payload["cover"] = fit_json(cover);
  payload["cover_worst_ratio"] = worst;
  payload["cover_holds"] = worst <= 1.0 + 1e-12 && cover.gamma > 0.0;
  payload["all_gamma_positive"] = all_positive;
  payload["spread"] = gmin > 0.0 ? gmax / gmin : std::numeric_limits<double>::infinity();
  payload["window"] = {window.first, window.second};
  return payload;
}

// --- carleman ---------------------------------------------------------------

CarlemanParams carleman_params(const Scenario& s, double amax) {
  const auto& c = s.carleman;
  auto p = default_carleman_params(c.T, amax, c.C, c.m);
  if (c.lambda > 0.0) p.lambda = c.lambda;
  if (c.s > 0.0) p.s = c.s;
  p.validate();
  return p;
}

struct CorpusRun {
  std::vector<CarlemanSides> sides;
  CorpusConstant constant;
};

CorpusRun carleman_corpus(const Scenario& s, const DampingProfile& a, const CarlemanGeometry& geom,
                          const CarlemanParams& p, int nodes) {
  const double margin = s.carleman.margin > 0.0 ? s.carleman.margin : default_node_margin(p.T);
  const auto times = chebyshev_interior_nodes(p.T, nodes, margin);
  const auto weights = eval_weights(geom, p, times);
  Physics phys{&a, nullptr, true};
  CorpusRun out;
  for (int i = 0; i < s.carleman.corpus; ++i) {
    const auto u0 = initial_data(s, std::uint64_t(i));
    const auto traj = evolve_to_times(u0, 0.0, times, s.time_step(), s.evolution.scheme, phys);
    out.sides.push_back(carleman_sides(traj, weights, p, nullptr));
  }
  out.constant = corpus_constant(out.sides);
  return out;
}

json sides_json(const CarlemanSides& c) {
  return {{"lhs", c.lhs},           {"rhs", c.rhs},         {"ratio", c.ratio},
          {"log_lhs", c.log_lhs},   {"log_rhs", c.log_rhs}, {"log_ratio", c.log_ratio},
          {"log_shift", c.log_shift}, {"lhs_terms", c.lhs_terms}, {"rhs_terms", c.rhs_terms},
          {"geometry_violation", c.geometry_violation}, {"trivial", c.trivial}};
}

json carleman(Context& ctx) {
  const auto& s = ctx.s;
  const auto a = scenario_damping(s);
  const auto p = carleman_params(s, a.amax);
  const TorusGrid fine(s.geometry.d, 2 * s.geometry.n);
  const auto geom = build_eta(s.omega(), fine, s.carleman.eta_scale);
  Stopwatch sw;
  const auto coarse = carleman_corpus(s, a, geom, p, s.carleman.nodes);
  const auto refined = carleman_corpus(s, a, geom, p, 2 * s.carleman.nodes);
  ctx.timings["corpus_s"] = sw.seconds();

  const auto& lr = coarse.constant.log_ratios;
  const std::size_t worst = std::size_t(std::max_element(lr.begin(), lr.end()) - lr.begin());
  const auto& top = coarse.sides[worst];
  json runs = json::array();
  for (std::size_t i = 0; i < coarse.sides.size(); ++i) {
    auto r = sides_json(coarse.sides[i]);
    r["member"] = i;
    r["refined_log_ratio"] = refined.sides[i].log_ratio;
    runs.push_back(r);
  }
  const double log_refine = refined.constant.log_c_emp - coarse.constant.log_c_emp;
  json payload;
  payload["lambda"] = p.lambda;
  payload["s"] = p.s;
  payload["m"] = p.m;
  payload["T"] = p.T;
  payload["lambda0"] = p.lambda0;
  payload["s0"] = p.s0;
  payload["lhs"] = top.lhs;
  payload["rhs"] = top.rhs;
  payload["ratio"] = coarse.constant.c_emp;
  payload["log_ratio"] = coarse.constant.log_c_emp;
  payload["log_lhs"] = top.log_lhs;
  payload["log_rhs"] = top.log_rhs;
  payload["c_emp"] = coarse.constant.c_emp;
  payload["c_emp_refined"] = refined.constant.c_emp;
  payload["refinement_ratio"] = std::exp(log_refine);
  payload["log_refinement_ratio"] = log_refine;
  payload["nodes"] = s.carleman.nodes;
  payload["eta"] = {{"scale", geom.scale}, {"sup", geom.sup_norm}, {"c", geom.c},
                    {"gradient_constant", geom.gradient_constant},
                    {"pseudoconvexity_constant", geom.pseudoconvexity_constant}};
  payload["runs"] = runs;
  return payload;
}

// --- observability ----------------------------------------------------------

json obs_json(const ObservabilityResult& o) {
  return {{"per_t_max", o.per_t_max},
          {"integrated", o.integrated},
          {"denominator", o.denominator},
          {"degenerate", o.degenerate},
          {"invisible", o.invisible},
          {"lower_bound", o.lower_bound},
          {"lower_bound_holds", o.lower_bound_holds},
          {"stated_lower_bound", o.stated_lower_bound},
          {"stated_lower_bound_holds", o.stated_lower_bound_holds}};
}

json observability(Context& ctx) {
  const auto& s = ctx.s;
  const auto a = scenario_damping(s);
  const double dt = s.time_step();
  json runs = json::array();
  double worst_change = 0.0;
  bool all_finite = true;
  Stopwatch sw;
  for (int i = 0; i < s.carleman.corpus; ++i) {
    const auto u0 = initial_data(s, std::uint64_t(i));
    auto cfg = evolution_config(s, dt);
    const auto o1 = observability_ratio(evolve(u0, cfg, &a, nullptr), a);
    cfg.dt = 0.5 * dt;
    cfg.record_stride = 2 * s.evolution.record_stride;
    const auto o2 = observability_ratio(evolve(u0, cfg, &a, nullptr), a);
    const double change = std::abs(o2.integrated - o1.integrated) / o1.integrated;
    all_finite = all_finite && std::isfinite(o1.integrated) && o1.integrated > 0.0 && std::isfinite(o2.integrated);
    worst_change = std::max(worst_change, change);
    json r = obs_json(o1);
    r["member"] = i;
    r["integrated_half_dt"] = o2.integrated;
    r["relative_change"] = change;
    runs.push_back(r);
  }
  ctx.timings["runs_s"] = sw.seconds();
  json payload;
  payload["T"] = s.evolution.T;
  payload["dt"] = dt;
  payload["runs"] = runs;
  payload["all_finite_positive"] = all_finite;
  payload["max_relative_change"] = worst_change;
  return payload;
}

// --- control ----------------------------------------------------------------

json increments_json(const ControlResult& r) {
  return {{"increments", r.increments},
          {"contraction_factors", r.contraction_factors},
          {"iterate_norms", r.iterate_norms},
          {"max_contraction", r.max_contraction}};
}

void write_control_snapshots(const fs::path& dir, const ControlResult& r, const HUMConfig& cfg,
                             const DampingProfile& a, double t_offset) {
  ensure_dir(dir);
  constexpr int kFrames = 11;
  char name[64];
  for (int j = 0; j < kFrames; ++j) {
    const double t = cfg.T * double(j) / double(kFrames - 1);
    std::snprintf(name, sizeof(name), "control_%03d.nlsf", j);
    write_snapshot_file((dir / name).string(), hum_control_physical(r.phi0, cfg, a, t), t_offset + t);
  }
}

json control_local(Context& ctx) {
  const auto& s = ctx.s;
  const auto a = scenario_damping(s);
  const auto u0 = initial_data(s);
  Stopwatch sw;
  const auto r = local_null_control(u0, s.hum.cfg, a);
  ctx.timings["control_s"] = sw.seconds();
  if (s.output.snapshots) write_control_snapshots(ctx.dir / "snaps", r, s.hum.cfg, a, 0.0);
  json payload;
  payload["tau"] = s.hum.cfg.T;
  payload["R"] = total_energy(u0).E;
  payload["u0_h1"] = sobolev_norm(u0, 1.0);
  payload["eps"] = s.hum.cfg.eps_loc;
  payload["picard_iters"] = r.picard_iters;
  payload["cg_iters_total"] = r.cg_iters_total;
  payload["terminal_h1"] = r.terminal_h1;
  payload["certified"] = r.certified;
  payload["picard"] = increments_json(r);
  return payload;
}

json control_global(Context& ctx) {
  const auto& s = ctx.s;
  const auto a = scenario_damping(s);
  const auto u0 = initial_data(s);
  Stopwatch sw;
  const auto r = global_null_control(u0, s.control.eps, s.hum.cfg, a, s.control.phase);
  ctx.timings["control_s"] = sw.seconds();
  if (s.output.snapshots) write_control_snapshots(ctx.dir / "snaps", r.local, s.hum.cfg, a, r.switch_time);
  json payload;
  payload["tau"] = r.tau;
  payload["R"] = total_energy(u0).E;
  payload["eps"] = s.control.eps;
  payload["switch_time"] = r.switch_time;
  payload["switch_h1"] = r.switch_h1;
  payload["retries"] = r.retries;
  payload["picard_iters"] = r.local.picard_iters;
  payload["cg_iters_total"] = r.local.cg_iters_total;
  payload["terminal_h1"] = r.local.terminal_h1;
  payload["certified"] = r.local.certified;
  payload["picard"] = increments_json(r.local);
  return payload;
}

json tau_scan_cmd(Context& ctx) {
  const auto& s = ctx.s;
  const auto a = scenario_damping(s);
  const auto reference = initial_data(s);
  Stopwatch sw;
  const auto r = tau_scan(s.control.R_list, s.control.eps, reference, s.hum.cfg, a, s.control.phase);
  ctx.timings["scan_s"] = sw.seconds();
  json samples = json::array();
  for (const auto& t : r.samples) {
    samples.push_back({{"R", t.R},
                       {"tau", t.tau},
                       {"tau_over_log", t.tau / std::log(t.R + 1.0)},
                       {"switch_time", t.switch_time},
                       {"terminal_h1", t.terminal_h1},
                       {"certified", t.certified},
                       {"retries", t.retries}});
  }
  json payload;
  payload["eps"] = r.eps;
  payload["samples"] = samples;
  payload["C_fit"] = r.C_fit;
  payload["monotone"] = r.monotone;
  payload["all_certified"] = r.all_certified;
  payload["granularity"] = double(s.control.phase.record_stride) * s.control.phase.dt;
  return payload;
}

// --- bourgain-probe ---------------------------------------------------------

json bourgain_probe(Context& ctx) {
  const auto& s = ctx.s;
  const auto& b = s.bourgain;
  Stopwatch sw;
  const auto sweep = trilinear_sweep(s.grid(), b.T, b.time_samples, b.time_band, std::size_t(b.samples), b.s,
                                     b.bprime, s.seed);
  ctx.timings["sweep_s"] = sw.seconds();
  json payload;
  payload["s"] = b.s;
  payload["bprime"] = b.bprime;
  payload["samples"] = sweep.samples;
  payload["max_ratio"] = sweep.max_ratio;
  payload["mean_ratio"] = sweep.mean_ratio;
  payload["ratios"] = sweep.ratios;
  return payload;
}

json config_echo(const Scenario& s) {
  const double dt = s.time_step();
  return {{"d", s.geometry.d},     {"n", s.geometry.n},       {"eps", s.geometry.eps},
          {"eps0", s.geometry.eps0}, {"a0", s.geometry.a0},   {"amax", s.geometry.amax},
          {"dt", dt},               {"T", s.evolution.T},     {"scheme", scheme_name(s.evolution.scheme)},
          {"record_stride", s.evolution.record_stride},       {"preset", preset_name(s.initial.preset)}};
}

template <class E>
[[noreturn]] void rethrow_with(const std::string& prefix, const E& e) {
  throw E(prefix + e.what());
}

}  // namespace

json payload_only(const json& report) {
  json out = report;
  out.erase("timings");
  return out;
}

RunReport run(const std::string& subcommand, const Scenario& scenario, const std::string& out_root) {
  using Handler = std::function<json(Context&)>;
  static const std::map<std::string, Handler> handlers{
      {"simulate", simulate},           {"decay-scan", decay_scan},
      {"carleman", carleman},           {"observability", observability},
      {"control-local", control_local}, {"control-global", control_global},
      {"tau-scan", tau_scan_cmd},       {"bourgain-probe", bourgain_probe},
      {"verify", [](Context& c) { return verify_suite(c.s); }},
  };
  const auto it = handlers.find(subcommand);
  if (it == handlers.end()) throw ConfigError("unknown subcommand '" + subcommand + "'");

  scenario.validate();
  const fs::path root = out_root.empty() ? fs::path(scenario.output.dir) : fs::path(out_root);
  Context ctx{scenario, root / scenario.name / subcommand};
  ensure_dir(ctx.dir);

  Stopwatch total;
  json payload;
  const std::string prefix = subcommand + ": ";
  try {
    payload = it->second(ctx);
  } catch (const ConfigError& e) {
    rethrow_with(prefix, e);
  } catch (const InvalidArgument& e) {
    rethrow_with(prefix, e);
  } catch (const NumericalError& e) {
    rethrow_with(prefix, e);
  } catch (const VerificationError& e) {
    rethrow_with(prefix, e);
  } catch (const IoError& e) {
    rethrow_with(prefix, e);
  }
  ctx.timings["total_s"] = total.seconds();

  RunReport out;
  out.dir = ctx.dir.string();
  out.report = {{"scenario", scenario.name},
                {"subcommand", subcommand},
                {"version", version_string()},
                {"seed", scenario.seed},
                {"config", config_echo(scenario)},
                {"payload", payload},
                {"timings", ctx.timings}};
  if (subcommand == "verify" && !payload.value("all_passed", false)) out.exit_code = 3;
  auto os = open_out(ctx.dir / "report.json");
  os << out.report.dump(2) << '\n';
  return out;
}

}  // namespace nlslab
