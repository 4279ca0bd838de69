#include "control.hpp"

#include <algorithm>
#include <boost/math/special_functions/legendre.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "diagnostics.hpp"
#include "errors.hpp"

namespace nlslab {

double hum_bump(double t, double T) {
  const double tau = t / T;
  if (!(tau > 0.0 && tau < 1.0)) return 0.0;
  return std::exp(4.0 - 1.0 / (tau * (1.0 - tau)));
}

void HUMConfig::validate() const {
  if (!(T > 0.0)) throw InvalidArgument("HUM horizon T must be positive");
  if (!(cg_tol > 0.0)) throw InvalidArgument("cg_tol must be positive");
  if (cg_maxiter < 1) throw InvalidArgument("cg_maxiter must be >= 1");
  if (quad_nodes < 1) throw InvalidArgument("quad_nodes must be >= 1");
  if (quad_panels < 0) throw InvalidArgument("quad_panels must be >= 0");
  if (!(dt > 0.0)) throw InvalidArgument("HUM dt must be positive");
  if (!(eps_loc > 0.0)) throw InvalidArgument("eps_loc must be positive");
  if (!(cert_tol > 0.0)) throw InvalidArgument("cert_tol must be positive");
  if (picard_maxiter < 1) throw InvalidArgument("picard_maxiter must be >= 1");
}

int HUMConfig::panels(const TorusGrid& grid) const {
  if (quad_panels > 0) return quad_panels;
  return std::max(1, static_cast<int>(std::ceil(T * grid.max_k_squared() / 2.0)));
}

TimeQuadrature gauss_legendre(double T, int panels, int order) {
  if (panels < 1 || order < 1) throw InvalidArgument("quadrature needs panels, order >= 1");
  // Reference rule on [-1, 1] from the Legendre zeros.
  std::vector<double> x, w;
  for (const double z : boost::math::legendre_p_zeros<double>(order)) {
    const double dp = boost::math::legendre_p_prime(order, z);
    const double wz = 2.0 / ((1.0 - z * z) * dp * dp);
    x.push_back(z);
    w.push_back(wz);
    if (z != 0.0) {
      x.push_back(-z);
      w.push_back(wz);
    }
  }
  std::vector<std::size_t> idx(x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  TimeQuadrature q;
  const double h = T / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    for (const auto i : idx) {
      q.nodes.push_back(mid + 0.5 * h * x[i]);
      q.weights.push_back(0.5 * h * w[i]);
    }
  }
  return q;
}

namespace {

TimeQuadrature hum_quadrature(const HUMConfig& cfg, const TorusGrid& grid) {
  return gauss_legendre(cfg.T, cfg.panels(grid), cfg.quad_nodes);
}

void check_grid(const SpectralField& f, const DampingProfile& a) {
  if (f.grid() != a.grid) throw InvalidArgument("field and damping live on different grids");
}

}  // namespace

double phi_squared_integral(const HUMConfig& cfg, const TorusGrid& grid) {
  const auto q = hum_quadrature(cfg, grid);
  double acc = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const double p = cfg.phi_at(q.nodes[i]);
    acc += q.weights[i] * p * p;
  }
  return acc;
}

SpectralField apply_G(const SpectralField& phi0, const HUMConfig& cfg, const DampingProfile& a) {
  check_grid(phi0, a);
  cfg.validate();
  const auto q = hum_quadrature(cfg, phi0.grid());
  const auto a2 = a.squared();
  SpectralField out(phi0.grid());
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const double s = q.nodes[i];
    const double p = cfg.phi_at(s);
    const double w = q.weights[i] * p * p;
    if (w == 0.0) continue;
    auto phys = to_physical(free_propagator(phi0, s));
    for (std::size_t j = 0; j < phys.size(); ++j) phys[j] *= a2[j];
    out += cplx(w) * free_propagator(to_spectral(phys), -s);
  }
  return out;
}

SpectralField apply_S(const SpectralField& phi0, const HUMConfig& cfg, const DampingProfile& a) {
  return cplx(0.0, 1.0) * apply_G(phi0, cfg, a);
}

SolveResult solve_S(const SpectralField& u0, const HUMConfig& cfg, const DampingProfile& a) {
  check_grid(u0, a);
  cfg.validate();
  if (!u0.is_finite()) throw InvalidArgument("solve_S needs finite data");
  const auto& grid = u0.grid();
  SolveResult res;
  res.phi0 = SpectralField(grid);
  const SpectralField b = cplx(0.0, -1.0) * u0;
  const double b_norm = std::sqrt(mass(b));
  if (b_norm == 0.0) {
    res.converged = true;
    return res;
  }
  auto precondition = [&](const SpectralField& r) {
    if (cfg.preconditioner == Preconditioner::none) return r;
    SpectralField z = r;
    for (std::size_t i = 0; i < z.size(); ++i) z[i] /= std::sqrt(1.0 + grid.k_squared(i));
    return z;
  };

  SpectralField x(grid);
  SpectralField r = b;
  SpectralField z = precondition(r);
  SpectralField p = z;
  double rz = l2_inner(r, z).real();
  double rel = 1.0;
  for (int it = 1; it <= cfg.cg_maxiter; ++it) {
    const auto Gp = apply_G(p, cfg, a);
    const double pGp = l2_inner(Gp, p).real();
    if (!(pGp > 0.0)) {
      std::ostringstream msg;
      msg << "HUM Gramian lost positivity at CG iteration " << it << " (<Gp, p> = " << pGp << ")";
      throw NumericalError(msg.str());
    }
    const double alpha = rz / pGp;
    x += cplx(alpha) * p;
    r -= cplx(alpha) * Gp;
    rel = std::sqrt(mass(r)) / b_norm;
    res.iterations = it;
    if (rel <= cfg.cg_tol) {
      res.converged = true;
      break;
    }
    z = precondition(r);
    const double rz_new = l2_inner(r, z).real();
    p = z + cplx(rz_new / rz) * p;
    rz = rz_new;
  }
  // Report the true residual rather than the recursive one.
  rel = std::sqrt(mass(apply_G(x, cfg, a) - b)) / b_norm;
  res.relative_residual = rel;
  res.phi0 = std::move(x);
  if (!res.converged) {
    std::ostringstream msg;
    msg << "CG for S did not reach " << cfg.cg_tol << " within " << cfg.cg_maxiter
        << " iterations (relative residual " << rel << ")";
    throw NumericalError(msg.str());
  }
  return res;
}

PhysicalField hum_control_physical(const SpectralField& phi0, const HUMConfig& cfg, const DampingProfile& a,
                                   double t) {
  check_grid(phi0, a);
  const double p = cfg.phi_at(t);
  auto phys = to_physical(free_propagator(phi0, t));
  for (std::size_t j = 0; j < phys.size(); ++j) phys[j] *= a.values[j] * a.values[j] * p * p;
  return phys;
}

SourceTerm hum_control(const SpectralField& phi0, const HUMConfig& cfg, const DampingProfile& a) {
  SourceTerm g;
  g.supported_in_omega = true;
  g.eval = [phi0, cfg, a](double t) { return to_spectral(hum_control_physical(phi0, cfg, a, t)); };
  return g;
}

SpectralField interpolate_trajectory(const Trajectory& traj, double t) {
  if (traj.size() == 0) throw InvalidArgument("cannot interpolate an empty trajectory");
  if (traj.size() == 1) return free_propagator(traj.front(), t - traj.times.front());
  const bool ascending = traj.times.back() > traj.times.front();
  auto before = [&](double x, double y) { return ascending ? x < y : x > y; };
  // First index whose time is not before t.
  std::size_t lo = 0, hi = traj.size() - 1;
  if (!before(traj.times[0], t)) return free_propagator(traj.states[0], t - traj.times[0]);
  if (!before(t, traj.times[hi])) return free_propagator(traj.states[hi], t - traj.times[hi]);
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (before(traj.times[mid], t)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double t0 = traj.times[lo], t1 = traj.times[hi];
  const double theta = (t - t0) / (t1 - t0);
  if (theta == 0.0) return traj.states[lo];
  if (theta == 1.0) return traj.states[hi];
  return cplx(1.0 - theta) * free_propagator(traj.states[lo], t - t0) +
         cplx(theta) * free_propagator(traj.states[hi], t - t1);
}

namespace {

EvolutionConfig backward_config(const HUMConfig& cfg) {
  EvolutionConfig ec;
  ec.dt = cfg.dt;
  ec.t_start = cfg.T;
  ec.t_end = 0.0;
  ec.direction = Direction::backward;
  ec.scheme = cfg.scheme;
  ec.record_stride = 1;
  return ec;
}

}  // namespace

SpectralField apply_K(const SpectralField& phi0, const HUMConfig& cfg, const DampingProfile& a) {
  check_grid(phi0, a);
  cfg.validate();
  const auto& grid = phi0.grid();
  const auto g = hum_control(phi0, cfg, a);
  const auto ec = backward_config(cfg);
  const auto u = evolve(SpectralField(grid), ec, nullptr, &g);

  SourceTerm cubic;
  cubic.eval = [&u](double t) {
    auto phys = to_physical(interpolate_trajectory(u, t));
    for (std::size_t j = 0; j < phys.size(); ++j) phys[j] *= std::norm(phys[j]);
    return dealias(to_spectral(phys));
  };
  const auto v = evolve_linear(SpectralField(grid), ec, &cubic);
  return v.back();
}

ControlResult local_null_control(const SpectralField& u0, const HUMConfig& cfg, const DampingProfile& a) {
  check_grid(u0, a);
  cfg.validate();
  const double u0_h1 = sobolev_norm(u0, 1.0);
  if (u0_h1 > cfg.eps_loc) {
    std::ostringstream msg;
    msg << "local control needs ||u0||_H1 <= eps_loc = " << cfg.eps_loc << ", got " << u0_h1;
    throw InvalidArgument(msg.str());
  }
  ControlResult res;
  const auto base = solve_S(u0, cfg, a);
  res.cg_iters_total += base.iterations;
  SpectralField phi = base.phi0;
  res.iterate_norms.push_back(sobolev_norm(phi, 1.0));
  if (u0_h1 > 0.0) {
    for (int it = 1; it <= cfg.picard_maxiter; ++it) {
      const auto k = apply_K(phi, cfg, a);
      const auto corr = solve_S(k, cfg, a);
      res.cg_iters_total += corr.iterations;
      auto next = base.phi0 - corr.phi0;
      const double inc = sobolev_norm(next - phi, 1.0);
      res.increments.push_back(inc);
      if (res.increments.size() > 1 && res.increments[res.increments.size() - 2] > 0.0) {
        const double f = inc / res.increments[res.increments.size() - 2];
        res.contraction_factors.push_back(f);
        res.max_contraction = std::max(res.max_contraction, f);
      }
      phi = std::move(next);
      res.iterate_norms.push_back(sobolev_norm(phi, 1.0));
      res.picard_iters = it;
      // Growth is only divergence once it exceeds the first correction; below
      // that the increments sit at the CG noise floor.
      const bool diverging = !std::isfinite(inc) || (res.contraction_factors.size() >= 2 &&
                                                     res.contraction_factors.back() > 1.0 &&
                                                     res.contraction_factors[res.contraction_factors.size() - 2] > 1.0 &&
                                                     inc > res.increments.front());
      if (diverging) {
        std::ostringstream msg;
        msg << "Picard iteration diverges; iterate H1 norms:";
        for (const double v : res.iterate_norms) msg << ' ' << v;
        throw NumericalError(msg.str());
      }
      if (inc <= cfg.picard_tol * std::max(1.0, res.iterate_norms.back())) break;
    }
  }
  res.phi0 = phi;
  res.control = hum_control(phi, cfg, a);

  EvolutionConfig fwd;
  fwd.dt = cfg.dt;
  fwd.t_start = 0.0;
  fwd.t_end = cfg.T;
  fwd.scheme = cfg.scheme;
  fwd.record_stride = std::numeric_limits<int>::max();
  const auto traj = evolve(u0, fwd, nullptr, &res.control);
  res.terminal_h1 = sobolev_norm(traj.back(), 1.0);
  res.certified = res.terminal_h1 <= cfg.cert_tol;
  return res;
}

GlobalControlResult global_null_control(const SpectralField& u0, double eps, const HUMConfig& cfg,
                                        const DampingProfile& a, const DampingPhase& phase) {
  check_grid(u0, a);
  if (!(eps > 0.0)) throw InvalidArgument("global control needs eps > 0");
  if (!(phase.dt > 0.0) || phase.record_stride < 1) throw InvalidArgument("invalid damping phase settings");
  GlobalControlResult res;
  Physics damped{&a, nullptr, true};
  SpectralField u = u0;
  double t = 0.0;
  auto damp_for = [&](double duration) {
    const long steps = std::max<long>(1, static_cast<long>(std::ceil(duration / phase.dt - 1e-9)));
    for (long j = 0; j < steps; ++j) {
      u = step(u, t, phase.dt, phase.scheme, damped);
      t += phase.dt;
    }
  };
  // Phase 1: first recorded time with ||u||_H1 <= eps.
  while (sobolev_norm(u, 1.0) > eps) {
    if (t > phase.max_time) {
      std::ostringstream msg;
      msg << "damping phase did not reach ||u||_H1 <= " << eps << " by t = " << phase.max_time;
      throw NumericalError(msg.str());
    }
    damp_for(phase.record_stride * phase.dt);
  }
  double wait = cfg.T;
  for (int attempt = 0;; ++attempt) {
    res.switch_time = t;
    res.switch_h1 = sobolev_norm(u, 1.0);
    std::string failure;
    try {
      res.local = local_null_control(u, cfg, a);
      if (res.local.certified) break;
      failure = "certification failed";
    } catch (const NumericalError& e) {
      failure = e.what();
    }
    if (attempt >= phase.max_retries) {
      std::ostringstream msg;
      msg << "local control failed after " << attempt << " retries at t = " << t << ": " << failure;
      throw NumericalError(msg.str());
    }
    res.retries = attempt + 1;
    damp_for(wait);
    wait *= 2.0;
  }
  res.tau = res.switch_time + cfg.T;
  return res;
}

TauScanResult tau_scan(const std::vector<double>& R_list, double eps, const SpectralField& reference,
                       const HUMConfig& cfg, const DampingProfile& a, const DampingPhase& phase) {
  if (R_list.empty()) throw InvalidArgument("tau scan needs at least one R");
  TauScanResult out;
  out.eps = eps;
  out.all_certified = true;
  for (const double R : R_list) {
    if (!(R > 0.0)) throw InvalidArgument("tau scan energies must be positive");
    const auto u0 = scale_to_energy(reference, R);
    const auto g = global_null_control(u0, eps, cfg, a, phase);
    TauSample s;
    s.R = R;
    s.tau = g.tau;
    s.switch_time = g.switch_time;
    s.terminal_h1 = g.local.terminal_h1;
    s.certified = g.local.certified;
    s.retries = g.retries;
    out.all_certified = out.all_certified && s.certified;
    out.C_fit = std::max(out.C_fit, s.tau / std::log(R + 1.0));
    out.samples.push_back(s);
  }
  // Non-decrease in R up to the phase-1 measurement granularity.
  std::vector<TauSample> sorted = out.samples;
  std::sort(sorted.begin(), sorted.end(), [](const TauSample& x, const TauSample& y) { return x.R < y.R; });
  const double granularity = phase.record_stride * phase.dt;
  out.monotone = true;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    out.monotone = out.monotone && sorted[i].tau >= sorted[i - 1].tau - granularity * (1.0 + 1e-9);
  }
  return out;
}

}  // namespace nlslab
