#include "diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "errors.hpp"

namespace nlslab {

namespace {

// Real field interpolated to the 2x grid via its trigonometric interpolant.
std::vector<double> pad_real(const PhysicalField& f) {
  const auto padded = to_physical(resample(to_spectral(f), 2 * f.grid().points_per_axis()));
  std::vector<double> out(padded.size());
  for (std::size_t i = 0; i < padded.size(); ++i) out[i] = padded[i].real();
  return out;
}

struct PaddedContext {
  TorusGrid fine;
  std::vector<double> a;                         // empty when a = 0
  std::vector<double> P;                         // empty when no multiplier
  std::vector<std::vector<double>> grad_P;

  PaddedContext(const TorusGrid& grid, const DampingProfile* damping, const PhysicalField* mult)
      : fine(grid.dim(), 2 * grid.points_per_axis()) {
    if (damping) a = pad_real(damping->as_field());
    if (mult) {
      const auto spec = to_spectral(*mult);
      P = pad_real(*mult);
      for (int ax = 0; ax < grid.dim(); ++ax) {
        grad_P.push_back(pad_real(to_physical(partial(spec, ax))));
      }
    }
  }
};

IdentityTerms terms_at(const SpectralField& u, double t, const PaddedContext& ctx, const SourceTerm* g) {
  const int m = ctx.fine.points_per_axis();
  const int d = ctx.fine.dim();
  const auto u_p = to_physical(resample(u, m));
  const auto lap_p = to_physical(resample(laplacian(u), m));
  std::vector<PhysicalField> grad_p;
  for (int ax = 0; ax < d; ++ax) grad_p.push_back(to_physical(resample(partial(u, ax), m)));
  PhysicalField g_p(ctx.fine);
  const bool forced = g && *g;
  if (forced) g_p = to_physical(resample(g->eval(t), m));

  std::vector<std::vector<double>> grad_mod2;
  if (!ctx.P.empty()) {
    PhysicalField mod2(ctx.fine);
    for (std::size_t i = 0; i < mod2.size(); ++i) mod2[i] = std::norm(u_p[i]);
    const auto mod2_s = to_spectral(mod2);
    for (int ax = 0; ax < d; ++ax) {
      const auto gp = to_physical(partial(mod2_s, ax));
      std::vector<double> v(gp.size());
      for (std::size_t i = 0; i < gp.size(); ++i) v[i] = gp[i].real();
      grad_mod2.push_back(std::move(v));
    }
  }

  const cplx I(0.0, 1.0);
  IdentityTerms out;
  out.t = t;
  const double w = ctx.fine.volume() / double(ctx.fine.size());
  for (std::size_t i = 0; i < ctx.fine.size(); ++i) {
    const cplx v = u_p[i];
    const double m2 = std::norm(v);
    const double ai = ctx.a.empty() ? 0.0 : ctx.a[i];
    const cplx gi = forced ? g_p[i] : cplx(0.0);
    // u_t = i Delta u - i |u|^2 u - a u - i g
    const cplx ut = I * lap_p[i] - I * m2 * v - ai * v - I * gi;
    const double im_u_ut = std::imag(v * std::conj(ut));
    out.damp_mass += ai * m2;
    out.forcing_mass += std::imag(gi * std::conj(v));
    out.damp_energy += ai * im_u_ut;
    out.forcing_energy += std::real(gi * std::conj(ut));
    if (!ctx.P.empty()) {
      double grad2 = 0.0, gp_dot = 0.0;
      for (int ax = 0; ax < d; ++ax) {
        grad2 += std::norm(grad_p[ax][i]);
        gp_dot += ctx.grad_P[ax][i] * grad_mod2[ax][i];
      }
      out.morawetz_lhs += (im_u_ut - grad2 - m2 * m2) * ctx.P[i];
      out.morawetz_rhs += 0.5 * gp_dot + std::real(gi * ctx.P[i] * std::conj(v));
    }
  }
  out.damp_mass *= w;
  out.forcing_mass *= w;
  out.damp_energy *= w;
  out.forcing_energy *= w;
  out.morawetz_lhs *= w;
  out.morawetz_rhs *= w;
  return out;
}

std::pair<std::size_t, std::size_t> sample_range(const Trajectory& traj, double t, double t_prime) {
  const auto i0 = traj.index_of(t);
  const auto i1 = traj.index_of(t_prime);
  if (!i0 || !i1) {
    std::ostringstream msg;
    msg << "identity endpoints t=" << t << ", t'=" << t_prime << " are not recorded times";
    throw InvalidArgument(msg.str());
  }
  return {std::min(*i0, *i1), std::max(*i0, *i1)};
}

template <class F>
double trapezoid(const Trajectory& traj, std::size_t i0, std::size_t i1, F&& f) {
  double acc = 0.0;
  for (std::size_t j = i0; j < i1; ++j) {
    acc += 0.5 * (traj.times[j + 1] - traj.times[j]) * (f(j) + f(j + 1));
  }
  return acc;
}

double nonlinear_energy(const EnergyRecord& r) { return 0.5 * r.grad_energy + 0.25 * r.quartic; }

}  // namespace

double energy_scale_factor(const SpectralField& u, double target) {
  if (!(target >= 0.0)) throw InvalidArgument("target energy must be nonnegative");
  if (target == 0.0) return 0.0;
  const auto r = total_energy(u);
  const double lin = 0.5 * (r.mass + r.grad_energy);
  const double quart = 0.25 * r.quartic;
  if (!(lin > 0.0)) throw InvalidArgument("cannot rescale a zero field to positive energy");
  // quart x^2 + lin x - target = 0 in x = c^2, in the cancellation-free form.
  const double x = 2.0 * target / (lin + std::sqrt(lin * lin + 4.0 * quart * target));
  return std::sqrt(x);
}

SpectralField scale_to_energy(const SpectralField& u, double target) {
  return cplx(energy_scale_factor(u, target)) * u;
}

IdentityTerms identity_terms(const SpectralField& u, double t, const DampingProfile* a,
                             const SourceTerm* g, const PhysicalField* P) {
  const PaddedContext ctx(u.grid(), a, P);
  return terms_at(u, t, ctx, g);
}

std::vector<IdentityTerms> identity_terms(const Trajectory& traj, const DampingProfile* a,
                                          const SourceTerm* g, const PhysicalField* P) {
  std::vector<IdentityTerms> out;
  if (traj.size() == 0) return out;
  const PaddedContext ctx(traj.front().grid(), a, P);
  out.reserve(traj.size());
  for (std::size_t j = 0; j < traj.size(); ++j) out.push_back(terms_at(traj.states[j], traj.times[j], ctx, g));
  return out;
}

double l2_identity_residual(const Trajectory& traj, const DampingProfile* a, const SourceTerm* g,
                            double t, double t_prime) {
  const auto [i0, i1] = sample_range(traj, t, t_prime);
  const auto terms = identity_terms(traj, a, g, nullptr);
  const double lhs = 0.5 * traj.energies[i1].mass - 0.5 * traj.energies[i0].mass;
  const double rhs = trapezoid(traj, i0, i1, [&](std::size_t j) {
    return -terms[j].damp_mass + terms[j].forcing_mass;
  });
  return std::abs(lhs - rhs);
}

double energy_identity_residual(const Trajectory& traj, const DampingProfile* a, const SourceTerm* g,
                                double t, double t_prime) {
  const auto [i0, i1] = sample_range(traj, t, t_prime);
  const auto terms = identity_terms(traj, a, g, nullptr);
  const double lhs = nonlinear_energy(traj.energies[i1]) - nonlinear_energy(traj.energies[i0]);
  const double rhs = trapezoid(traj, i0, i1, [&](std::size_t j) {
    return -terms[j].damp_energy - terms[j].forcing_energy;
  });
  return std::abs(lhs - rhs);
}

double morawetz_residual(const Trajectory& traj, const PhysicalField& P, const DampingProfile* a,
                         const SourceTerm* g, double t, double t_prime) {
  const auto [i0, i1] = sample_range(traj, t, t_prime);
  const bool zero_multiplier =
      std::all_of(P.values().begin(), P.values().end(), [](const cplx& v) { return v == cplx(0.0); });
  if (zero_multiplier) return 0.0;
  const auto terms = identity_terms(traj, a, g, &P);
  const double lhs = trapezoid(traj, i0, i1, [&](std::size_t j) { return terms[j].morawetz_lhs; });
  const double rhs = trapezoid(traj, i0, i1, [&](std::size_t j) { return terms[j].morawetz_rhs; });
  return std::abs(lhs - rhs);
}

ResidualSeries residual_series(const Trajectory& traj, const DampingProfile* a, const SourceTerm* g,
                               const PhysicalField* P) {
  ResidualSeries out;
  const std::size_t n = traj.size();
  if (n == 0) return out;
  const auto terms = identity_terms(traj, a, g, P);
  double l2_rhs = 0.0, en_rhs = 0.0, mor_l = 0.0, mor_r = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0) {
      const double h = 0.5 * (traj.times[j] - traj.times[j - 1]);
      l2_rhs += h * (-terms[j - 1].damp_mass + terms[j - 1].forcing_mass - terms[j].damp_mass +
                     terms[j].forcing_mass);
      en_rhs += h * (-terms[j - 1].damp_energy - terms[j - 1].forcing_energy - terms[j].damp_energy -
                     terms[j].forcing_energy);
      mor_l += h * (terms[j - 1].morawetz_lhs + terms[j].morawetz_lhs);
      mor_r += h * (terms[j - 1].morawetz_rhs + terms[j].morawetz_rhs);
    }
    out.l2.push_back(std::abs(0.5 * (traj.energies[j].mass - traj.energies[0].mass) - l2_rhs));
    out.energy.push_back(
        std::abs(nonlinear_energy(traj.energies[j]) - nonlinear_energy(traj.energies[0]) - en_rhs));
    out.morawetz.push_back(P ? std::abs(mor_l - mor_r) : 0.0);
  }
  return out;
}

GronwallResult gronwall_check(const Trajectory& traj, const SourceTerm* g, double constant) {
  GronwallResult out;
  out.constant = constant;
  if (traj.size() == 0) return out;
  double gnorm = 0.0;
  if (g && *g) {
    std::vector<double> h1(traj.size());
    for (std::size_t j = 0; j < traj.size(); ++j) {
      const double v = sobolev_norm(g->eval(traj.times[j]), 1.0);
      h1[j] = v * v;
    }
    gnorm = std::abs(trapezoid(traj, 0, traj.size() - 1, [&](std::size_t j) { return h1[j]; }));
  }
  out.forcing_norm_sq = gnorm;
  const double bound = constant * (traj.energies.front().E + gnorm + gnorm * gnorm);
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& r : traj.energies) margin = std::min(margin, bound - r.E);
  out.margin = margin;
  out.holds = margin >= 0.0;
  return out;
}

std::pair<double, double> default_decay_window(double T) { return {std::min(1.0, T), T}; }

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit least_squares(const std::vector<std::pair<double, double>>& pts) {
  const double n = double(pts.size());
  double sx = 0, sy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (const auto& [x, y] : pts) {
    const double r = y - (f.intercept + f.slope * x);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

}  // namespace

DecayFit fit_decay(const std::vector<EnergyRecord>& records, std::pair<double, double> window) {
  if (records.empty()) throw InvalidArgument("decay fit needs records");
  const double t0 = records.front().t;
  const double e0 = records.front().E;
  if (!(e0 > 0.0)) throw NumericalError("decay fit needs E(t0) > 0");
  DecayFit fit;
  fit.t_a = window.first;
  fit.t_b = window.second;
  std::vector<std::pair<double, double>> pts;
  std::vector<const EnergyRecord*> used;
  for (const auto& r : records) {
    const double t = r.t - t0;
    if (t < window.first - 1e-12 || t > window.second + 1e-12) continue;
    if (!(r.E > 0.0)) {
      fit.positive_prefix = true;
      break;
    }
    pts.emplace_back(t, std::log(r.E / e0));
    used.push_back(&r);
  }
  if (pts.size() < 10) {
    std::ostringstream msg;
    msg << "decay fit needs >= 10 positive records in the window, got " << pts.size();
    throw NumericalError(msg.str());
  }
  const auto line = least_squares(pts);
  fit.gamma = -line.slope;
  fit.intercept = std::exp(line.intercept);
  fit.residual = line.rms;
  fit.samples = pts.size();
  double c = 1.0;
  for (const auto& [t, logratio] : pts) c = std::max(c, std::exp(logratio + fit.gamma * t));
  fit.C = c;
  return fit;
}

DecayFit cover_fit(const std::vector<std::vector<EnergyRecord>>& runs, std::pair<double, double> window) {
  if (runs.empty()) throw InvalidArgument("cover fit needs at least one run");
  std::vector<std::pair<double, double>> pts;
  for (const auto& run : runs) {
    const double t0 = run.front().t;
    const double e0 = run.front().E;
    if (!(e0 > 0.0)) throw NumericalError("cover fit needs E(t0) > 0 for every run");
    for (const auto& r : run) {
      const double t = r.t - t0;
      if (t < window.first - 1e-12 || t > window.second + 1e-12 || !(r.E > 0.0)) continue;
      pts.emplace_back(t, std::log(r.E / e0));
    }
  }
  if (pts.size() < 10) throw NumericalError("cover fit needs >= 10 positive records");
  const auto line = least_squares(pts);
  DecayFit fit;
  fit.t_a = window.first;
  fit.t_b = window.second;
  fit.gamma = -line.slope;
  fit.intercept = std::exp(line.intercept);
  fit.residual = line.rms;
  fit.samples = pts.size();
  double c = 1.0;
  for (const auto& run : runs) {
    const double t0 = run.front().t;
    const double e0 = run.front().E;
    for (const auto& r : run) c = std::max(c, r.E / e0 * std::exp(fit.gamma * (r.t - t0)));
  }
  fit.C = c;
  return fit;
}

}  // namespace nlslab
