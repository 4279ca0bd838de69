#include "carleman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "errors.hpp"

namespace nlslab {

void CarlemanParams::validate() const {
  if (!(T > 0.0)) throw InvalidArgument("carleman T must be positive");
  if (!(m > 1.0)) throw InvalidArgument("carleman m must exceed 1");
  if (lambda < lambda0) throw InvalidArgument("carleman lambda below lambda0");
  if (s < s0) throw InvalidArgument("carleman s below s0");
}

CarlemanParams default_carleman_params(double T, double amax, double C, double m) {
  CarlemanParams p;
  p.T = T;
  p.m = m;
  p.threshold_constant = C;
  p.lambda0 = C;
  p.s0 = C * (T + T * T + T * T * amax);
  p.lambda = std::max(p.lambda0, 2.0);
  p.s = p.s0;
  return p;
}

std::vector<double> chebyshev_interior_nodes(double T, int count, double delta) {
  if (count < 2) throw InvalidArgument("need at least two time nodes");
  if (!(delta > 0.0) || !(2.0 * delta < T)) throw InvalidArgument("node margin must lie in (0, T/2)");
  std::vector<double> out(count);
  const double mid = 0.5 * T, half = 0.5 * T - delta;
  for (int j = 0; j < count; ++j) {
    out[count - 1 - j] = mid + half * std::cos(kPi * (2.0 * j + 1.0) / (2.0 * count));
  }
  return out;
}

std::array<double, 2> carleman_alpha_beta(double eta, double eta_sup, const CarlemanParams& p, double t) {
  const double denom = t * (p.T - t);
  const double e_big = std::exp(2.0 * p.lambda * p.m * eta_sup);
  const double e_x = std::exp(p.lambda * (eta + p.m * eta_sup));
  return {(e_big - e_x) / denom, e_x / denom};
}

CarlemanWeights eval_weights(const CarlemanGeometry& geom, const CarlemanParams& params,
                             const std::vector<double>& time_nodes) {
  params.validate();
  CarlemanWeights w;
  w.geom = geom;
  w.times = time_nodes;
  for (const double t : time_nodes) {
    if (!(t > 0.0 && t < params.T)) {
      std::ostringstream msg;
      msg << "carleman weights are singular at t=" << t << "; nodes must lie in (0, " << params.T << ")";
      throw InvalidArgument(msg.str());
    }
    std::vector<double> al(geom.values.size()), be(geom.values.size());
    for (std::size_t i = 0; i < geom.values.size(); ++i) {
      const auto ab = carleman_alpha_beta(geom.values[i], geom.sup_norm, params, t);
      al[i] = ab[0];
      be[i] = ab[1];
    }
    w.alpha.push_back(std::move(al));
    w.beta.push_back(std::move(be));
  }
  return w;
}

namespace {

double trapezoid_nonuniform(const std::vector<double>& t, const std::vector<double>& f) {
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < t.size(); ++j) acc += 0.5 * (t[j + 1] - t[j]) * (f[j] + f[j + 1]);
  return acc;
}

double safe_log(double v) { return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity(); }

}  // namespace

CarlemanSides carleman_sides(const Trajectory& traj, const CarlemanWeights& weights,
                             const CarlemanParams& params, const SourceTerm* g) {
  const std::size_t nodes = weights.times.size();
  if (traj.size() != nodes) throw InvalidArgument("trajectory and weight nodes differ in count");
  for (std::size_t j = 0; j < nodes; ++j) {
    if (std::abs(traj.times[j] - weights.times[j]) > 1e-12 * std::max(1.0, params.T)) {
      throw InvalidArgument("trajectory sample times do not match the weight nodes");
    }
  }
  const TorusGrid& grid = weights.geom.grid;
  const int n = grid.points_per_axis();
  const int d = grid.dim();
  const double w = grid.volume() / double(grid.size());

  std::vector<char> in_omega0(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    in_omega0[i] = region_membership(grid.point(i), weights.geom.spec, Region::omega0) ? 1 : 0;
  }

  double shift = std::numeric_limits<double>::infinity();
  for (const auto& row : weights.alpha) {
    for (const double v : row) shift = std::min(shift, 2.0 * params.s * v);
  }

  const double s = params.s, lam = params.lambda;
  std::array<std::vector<double>, 3> lhs_t, rhs_t;
  std::vector<double> g_t(nodes, 0.0);
  for (auto& v : lhs_t) v.assign(nodes, 0.0);
  for (auto& v : rhs_t) v.assign(nodes, 0.0);

  for (std::size_t j = 0; j < nodes; ++j) {
    const auto u_s = resample(traj.states[j], n);
    const auto u_p = to_physical(u_s);
    std::vector<PhysicalField> grad;
    for (int ax = 0; ax < d; ++ax) grad.push_back(to_physical(partial(u_s, ax)));
    PhysicalField g_p;
    const bool forced = g && *g;
    if (forced) g_p = to_physical(resample(g->eval(weights.times[j]), n));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double e = std::exp(-(2.0 * s * weights.alpha[j][i] - shift));
      const double b = weights.beta[j][i];
      const double m2 = std::norm(u_p[i]);
      double g2 = 0.0;
      for (int ax = 0; ax < d; ++ax) g2 += std::norm(grad[ax][i]);
      const std::array<double, 3> terms{s * s * s * lam * lam * lam * lam * e * b * b * b * m2,
                                        s * lam * e * b * g2, s * s * lam * lam * e * b * b * m2 * m2};
      for (int k = 0; k < 3; ++k) {
        lhs_t[k][j] += w * terms[k];
        if (in_omega0[i]) rhs_t[k][j] += w * terms[k];
      }
      if (forced) g_t[j] += w * e * std::norm(g_p[i]);
    }
  }

  CarlemanSides out;
  out.log_shift = shift;
  double lhs = 0.0, rhs = 0.0;
  for (int k = 0; k < 3; ++k) {
    out.lhs_terms[k] = trapezoid_nonuniform(weights.times, lhs_t[k]);
    out.rhs_terms[k + 1] = trapezoid_nonuniform(weights.times, rhs_t[k]);
    lhs += out.lhs_terms[k];
    rhs += out.rhs_terms[k + 1];
  }
  out.rhs_terms[0] = trapezoid_nonuniform(weights.times, g_t);
  rhs += out.rhs_terms[0];

  out.log_lhs = safe_log(lhs) - shift;
  out.log_rhs = safe_log(rhs) - shift;
  out.lhs = std::exp(out.log_lhs);
  out.rhs = std::exp(out.log_rhs);
  if (lhs == 0.0 && rhs == 0.0) {
    out.trivial = true;
    out.ratio = 0.0;
    out.log_ratio = -std::numeric_limits<double>::infinity();
  } else if (rhs == 0.0) {
    out.geometry_violation = true;
    out.ratio = std::numeric_limits<double>::infinity();
    out.log_ratio = std::numeric_limits<double>::infinity();
  } else {
    out.log_ratio = safe_log(lhs) - safe_log(rhs);
    out.ratio = std::exp(out.log_ratio);
  }
  return out;
}

ObservabilityResult observability_ratio(const Trajectory& traj, const DampingProfile& a) {
  if (traj.size() < 2) throw InvalidArgument("observability needs at least two samples");
  const TorusGrid& grid = traj.front().grid();
  const int m = 2 * grid.points_per_axis();
  const int d = grid.dim();
  const TorusGrid fine(d, m);
  const auto a_fine = to_physical(resample(to_spectral(a.as_field()), m));
  const double w = fine.volume() / double(fine.size());

  std::vector<double> dens(traj.size()), energies(traj.size()), four_e(traj.size()), stated(traj.size());
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const auto u_s = resample(traj.states[j], m);
    const auto u_p = to_physical(u_s);
    std::vector<PhysicalField> grad;
    for (int ax = 0; ax < d; ++ax) grad.push_back(to_physical(partial(u_s, ax)));
    double acc = 0.0;
    for (std::size_t i = 0; i < fine.size(); ++i) {
      const double m2 = std::norm(u_p[i]);
      double g2 = 0.0;
      for (int ax = 0; ax < d; ++ax) g2 += std::norm(grad[ax][i]);
      acc += a_fine[i].real() * (m2 + g2 + m2 * m2);
    }
    const auto& r = traj.energies[j];
    dens[j] = w * acc;
    energies[j] = r.E;
    four_e[j] = 4.0 * r.E;
    stated[j] = 2.0 * r.E + r.mass;
  }
  auto integrate = [&](const std::vector<double>& f) { return trapezoid_nonuniform(traj.times, f); };

  ObservabilityResult out;
  out.denominator = integrate(dens);
  const double e0 = traj.energies.front().E;
  const double emax = *std::max_element(energies.begin(), energies.end());
  const double numer = e0 + integrate(energies);
  if (out.denominator <= 0.0) {
    out.degenerate = numer == 0.0;
    out.invisible = numer != 0.0;
    return out;
  }
  out.per_t_max = emax / out.denominator;
  out.integrated = numer / out.denominator;
  const double amax = a.amax;
  const double int_4e = integrate(four_e);
  const double int_stated = integrate(stated);
  if (amax > 0.0 && int_4e > 0.0) {
    out.lower_bound = e0 / (amax * int_4e);
    out.lower_bound_holds = out.integrated >= out.lower_bound;
  }
  if (amax > 0.0 && int_stated > 0.0) {
    out.stated_lower_bound = e0 / (amax * int_stated);
    out.stated_lower_bound_holds = out.integrated >= out.stated_lower_bound;
  }
  return out;
}

CorpusConstant corpus_constant(const std::vector<CarlemanSides>& runs) {
  if (runs.empty()) throw InvalidArgument("empty carleman corpus");
  CorpusConstant c;
  c.log_c_emp = -std::numeric_limits<double>::infinity();
  for (const auto& r : runs) {
    if (r.geometry_violation) throw VerificationError("carleman corpus entry violates the geometry (rhs = 0)");
    c.log_ratios.push_back(r.log_ratio);
    c.log_c_emp = std::max(c.log_c_emp, r.log_ratio);
  }
  c.c_emp = std::exp(c.log_c_emp);
  return c;
}

}  // namespace nlslab
