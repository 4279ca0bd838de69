#include "evolve.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "errors.hpp"

namespace nlslab {

void EvolutionConfig::validate() const {
  if (!(dt > 0.0)) throw InvalidArgument("evolution dt must be positive");
  if (t_end == t_start) throw InvalidArgument("evolution needs t_end != t_start");
  if (record_stride < 1) throw InvalidArgument("record_stride must be >= 1");
  const bool backward = t_end < t_start;
  if (backward != (direction == Direction::backward)) {
    throw InvalidArgument("evolution direction disagrees with the sign of t_end - t_start");
  }
}

long EvolutionConfig::num_steps() const {
  const double span = std::abs(t_end - t_start);
  return std::max<long>(1, static_cast<long>(std::ceil(span / dt - 1e-9)));
}

double EvolutionConfig::signed_step() const { return (t_end - t_start) / double(num_steps()); }

double default_time_step(const TorusGrid& grid) {
  return std::min(1e-3, 0.5 / grid.max_k_squared());
}

EnergyRecord energy_record(const SpectralField& u, double t, double tilde_coefficient) {
  EnergyRecord r;
  r.t = t;
  r.mass = mass(u);
  r.grad_energy = grad_energy(u);
  r.quartic = quartic(u);
  r.E = 0.5 * r.mass + 0.5 * r.grad_energy + 0.25 * r.quartic;
  r.tilde_coefficient = tilde_coefficient;
  r.E_tilde = r.E + tilde_coefficient * r.mass;
  return r;
}

std::optional<std::size_t> Trajectory::index_of(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return i;
  }
  return std::nullopt;
}

// The a -> 0 limit of the phase formula is switched in below this rate.
static constexpr double kSmallDamping = 1e-12;

PhysicalField nonlinear_damped_substep(const PhysicalField& u, std::span<const double> a, double dt) {
  PhysicalField out = u;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const cplx v = out[i];
    const double m2 = std::norm(v);
    const double ai = a.empty() ? 0.0 : a[i];
    double decay, phase;
    if (std::abs(ai) < kSmallDamping) {
      decay = 1.0;
      phase = -m2 * dt;
    } else {
      decay = std::exp(-ai * dt);
      phase = -m2 * (-std::expm1(-2.0 * ai * dt)) / (2.0 * ai);
    }
    out[i] = v * decay * std::polar(1.0, phase);
  }
  return out;
}

PhysicalField nonlinear_damped_substep(const PhysicalField& u, const DampingProfile& a, double dt) {
  return nonlinear_damped_substep(u, std::span<const double>(a.values), dt);
}

bool is_blowup_growth(double mass_before, double mass_after, double dt, double source_mass) {
  // Defocusing cubic + nonnegative damping cannot grow the mass beyond the
  // source contribution; 10% headroom in mass.
  const double allowed = std::sqrt(1.1) * (std::sqrt(mass_before) + std::abs(dt) * std::sqrt(source_mass));
  return std::sqrt(mass_after) > allowed * (1.0 + 1e-12) + 1e-150;
}

namespace {

struct StepOutput {
  SpectralField u;
  double source_mass = 0.0;
};

std::span<const double> damping_span(const Physics& phys) {
  return phys.damping ? std::span<const double>(phys.damping->values) : std::span<const double>();
}

// Pointwise increment of the local (cubic + damping) flow over dt, dealiased
// when the cubic term is active.
SpectralField local_increment(const SpectralField& w, double dt, const Physics& phys) {
  const auto phys_w = to_physical(w);
  PhysicalField advanced(w.grid());
  if (phys.cubic) {
    advanced = nonlinear_damped_substep(phys_w, damping_span(phys), dt);
  } else {
    advanced = phys_w;
    const auto a = damping_span(phys);
    for (std::size_t i = 0; i < advanced.size(); ++i) advanced[i] *= std::exp(-a[i] * dt);
  }
  auto inc = to_spectral(advanced) - w;
  return phys.cubic ? dealias(inc) : inc;
}

// Right-hand side of the interaction-free part: -i |u|^2 u - a u - i g.
SpectralField local_rhs(const SpectralField& u, double t, const Physics& phys, double* source_mass) {
  SpectralField out(u.grid());
  if (phys.cubic || phys.damping) {
    auto p = to_physical(u);
    const auto a = damping_span(phys);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const cplx v = p[i];
      cplx r = 0.0;
      if (phys.cubic) r += cplx(0.0, -1.0) * std::norm(v) * v;
      if (!a.empty()) r -= a[i] * v;
      p[i] = r;
    }
    out = to_spectral(p);
    if (phys.cubic) out = dealias(out);
  }
  if (phys.source && *phys.source) {
    const auto g = phys.source->eval(t);
    if (source_mass) *source_mass = std::max(*source_mass, mass(g));
    out -= cplx(0.0, 1.0) * g;
  }
  return out;
}

StepOutput step_impl(const SpectralField& u, double t, double dt, Scheme scheme, const Physics& phys) {
  StepOutput out;
  const bool local = phys.cubic || phys.damping;
  if (scheme == Scheme::strang2) {
    auto w = free_propagator(u, 0.5 * dt);
    const bool forced = phys.source && *phys.source;
    SpectralField g;
    if (forced) {
      g = phys.source->eval(t + 0.5 * dt);
      out.source_mass = mass(g);
    }
    // The midpoint source is split around the local substep so the
    // cubic-source coupling stays second order.
    if (forced && local) w -= cplx(0.0, 0.5 * dt) * g;
    if (local) w += local_increment(w, dt, phys);
    if (forced) w -= cplx(0.0, local ? 0.5 * dt : dt) * g;
    out.u = free_propagator(w, 0.5 * dt);
    return out;
  }
  // Integrating-factor RK4 in the interaction picture of e^{it Delta}.
  const double h = dt;
  double* sm = &out.source_mass;
  const auto k1 = local_rhs(u, t, phys, sm);
  const auto u_half = free_propagator(u, 0.5 * h);
  const auto k1_half = free_propagator(k1, 0.5 * h);
  const auto k2 = local_rhs(u_half + (0.5 * h) * k1_half, t + 0.5 * h, phys, sm);
  const auto k3 = local_rhs(u_half + (0.5 * h) * k2, t + 0.5 * h, phys, sm);
  const auto k4 = local_rhs(free_propagator(u, h) + h * free_propagator(k3, 0.5 * h), t + h, phys, sm);
  auto next = free_propagator(u + (h / 6.0) * k1, h);
  next += free_propagator((h / 3.0) * (k2 + k3), 0.5 * h);
  next += (h / 6.0) * k4;
  out.u = std::move(next);
  return out;
}

SpectralField guarded_step(const SpectralField& u, double t, double dt, Scheme scheme, const Physics& phys) {
  auto out = step_impl(u, t, dt, scheme, phys);
  const double m_before = mass(u);
  const double m_after = mass(out.u);
  if (!out.u.is_finite() || is_blowup_growth(m_before, m_after, dt, out.source_mass)) {
    std::ostringstream msg;
    msg << "blow-up guard tripped at t=" << t << " (mass " << m_before << " -> " << m_after
        << ", dt=" << dt << ")";
    throw NumericalError(msg.str());
  }
  return std::move(out.u);
}

Trajectory run(const SpectralField& u0, const EvolutionConfig& cfg, const Physics& phys) {
  cfg.validate();
  const long steps = cfg.num_steps();
  const double h = cfg.signed_step();
  Trajectory traj;
  auto record = [&](double t, const SpectralField& u) {
    traj.times.push_back(t);
    traj.states.push_back(u);
    traj.energies.push_back(energy_record(u, t));
  };
  SpectralField u = u0;
  record(cfg.t_start, u);
  for (long j = 1; j <= steps; ++j) {
    const double t = cfg.t_start + double(j - 1) * h;
    u = guarded_step(u, t, h, cfg.scheme, phys);
    if (j % cfg.record_stride == 0 || j == steps) {
      record(j == steps ? cfg.t_end : cfg.t_start + double(j) * h, u);
    }
  }
  return traj;
}

}  // namespace

SpectralField step(const SpectralField& u, double t, double dt, Scheme scheme, const Physics& phys) {
  return guarded_step(u, t, dt, scheme, phys);
}

Trajectory evolve(const SpectralField& u0, const EvolutionConfig& cfg, const DampingProfile* a,
                  const SourceTerm* g) {
  Physics phys;
  phys.damping = a;
  phys.source = g;
  phys.cubic = true;
  return run(u0, cfg, phys);
}

Trajectory evolve_linear(const SpectralField& u0, const EvolutionConfig& cfg, const SourceTerm* g) {
  Physics phys;
  phys.source = g;
  phys.cubic = false;
  return run(u0, cfg, phys);
}

Trajectory evolve_to_times(const SpectralField& u0, double t0, const std::vector<double>& times,
                           double dt_max, Scheme scheme, const Physics& phys) {
  if (!(dt_max > 0.0)) throw InvalidArgument("dt_max must be positive");
  Trajectory traj;
  SpectralField u = u0;
  double t = t0;
  for (const double target : times) {
    if (target < t) throw InvalidArgument("requested sample times must be nondecreasing");
    const double span = target - t;
    if (span > 0.0) {
      const long m = std::max<long>(1, static_cast<long>(std::ceil(span / dt_max - 1e-9)));
      const double h = span / double(m);
      for (long j = 0; j < m; ++j) u = guarded_step(u, t + double(j) * h, h, scheme, phys);
      t = target;
    }
    traj.times.push_back(target);
    traj.states.push_back(u);
    traj.energies.push_back(energy_record(u, target));
  }
  return traj;
}

}  // namespace nlslab
