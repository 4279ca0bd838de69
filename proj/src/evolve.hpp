#pragma once

// Time integration of
//   i u_t = -Delta u + |u|^2 u - i a(x) u + g(t, x)
// and of its linear part (cubic and damping terms disabled).

#include <functional>
#include <optional>
#include <vector>

#include "geometry.hpp"
#include "torus.hpp"

namespace nlslab {

enum class Scheme { strang2, rk4ei };
enum class Direction { forward, backward };

struct EvolutionConfig {
  double dt = 1e-3;
  double t_start = 0.0;
  double t_end = 1.0;
  Scheme scheme = Scheme::strang2;
  int record_stride = 1;
  Direction direction = Direction::forward;

  void validate() const;
  /// Number of steps; the step is shrunk so the end time is hit exactly.
  long num_steps() const;
  /// Signed step actually taken.
  double signed_step() const;
};

/// dt = min(1e-3, 0.5 / max |k|^2).
double default_time_step(const TorusGrid& grid);

struct SourceTerm {
  std::function<SpectralField(double)> eval;
  bool supported_in_omega = false;

  explicit operator bool() const { return static_cast<bool>(eval); }
};

struct EnergyRecord {
  double t = 0.0;
  double mass = 0.0;
  double grad_energy = 0.0;
  double quartic = 0.0;
  double E = 0.0;
  double E_tilde = 0.0;
  double tilde_coefficient = 0.0;
};

EnergyRecord energy_record(const SpectralField& u, double t, double tilde_coefficient = 0.0);

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> states;
  std::vector<EnergyRecord> energies;

  std::size_t size() const { return times.size(); }
  const SpectralField& back() const { return states.back(); }
  const SpectralField& front() const { return states.front(); }
  /// Index of the recorded sample at time t (within 1e-12 relative), if any.
  std::optional<std::size_t> index_of(double t) const;
};

/// Exact pointwise flow of u_t = -i |u|^2 u - a u over dt.
PhysicalField nonlinear_damped_substep(const PhysicalField& u, std::span<const double> a, double dt);
PhysicalField nonlinear_damped_substep(const PhysicalField& u, const DampingProfile& a, double dt);

/// What the integrator is allowed to include.
struct Physics {
  const DampingProfile* damping = nullptr;  // nullptr: a = 0
  const SourceTerm* source = nullptr;       // nullptr: g = 0
  bool cubic = true;
};

/// One step of size dt (negative for backward) from time t.
SpectralField step(const SpectralField& u, double t, double dt, Scheme scheme, const Physics& phys);

Trajectory evolve(const SpectralField& u0, const EvolutionConfig& cfg, const DampingProfile* a,
                  const SourceTerm* g);
/// Linear problem i u_t = -Delta u + g, forward or backward (terminal value).
Trajectory evolve_linear(const SpectralField& u0, const EvolutionConfig& cfg, const SourceTerm* g);
/// Full physics, recording only at the requested increasing times (the first
/// may equal t0). Steps between consecutive requested times are at most dt_max.
Trajectory evolve_to_times(const SpectralField& u0, double t0, const std::vector<double>& times,
                           double dt_max, Scheme scheme, const Physics& phys);

bool is_blowup_growth(double mass_before, double mass_after, double dt, double source_mass);

}  // namespace nlslab
