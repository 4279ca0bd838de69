#pragma once

// Scenario files: an INI-style file with sections [scenario] [geometry]
// [evolution] [initial] [carleman] [hum] [control] [decay] [bourgain]
// [output]. Every key is optional; missing keys take the defaults below.

#include <cstdint>
#include <string>
#include <vector>

#include "bourgain.hpp"
#include "carleman.hpp"
#include "control.hpp"
#include "evolve.hpp"
#include "geometry.hpp"

namespace nlslab {

inline constexpr std::uint64_t kDefaultSeed = 20240917;

struct GeometrySection {
  int d = 1;
  int n = 64;
  double eps = 1.0;
  double eps0 = 0.5;
  double a0 = 1.0;
  double amax = 1.0;
  double sharpness = kDefaultSharpness;
};

struct EvolutionSection {
  double dt = 0.0;  // 0: default_time_step
  double T = 2.0;
  Scheme scheme = Scheme::strang2;
  int record_stride = 1;
  int snapshot_stride = 0;  // 0: no snapshots
};

enum class Preset { plane_wave, constant, random_smooth, rescaled_to_energy };

struct InitialSection {
  Preset preset = Preset::random_smooth;
  Preset base = Preset::random_smooth;  // for rescaled_to_energy
  double A = 1.0;
  std::vector<int> k{1};
  std::uint64_t seed = 0;  // 0: scenario seed
  int band = 0;            // 0: n/3
  double h1_target = 0.0;  // 0: keep the raw amplitude
  double E_target = 1.0;
};

struct CarlemanSection {
  double lambda = 0.0;  // 0: max(lambda0, 2)
  double s = 0.0;       // 0: s0
  double m = 2.0;
  double T = 1.0;
  double C = 1.0;
  int nodes = 128;
  int corpus = 5;
  double eta_scale = 0.0;  // 0: default_eta_scale(d)
  double margin = 0.0;     // 0: T/64
};

struct HumSection {
  HUMConfig cfg;
};

struct ControlSection {
  double eps = 1e-2;
  std::vector<double> R_list{1.0, 10.0, 100.0};
  DampingPhase phase;
};

struct DecaySection {
  std::vector<double> energies{0.1, 1.0, 10.0};
  double window_start = 1.0;
  double window_end = 0.0;  // 0: evolution T
};

struct BourgainSection {
  double s = 1.0;
  double bprime = 0.375;
  int samples = 100;
  int time_samples = 32;
  int time_band = 2;
  double T = 1.0;
};

struct OutputSection {
  std::string dir = "out";
  bool series = true;
  bool snapshots = true;
};

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = kDefaultSeed;
  GeometrySection geometry;
  EvolutionSection evolution;
  InitialSection initial;
  CarlemanSection carleman;
  HumSection hum;
  ControlSection control;
  DecaySection decay;
  BourgainSection bourgain;
  OutputSection output;

  OmegaSpec omega() const { return {geometry.d, geometry.eps, geometry.eps0}; }
  TorusGrid grid() const { return {geometry.d, geometry.n}; }
  double time_step() const;
  /// Throws ConfigError naming the offending key(s).
  void validate() const;
};

/// Throws ConfigError for unreadable files, unknown keys or bad values.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text);
/// Every key, fixed order, exact (round-trippable) numbers.
std::string serialize_scenario(const Scenario& s);
/// serialize(parse(text)).
std::string normalize_scenario(const std::string& text);

const char* preset_name(Preset p);
const char* scheme_name(Scheme s);

/// Initial data for run index `member` (0 for single runs). Random presets
/// use seed + member so corpora differ run to run.
SpectralField initial_data(const Scenario& s, std::uint64_t member = 0);
/// Random smooth profile with coefficients e^{-|k|} times complex Gaussians
/// on the modes with every |k_i| <= band.
SpectralField random_smooth(const TorusGrid& grid, int band, std::uint64_t seed);

DampingProfile scenario_damping(const Scenario& s);

}  // namespace nlslab
