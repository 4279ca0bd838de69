#pragma once

// Carleman weights alpha, beta built on eta, both sides of the weighted
// estimate evaluated on computed trajectories, and observability ratios.
//
// The weights are exponentially large; every weighted integral is carried in
// log form relative to the smallest 2 s alpha on the space-time sample.

#include <array>
#include <vector>

#include "evolve.hpp"
#include "geometry.hpp"

namespace nlslab {

struct CarlemanParams {
  double lambda = 2.0;
  double s = 0.0;
  double m = 2.0;
  double T = 1.0;
  double lambda0 = 1.0;
  double s0 = 0.0;
  double threshold_constant = 1.0;  // C in lambda0 = C, s0 = C (T + T^2 + T^2 |a|_inf)

  void validate() const;
};

/// lambda = max(lambda0, 2), s = s0, with lambda0 = C and s0 = C (T + T^2 + T^2 amax).
CarlemanParams default_carleman_params(double T, double amax, double C = 1.0, double m = 2.0);

/// N Chebyshev points of the first kind mapped to [delta, T - delta], increasing.
std::vector<double> chebyshev_interior_nodes(double T, int count, double delta);
inline double default_node_margin(double T) { return T / 64.0; }

struct CarlemanWeights {
  CarlemanGeometry geom;
  std::vector<double> times;
  std::vector<std::vector<double>> alpha;  // [node][grid point]
  std::vector<std::vector<double>> beta;

  double alpha_at(std::size_t node, std::size_t point) const { return alpha[node][point]; }
};

/// Pointwise alpha, beta at one (t, eta) pair.
std::array<double, 2> carleman_alpha_beta(double eta, double eta_sup, const CarlemanParams& p, double t);

/// Throws InvalidArgument for nodes outside the open interval (0, T).
CarlemanWeights eval_weights(const CarlemanGeometry& geom, const CarlemanParams& params,
                             const std::vector<double>& time_nodes);

struct CarlemanSides {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double log_lhs = 0.0;  // -inf when lhs = 0
  double log_rhs = 0.0;
  double log_ratio = 0.0;
  double log_shift = 0.0;  // min 2 s alpha over the sample
  std::array<double, 3> lhs_terms{};  // scaled by e^{log_shift}
  std::array<double, 4> rhs_terms{};  // g term, then the three omega0 terms
  bool geometry_violation = false;    // rhs = 0 while lhs > 0
  bool trivial = false;               // lhs = rhs = 0
};

/// The trajectory must be sampled exactly at weights.times. Spatial sums run
/// on the weights' grid (states are resampled to it); gradients are spectral.
CarlemanSides carleman_sides(const Trajectory& traj, const CarlemanWeights& weights,
                             const CarlemanParams& params, const SourceTerm* g);

struct ObservabilityResult {
  double per_t_max = 0.0;
  double integrated = 0.0;
  double denominator = 0.0;  // int_0^T int a (|u|^2 + |grad u|^2 + |u|^4)
  bool degenerate = false;   // 0 / 0
  bool invisible = false;    // zero denominator with nonzero energy
  double lower_bound = 0.0;  // E(0) / (|a|_inf int 4E)
  bool lower_bound_holds = false;
  double stated_lower_bound = 0.0;  // E(0) / (|a|_inf int (2E + mass))
  bool stated_lower_bound_holds = false;
};

ObservabilityResult observability_ratio(const Trajectory& traj, const DampingProfile& a);

/// Maximum carleman log-ratio over a corpus; the empirical constant is its exp.
struct CorpusConstant {
  double log_c_emp = 0.0;
  double c_emp = 0.0;
  std::vector<double> log_ratios;
};
CorpusConstant corpus_constant(const std::vector<CarlemanSides>& runs);

}  // namespace nlslab
