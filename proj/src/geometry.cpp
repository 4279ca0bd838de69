#include "geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "errors.hpp"

namespace nlslab {

void OmegaSpec::validate() const {
  if (d < 1 || d > 3) throw InvalidArgument("geometry dimension must be 1, 2 or 3");
  if (!(eps0 > 0.0 && eps0 < eps && eps < kTwoPi)) {
    std::ostringstream msg;
    msg << "geometry requires 0 < eps0 < eps < 2pi (eps0=" << eps0 << ", eps=" << eps << ")";
    throw InvalidArgument(msg.str());
  }
}

double face_distance(double x) {
  double xm = std::fmod(x, kTwoPi);
  if (xm < 0.0) xm += kTwoPi;
  return std::min(xm, kTwoPi - xm);
}

namespace {

// Sign of d(face_distance)/dx; zero at the two non-smooth points, where
// every profile built from face_distance is locally constant.
double face_distance_slope(double x) {
  double xm = std::fmod(x, kTwoPi);
  if (xm < 0.0) xm += kTwoPi;
  if (xm == 0.0 || xm == kPi) return 0.0;
  return xm < kPi ? 1.0 : -1.0;
}

double wrap(double x) {
  double xm = std::fmod(x, kTwoPi);
  if (xm < 0.0) xm += kTwoPi;
  return xm;
}

double region_width(const OmegaSpec& spec, Region which) {
  switch (which) {
    case Region::omega: return spec.eps;
    case Region::omega0: return spec.eps0;
    case Region::omega1: return 0.5 * spec.eps0;
  }
  return 0.0;
}

}  // namespace

bool region_membership(const Point& x, const OmegaSpec& spec, Region which) {
  const double w = region_width(spec, which);
  for (int a = 0; a < spec.d; ++a) {
    if (face_distance(x[a]) < w) return true;
  }
  return false;
}

double smooth_step(double y) {
  if (y <= 0.0) return 0.0;
  if (y >= 1.0) return 1.0;
  const double f = std::exp(-1.0 / y);
  const double h = std::exp(-1.0 / (1.0 - y));
  return f / (f + h);
}

std::array<double, 3> smooth_step_derivatives(double y) {
  if (y <= 0.0) return {0.0, 0.0, 0.0};
  if (y >= 1.0) return {1.0, 0.0, 0.0};
  // g(y) = exp(-1/y), h(y) = g(1-y); S = g / (g + h).
  const double z = 1.0 - y;
  const double g = std::exp(-1.0 / y);
  const double g1 = g / (y * y);
  const double g2 = g * (1.0 - 2.0 * y) / (y * y * y * y);
  const double h = std::exp(-1.0 / z);
  const double h1 = -h / (z * z);
  const double h2 = h * (1.0 - 2.0 * z) / (z * z * z * z);
  const double den = g + h;
  const double num = g1 * h - g * h1;
  const double num1 = g2 * h - g * h2;
  const double den1 = g1 + h1;
  return {g / den, num / (den * den), (num1 * den - 2.0 * num * den1) / (den * den * den)};
}

// ---------------------------------------------------------------------------
// Damping

namespace {

struct Bump {
  double value;
  double slope;
};

Bump plateau(const OmegaSpec& spec, double x) {
  const double width = spec.eps - spec.eps0;
  const double y = (face_distance(x) - spec.eps0) / width;
  const auto s = smooth_step_derivatives(y);
  return {1.0 - s[0], -s[1] / width * face_distance_slope(x)};
}

}  // namespace

double damping_value(const OmegaSpec& spec, double amax, double sharpness, const Point& x,
                     std::array<double, 3>* grad) {
  std::array<Bump, 3> b{};
  for (int i = 0; i < spec.d; ++i) b[i] = plateau(spec, x[i]);
  if (spec.d == 1) {
    if (grad) *grad = {amax * b[0].slope, 0.0, 0.0};
    return amax * b[0].value;
  }
  // log(sum e^{k b_i} - (d - 1)) / k vanishes when every b_i does.
  double sum = 0.0;
  std::array<double, 3> w{};
  for (int i = 0; i < spec.d; ++i) {
    w[i] = std::exp(sharpness * b[i].value);
    sum += w[i];
  }
  sum -= double(spec.d - 1);
  if (grad) {
    *grad = {0.0, 0.0, 0.0};
    for (int i = 0; i < spec.d; ++i) (*grad)[i] = amax * w[i] / sum * b[i].slope;
  }
  return amax * std::log(sum) / sharpness;
}

DampingProfile build_damping(const OmegaSpec& spec, double a0, double amax, const TorusGrid& grid,
                             double sharpness) {
  spec.validate();
  if (grid.dim() != spec.d) throw InvalidArgument("damping grid dimension differs from geometry");
  if (!(a0 > 0.0 && a0 <= amax)) throw InvalidArgument("damping requires 0 < a0 <= amax");
  if (spec.eps > kPi) throw InvalidArgument("damping slabs wider than pi overlap across the cell");
  if ((spec.eps - spec.eps0) / grid.spacing() < 4.0) {
    std::ostringstream msg;
    msg << "grid with n=" << grid.points_per_axis() << " resolves the damping transition layer "
        << "eps - eps0 = " << spec.eps - spec.eps0 << " with fewer than 4 points";
    throw NumericalError(msg.str());
  }
  DampingProfile a;
  a.grid = grid;
  a.spec = spec;
  a.a0 = a0;
  a.sharpness = sharpness;
  a.values.resize(grid.size());
  a.gradient.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    a.values[i] = damping_value(spec, amax, sharpness, grid.point(i), &a.gradient[i]);
  }
  a.amax = *std::max_element(a.values.begin(), a.values.end());
  return a;
}

DampingProfile constant_damping(const TorusGrid& grid, double c) {
  DampingProfile a;
  a.grid = grid;
  a.spec.d = grid.dim();
  a.a0 = c;
  a.amax = c;
  a.values.assign(grid.size(), c);
  a.gradient.assign(grid.size(), {0.0, 0.0, 0.0});
  return a;
}

PhysicalField DampingProfile::as_field() const {
  PhysicalField f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) f[i] = values[i];
  return f;
}

std::vector<double> DampingProfile::squared() const {
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [](double v) { return v * v; });
  return out;
}

double gradient_bound_constant(const DampingProfile& a, double eps_l) {
  double c = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const auto& g = a.gradient[i];
    const double g2 = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
    if (g2 <= eps_l) continue;
    if (a.values[i] <= 0.0) {
      throw NumericalError("|grad a|^2 exceeds eps at a zero of a; no finite constant exists");
    }
    c = std::max(c, (g2 - eps_l) / a.values[i]);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Carleman geometry

double default_eta_scale(int d) { return 0.1 / (kTwoPi * kTwoPi * d); }

EtaDerivatives eta_at(const OmegaSpec& spec, double scale, const Point& x) {
  const int d = spec.d;
  const double half = 0.5 * spec.eps0;
  std::array<double, 3> c{1.0, 1.0, 1.0}, c1{0.0, 0.0, 0.0}, c2{0.0, 0.0, 0.0}, xt{0.0, 0.0, 0.0};
  double q = 0.0;
  for (int i = 0; i < d; ++i) {
    const double slope = face_distance_slope(x[i]);
    const auto s = smooth_step_derivatives((face_distance(x[i]) - half) / half);
    c[i] = s[0];
    c1[i] = s[1] / half * slope;
    c2[i] = s[2] / (half * half);
    xt[i] = wrap(x[i]);
    q += xt[i] * xt[i];
  }
  auto prod_except = [&](int skip1, int skip2) {
    double p = 1.0;
    for (int j = 0; j < d; ++j) {
      if (j != skip1 && j != skip2) p *= c[j];
    }
    return p;
  };
  const double chi = prod_except(-1, -1);
  std::array<double, 3> dchi{0.0, 0.0, 0.0};
  std::array<std::array<double, 3>, 3> d2chi{};
  for (int i = 0; i < d; ++i) {
    dchi[i] = c1[i] * prod_except(i, -1);
    for (int j = 0; j < d; ++j) {
      d2chi[i][j] = (i == j) ? c2[i] * prod_except(i, -1) : c1[i] * c1[j] * prod_except(i, j);
    }
  }
  EtaDerivatives out;
  out.value = scale * chi * q;
  for (int i = 0; i < d; ++i) {
    out.grad[i] = scale * (q * dchi[i] + chi * 2.0 * xt[i]);
    for (int j = 0; j < d; ++j) {
      out.hess[i][j] = scale * (q * d2chi[i][j] + dchi[i] * 2.0 * xt[j] + 2.0 * xt[i] * dchi[j] +
                                (i == j ? 2.0 * chi : 0.0));
    }
  }
  return out;
}

double eta_sup_norm(const OmegaSpec& spec, double scale, int per_axis) {
  const TorusGrid fine(spec.d, per_axis);
  double best = 0.0;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    best = std::max(best, eta_at(spec, scale, fine.point(i)).value);
  }
  return best;
}

namespace {

int sup_grid_points(int d, int n) {
  const int cap = d == 1 ? 1 << 14 : (d == 2 ? 512 : 96);
  int m = std::min(8 * n, cap);
  return m + (m % 2);
}

}  // namespace

CarlemanGeometry build_eta(const OmegaSpec& spec, const TorusGrid& grid, double scale, unsigned seed) {
  spec.validate();
  if (grid.dim() != spec.d) throw InvalidArgument("eta grid dimension differs from geometry");
  if (scale <= 0.0) scale = default_eta_scale(spec.d);
  CarlemanGeometry geom;
  geom.spec = spec;
  geom.grid = grid;
  geom.scale = scale;
  geom.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) geom.values[i] = eta_at(spec, scale, grid.point(i)).value;
  geom.sup_norm = eta_sup_norm(spec, scale, sup_grid_points(spec.d, grid.points_per_axis()));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const int d = spec.d;
  std::vector<std::array<double, 3>> dirs;
  for (int a = 0; a < d; ++a) {
    std::array<double, 3> e{0.0, 0.0, 0.0};
    e[a] = 1.0;
    dirs.push_back(e);
  }
  auto random_direction = [&] {
    std::array<double, 3> v{0.0, 0.0, 0.0};
    double norm2 = 0.0;
    while (norm2 < 1e-12) {
      norm2 = 0.0;
      for (int a = 0; a < d; ++a) {
        v[a] = normal(rng);
        norm2 += v[a] * v[a];
      }
    }
    for (int a = 0; a < d; ++a) v[a] /= std::sqrt(norm2);
    return v;
  };

  double grad_c = std::numeric_limits<double>::infinity();
  double pseudo_c = std::numeric_limits<double>::infinity();
  std::size_t checked = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto x = grid.point(i);
    bool outside = true;
    for (int a = 0; a < d; ++a) outside = outside && face_distance(x[a]) > spec.eps0;
    if (!outside) continue;
    ++checked;
    const auto e = eta_at(spec, scale, x);
    double g2 = 0.0;
    for (int a = 0; a < d; ++a) g2 += e.grad[a] * e.grad[a];
    grad_c = std::min(grad_c, std::sqrt(g2));
    auto local = dirs;
    for (int r = 0; r < 16; ++r) local.push_back(random_direction());
    for (const auto& xi : local) {
      double hess = 0.0, gdot = 0.0;
      for (int a = 0; a < d; ++a) {
        gdot += e.grad[a] * xi[a];
        for (int b = 0; b < d; ++b) hess += e.hess[a][b] * xi[a] * xi[b];
      }
      pseudo_c = std::min(pseudo_c, hess + gdot * gdot);
    }
  }
  if (checked == 0) throw NumericalError("no grid points outside closure(omega0); refine the grid");
  geom.gradient_constant = grad_c;
  geom.pseudoconvexity_constant = pseudo_c;
  geom.c = std::min(grad_c, pseudo_c);
  if (!(geom.c > 0.0)) {
    std::ostringstream msg;
    msg << "eta fails the Carleman geometry conditions: min |grad eta| = " << grad_c
        << ", min pseudoconvexity form = " << pseudo_c;
    throw NumericalError(msg.str());
  }
  return geom;
}

double spectral_decay_rate(const SpectralField& f, double floor) {
  const auto& g = f.grid();
  std::map<int, double> shell_max;
  double peak = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const int shell = static_cast<int>(std::lround(std::sqrt(g.k_squared(i))));
    const double m = std::abs(f[i]);
    shell_max[shell] = std::max(shell_max[shell], m);
    peak = std::max(peak, m);
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& [k, m] : shell_max) {
    if (m > floor * peak && m > 0.0) pts.emplace_back(double(k), std::log(m));
  }
  if (pts.size() < 2) return std::numeric_limits<double>::infinity();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double np = double(pts.size());
  const double slope = (np * sxy - sx * sy) / (np * sxx - sx * sx);
  return -slope;
}

}  // namespace nlslab
