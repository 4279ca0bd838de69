#pragma once

// Discrete Fourier representation of fields on the torus T^d = (R / 2piZ)^d.
//
// Coefficients follow u(x) = sum_k uhat(k) e^{i k.x}, so uhat is the
// (2pi)^{-d}-normalized Fourier transform. Sobolev norms are plain weighted
// coefficient sums; physical integrals carry the (2pi)^d Parseval factor.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace nlslab {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Uniform grid with n points per axis on [0, 2pi)^d, row-major storage
/// (last axis fastest). Wavenumbers per axis run over -n/2+1 .. n/2.
class TorusGrid {
 public:
  TorusGrid() = default;
  TorusGrid(int d, int n);

  int dim() const { return d_; }
  int points_per_axis() const { return n_; }
  std::size_t size() const { return size_; }
  double spacing() const { return kTwoPi / n_; }
  /// (2pi)^d, the volume of the fundamental cell.
  double volume() const;

  /// Integer wavenumber stored at axis index j.
  int wavenumber(int j) const { return j <= n_ / 2 ? j : j - n_; }
  /// Per-axis indices of a flat index.
  std::array<int, 3> unravel(std::size_t flat) const;
  std::size_t ravel(const std::array<int, 3>& idx) const;
  std::array<int, 3> wavevector(std::size_t flat) const;
  double k_squared(std::size_t flat) const;
  /// Largest |k|^2 representable on the grid.
  double max_k_squared() const;
  std::array<double, 3> point(std::size_t flat) const;

  bool operator==(const TorusGrid& o) const { return d_ == o.d_ && n_ == o.n_; }
  bool operator!=(const TorusGrid& o) const { return !(*this == o); }

 private:
  int d_ = 1;
  int n_ = 8;
  std::size_t size_ = 8;
};

class PhysicalField;

/// Fourier coefficients of a field, stored in FFT index order.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(const TorusGrid& grid);
  SpectralField(const TorusGrid& grid, std::vector<cplx> coeffs);

  const TorusGrid& grid() const { return grid_; }
  std::span<const cplx> coeffs() const { return coeffs_; }
  std::span<cplx> coeffs() { return coeffs_; }
  cplx& operator[](std::size_t i) { return coeffs_[i]; }
  const cplx& operator[](std::size_t i) const { return coeffs_[i]; }
  std::size_t size() const { return coeffs_.size(); }

  /// Coefficient of the mode with the given wavevector (per-axis integers).
  cplx& mode(const std::array<int, 3>& k);
  const cplx& mode(const std::array<int, 3>& k) const;

  bool is_finite() const;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(cplx c);
  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(cplx c, SpectralField a) { return a *= c; }
  friend SpectralField operator*(SpectralField a, cplx c) { return a *= c; }

 private:
  TorusGrid grid_;
  std::vector<cplx> coeffs_;
};

/// Samples at the grid points x_j = 2pi j / n.
class PhysicalField {
 public:
  PhysicalField() = default;
  explicit PhysicalField(const TorusGrid& grid);
  PhysicalField(const TorusGrid& grid, std::vector<cplx> values);

  const TorusGrid& grid() const { return grid_; }
  std::span<const cplx> values() const { return values_; }
  std::span<cplx> values() { return values_; }
  cplx& operator[](std::size_t i) { return values_[i]; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

 private:
  TorusGrid grid_;
  std::vector<cplx> values_;
};

template <class F>
PhysicalField sample(const TorusGrid& grid, F&& f) {
  PhysicalField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = f(grid.point(i));
  return out;
}

// Transforms (FFTW-backed; plans are cached per grid and shared across threads).
PhysicalField to_physical(const SpectralField& f);
SpectralField to_spectral(const PhysicalField& f);

/// Re-expresses f on a grid with m >= n points per axis (zero padding) or
/// m < n (truncation to the modes the smaller grid represents).
SpectralField resample(const SpectralField& f, int m);

double sobolev_norm(const SpectralField& f, double s);
/// (2pi)^d-weighted coefficient inner product, equal to the L2 integral of f g*.
cplx l2_inner(const SpectralField& f, const SpectralField& g);

SpectralField laplacian(const SpectralField& f);
/// Spectral partial derivative along one axis.
SpectralField partial(const SpectralField& f, int axis);
/// e^{it Delta}: multiplies mode k by e^{-i |k|^2 t}.
SpectralField free_propagator(const SpectralField& f, double t);
/// Zeros every coefficient with some |k_i| > n/3.
SpectralField dealias(const SpectralField& f);
bool is_dealiased_mode(const TorusGrid& grid, std::size_t flat);

double mass(const SpectralField& f);
double grad_energy(const SpectralField& f);
/// Integral of |u|^4 by the trapezoid rule on a 2x zero-padded grid.
double quartic(const SpectralField& f);

/// |u|^2 u on a 2x-oversampled grid; the result lives on the padded grid.
SpectralField cubic_product(const SpectralField& f);

/// Binary snapshot ("NLSF" v1): magic, u8 version, u8 d, u32 n, f64 time,
/// then n^d little-endian (re, im) f64 pairs in row-major physical order.
struct Snapshot {
  double time = 0.0;
  PhysicalField field;
};

void write_snapshot(std::ostream& os, const PhysicalField& f, double time);
Snapshot read_snapshot(std::istream& is);
void write_snapshot_file(const std::string& path, const PhysicalField& f, double time);
Snapshot read_snapshot_file(const std::string& path);

}  // namespace nlslab
