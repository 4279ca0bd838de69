#include "torus.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <utility>

#include "errors.hpp"

namespace nlslab {

// ---------------------------------------------------------------------------
// TorusGrid

TorusGrid::TorusGrid(int d, int n) : d_(d), n_(n) {
  if (d < 1 || d > 3) throw InvalidArgument("grid dimension must be 1, 2 or 3");
  if (n < 8 || n % 2 != 0) throw InvalidArgument("points per axis must be even and >= 8");
  size_ = 1;
  for (int i = 0; i < d; ++i) size_ *= static_cast<std::size_t>(n);
}

double TorusGrid::volume() const { return std::pow(kTwoPi, d_); }

std::array<int, 3> TorusGrid::unravel(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = d_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return idx;
}

std::size_t TorusGrid::ravel(const std::array<int, 3>& idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < d_; ++a) flat = flat * n_ + static_cast<std::size_t>(idx[a]);
  return flat;
}

std::array<int, 3> TorusGrid::wavevector(std::size_t flat) const {
  auto idx = unravel(flat);
  for (int a = 0; a < d_; ++a) idx[a] = wavenumber(idx[a]);
  return idx;
}

double TorusGrid::k_squared(std::size_t flat) const {
  const auto k = wavevector(flat);
  double s = 0.0;
  for (int a = 0; a < d_; ++a) s += double(k[a]) * k[a];
  return s;
}

double TorusGrid::max_k_squared() const { return d_ * double(n_ / 2) * double(n_ / 2); }

std::array<double, 3> TorusGrid::point(std::size_t flat) const {
  const auto idx = unravel(flat);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < d_; ++a) x[a] = spacing() * idx[a];
  return x;
}

// ---------------------------------------------------------------------------
// Fields

SpectralField::SpectralField(const TorusGrid& grid) : grid_(grid), coeffs_(grid.size()) {}

SpectralField::SpectralField(const TorusGrid& grid, std::vector<cplx> coeffs)
    : grid_(grid), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != grid_.size()) throw InvalidArgument("coefficient count does not match grid");
}

static std::size_t mode_index(const TorusGrid& g, const std::array<int, 3>& k) {
  const int n = g.points_per_axis();
  std::array<int, 3> idx{0, 0, 0};
  for (int a = 0; a < g.dim(); ++a) {
    if (k[a] <= -n / 2 || k[a] > n / 2) throw InvalidArgument("wavenumber outside the grid band");
    idx[a] = k[a] >= 0 ? k[a] : k[a] + n;
  }
  return g.ravel(idx);
}

cplx& SpectralField::mode(const std::array<int, 3>& k) { return coeffs_[mode_index(grid_, k)]; }
const cplx& SpectralField::mode(const std::array<int, 3>& k) const {
  return coeffs_[mode_index(grid_, k)];
}

bool SpectralField::is_finite() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [](const cplx& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  if (o.grid_ != grid_) throw InvalidArgument("grid mismatch in field addition");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  if (o.grid_ != grid_) throw InvalidArgument("grid mismatch in field subtraction");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(cplx c) {
  for (auto& v : coeffs_) v *= c;
  return *this;
}

PhysicalField::PhysicalField(const TorusGrid& grid) : grid_(grid), values_(grid.size()) {}

PhysicalField::PhysicalField(const TorusGrid& grid, std::vector<cplx> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw InvalidArgument("sample count does not match grid");
}

// ---------------------------------------------------------------------------
// FFT plan cache. Planning is not thread-safe in FFTW, execution with the
// new-array interface is; plans are created once under a lock and reused.

namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  PlanPair get(int d, int n) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find({d, n});
    if (it != plans_.end()) return it->second;
    int dims[3] = {n, n, n};
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(n);
    fftw_complex* buf = fftw_alloc_complex(total);
    PlanPair p;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    p.forward = fftw_plan_dft(d, dims, buf, buf, FFTW_FORWARD, flags);
    p.backward = fftw_plan_dft(d, dims, buf, buf, FFTW_BACKWARD, flags);
    fftw_free(buf);
    plans_.emplace(std::make_pair(d, n), p);
    return p;
  }

  ~PlanCache() {
    for (auto& [key, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, PlanPair> plans_;
};

void execute(fftw_plan plan, std::vector<cplx>& data) {
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace

PhysicalField to_physical(const SpectralField& f) {
  const auto& g = f.grid();
  std::vector<cplx> data(f.coeffs().begin(), f.coeffs().end());
  execute(PlanCache::instance().get(g.dim(), g.points_per_axis()).backward, data);
  return PhysicalField(g, std::move(data));
}

SpectralField to_spectral(const PhysicalField& f) {
  const auto& g = f.grid();
  std::vector<cplx> data(f.values().begin(), f.values().end());
  execute(PlanCache::instance().get(g.dim(), g.points_per_axis()).forward, data);
  const double inv = 1.0 / static_cast<double>(g.size());
  for (auto& v : data) v *= inv;
  return SpectralField(g, std::move(data));
}

SpectralField resample(const SpectralField& f, int m) {
  const auto& g = f.grid();
  const TorusGrid target(g.dim(), m);
  SpectralField out(target);
  const int lo = -std::min(g.points_per_axis(), m) / 2 + 1;
  const int hi = std::min(g.points_per_axis(), m) / 2;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto k = g.wavevector(i);
    bool inside = true;
    for (int a = 0; a < g.dim(); ++a) inside = inside && k[a] >= lo && k[a] <= hi;
    if (inside) out.mode(k) = f[i];
  }
  return out;
}

double sobolev_norm(const SpectralField& f, double s) {
  const auto& g = f.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    acc += std::pow(1.0 + g.k_squared(i), s) * std::norm(f[i]);
  }
  return std::sqrt(acc);
}

cplx l2_inner(const SpectralField& f, const SpectralField& h) {
  if (f.grid() != h.grid()) throw InvalidArgument("grid mismatch in inner product");
  cplx acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * std::conj(h[i]);
  return acc * f.grid().volume();
}

SpectralField laplacian(const SpectralField& f) {
  SpectralField out = f;
  const auto& g = f.grid();
  for (std::size_t i = 0; i < g.size(); ++i) out[i] *= -g.k_squared(i);
  return out;
}

SpectralField partial(const SpectralField& f, int axis) {
  const auto& g = f.grid();
  if (axis < 0 || axis >= g.dim()) throw InvalidArgument("derivative axis out of range");
  SpectralField out = f;
  // Fields are complex, so the Nyquist mode n/2 is an ordinary mode here and
  // keeps partial^2 summed over axes equal to the laplacian.
  for (std::size_t i = 0; i < g.size(); ++i) out[i] *= cplx(0.0, double(g.wavevector(i)[axis]));
  return out;
}

SpectralField free_propagator(const SpectralField& f, double t) {
  SpectralField out = f;
  const auto& g = f.grid();
  for (std::size_t i = 0; i < g.size(); ++i) out[i] *= std::polar(1.0, -g.k_squared(i) * t);
  return out;
}

bool is_dealiased_mode(const TorusGrid& grid, std::size_t flat) {
  const auto k = grid.wavevector(flat);
  const int n = grid.points_per_axis();
  for (int a = 0; a < grid.dim(); ++a) {
    if (3 * std::abs(k[a]) > n) return false;
  }
  return true;
}

SpectralField dealias(const SpectralField& f) {
  SpectralField out = f;
  const auto& g = f.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!is_dealiased_mode(g, i)) out[i] = 0.0;
  }
  return out;
}

double mass(const SpectralField& f) {
  double acc = 0.0;
  for (const auto& c : f.coeffs()) acc += std::norm(c);
  return acc * f.grid().volume();
}

double grad_energy(const SpectralField& f) {
  const auto& g = f.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) acc += g.k_squared(i) * std::norm(f[i]);
  return acc * g.volume();
}

double quartic(const SpectralField& f) {
  const auto padded = to_physical(resample(f, 2 * f.grid().points_per_axis()));
  double acc = 0.0;
  for (const auto& v : padded.values()) {
    const double m2 = std::norm(v);
    acc += m2 * m2;
  }
  return acc * padded.grid().volume() / static_cast<double>(padded.size());
}

SpectralField cubic_product(const SpectralField& f) {
  auto padded = to_physical(resample(f, 2 * f.grid().points_per_axis()));
  for (auto& v : padded.values()) v *= std::norm(v);
  return to_spectral(padded);
}

// ---------------------------------------------------------------------------
// Snapshots

namespace {

constexpr char kMagic[4] = {'N', 'L', 'S', 'F'};
constexpr std::uint8_t kSnapshotVersion = 1;

template <class T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw IoError("truncated NLSF snapshot");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_snapshot(std::ostream& os, const PhysicalField& f, double time) {
  os.write(kMagic, 4);
  put_le<std::uint8_t>(os, kSnapshotVersion);
  put_le<std::uint8_t>(os, static_cast<std::uint8_t>(f.grid().dim()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid().points_per_axis()));
  put_le<double>(os, time);
  for (const auto& v : f.values()) {
    put_le<double>(os, v.real());
    put_le<double>(os, v.imag());
  }
  if (!os) throw IoError("failed writing NLSF snapshot");
}

Snapshot read_snapshot(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw IoError("not an NLSF snapshot");
  const auto version = get_le<std::uint8_t>(is);
  if (version != kSnapshotVersion) throw IoError("unsupported NLSF version " + std::to_string(version));
  const int d = get_le<std::uint8_t>(is);
  const int n = static_cast<int>(get_le<std::uint32_t>(is));
  Snapshot snap;
  snap.time = get_le<double>(is);
  TorusGrid grid;
  try {
    grid = TorusGrid(d, n);
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("bad NLSF header: ") + e.what());
  }
  PhysicalField field(grid);
  for (auto& v : field.values()) {
    const double re = get_le<double>(is);
    const double im = get_le<double>(is);
    v = {re, im};
  }
  snap.field = std::move(field);
  return snap;
}

void write_snapshot_file(const std::string& path, const PhysicalField& f, double time) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_snapshot(os, f, time);
}

Snapshot read_snapshot_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return read_snapshot(is);
}

}  // namespace nlslab
