#include "scenario.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "diagnostics.hpp"
#include "errors.hpp"

namespace nlslab {

namespace pt = boost::property_tree;

const char* preset_name(Preset p) {
  switch (p) {
    case Preset::plane_wave: return "plane_wave";
    case Preset::constant: return "constant";
    case Preset::random_smooth: return "random_smooth";
    case Preset::rescaled_to_energy: return "rescaled_to_energy";
  }
  return "?";
}

const char* scheme_name(Scheme s) { return s == Scheme::strang2 ? "strang2" : "rk4ei"; }

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"scenario", {"name", "seed"}},
      {"geometry", {"d", "n", "eps", "eps0", "a0", "amax", "sharpness"}},
      {"evolution", {"dt", "T", "scheme", "record_stride", "snapshot_stride"}},
      {"initial", {"preset", "base", "A", "k", "seed", "band", "h1_target", "E_target"}},
      {"carleman", {"lambda", "s", "m", "T", "C", "nodes", "corpus", "eta_scale", "margin"}},
      {"hum",
       {"T", "cg_tol", "cg_maxiter", "quad_nodes", "quad_panels", "preconditioner", "dt", "scheme", "eps_loc",
        "cert_tol", "picard_tol", "picard_maxiter"}},
      {"control", {"eps", "R_list", "damping_dt", "record_stride", "max_time", "max_retries"}},
      {"decay", {"energies", "window_start", "window_end"}},
      {"bourgain", {"s", "bprime", "samples", "time_samples", "time_band", "T"}},
      {"output", {"dir", "series", "snapshots"}},
  };
  return keys;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& raw, const char* expected) {
  std::ostringstream msg;
  msg << key << ": expected " << expected << ", got '" << raw << "'";
  throw ConfigError(msg.str());
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
    bad_value(key, raw, "a finite number");
  }
  return out;
}

long long to_integer(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) bad_value(key, raw, "an integer");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    bad_value(key, raw, "an unsigned 64-bit integer");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, raw, "true or false");
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

Preset to_preset(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  for (const Preset p : {Preset::plane_wave, Preset::constant, Preset::random_smooth, Preset::rescaled_to_energy}) {
    if (v == preset_name(p)) return p;
  }
  bad_value(key, raw, "one of plane_wave, constant, random_smooth, rescaled_to_energy");
}

Scheme to_scheme(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "strang2") return Scheme::strang2;
  if (v == "rk4ei") return Scheme::rk4ei;
  bad_value(key, raw, "strang2 or rk4ei");
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    if constexpr (std::is_floating_point_v<T>) {
      os << fmt(v[i]);
    } else {
      os << v[i];
    }
  }
  return os.str();
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  const std::string* raw(const std::string& section, const std::string& key) const {
    const auto sec = tree_.find(section);
    if (sec == tree_.not_found()) return nullptr;
    const auto it = sec->second.find(key);
    if (it == sec->second.not_found()) return nullptr;
    return &it->second.data();
  }

  template <class F>
  void with(const std::string& section, const std::string& key, F&& f) const {
    if (const auto* r = raw(section, key)) f(section + "." + key, *r);
  }

 private:
  const pt::ptree& tree_;
};

void check_keys(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) {
      if (!body.data().empty() || body.empty()) {
        throw ConfigError("unknown key '" + section + "' outside any known section");
      }
      throw ConfigError("unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw ConfigError("unknown key " + section + "." + key);
      if (!value.empty()) throw ConfigError("nested key under " + section + "." + key);
    }
  }
}

Scenario from_tree(const pt::ptree& tree) {
  check_keys(tree);
  Scenario s;
  const Reader r(tree);
  auto num = [&](const char* sec, const char* key, double& dst) {
    r.with(sec, key, [&](const std::string& k, const std::string& v) { dst = to_double(k, v); });
  };
  auto integer = [&](const char* sec, const char* key, int& dst) {
    r.with(sec, key, [&](const std::string& k, const std::string& v) {
      const long long x = to_integer(k, v);
      if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) bad_value(k, v, "a 32-bit integer");
      dst = static_cast<int>(x);
    });
  };

  r.with("scenario", "name", [&](const std::string& k, const std::string& v) {
    s.name = trim(v);
    if (s.name.empty()) bad_value(k, v, "a nonempty name");
  });
  r.with("scenario", "seed", [&](const std::string& k, const std::string& v) { s.seed = to_u64(k, v); });

  auto& g = s.geometry;
  integer("geometry", "d", g.d);
  integer("geometry", "n", g.n);
  num("geometry", "eps", g.eps);
  num("geometry", "eps0", g.eps0);
  num("geometry", "a0", g.a0);
  num("geometry", "amax", g.amax);
  num("geometry", "sharpness", g.sharpness);

  auto& e = s.evolution;
  num("evolution", "dt", e.dt);
  num("evolution", "T", e.T);
  r.with("evolution", "scheme", [&](const std::string& k, const std::string& v) { e.scheme = to_scheme(k, v); });
  integer("evolution", "record_stride", e.record_stride);
  integer("evolution", "snapshot_stride", e.snapshot_stride);

  auto& in = s.initial;
  r.with("initial", "preset", [&](const std::string& k, const std::string& v) { in.preset = to_preset(k, v); });
  r.with("initial", "base", [&](const std::string& k, const std::string& v) { in.base = to_preset(k, v); });
  num("initial", "A", in.A);
  r.with("initial", "k", [&](const std::string& k, const std::string& v) {
    in.k.clear();
    for (const auto& item : split_list(v)) in.k.push_back(static_cast<int>(to_integer(k, item)));
  });
  r.with("initial", "seed", [&](const std::string& k, const std::string& v) { in.seed = to_u64(k, v); });
  integer("initial", "band", in.band);
  num("initial", "h1_target", in.h1_target);
  num("initial", "E_target", in.E_target);

  auto& c = s.carleman;
  num("carleman", "lambda", c.lambda);
  num("carleman", "s", c.s);
  num("carleman", "m", c.m);
  num("carleman", "T", c.T);
  num("carleman", "C", c.C);
  integer("carleman", "nodes", c.nodes);
  integer("carleman", "corpus", c.corpus);
  num("carleman", "eta_scale", c.eta_scale);
  num("carleman", "margin", c.margin);

  auto& h = s.hum.cfg;
  num("hum", "T", h.T);
  num("hum", "cg_tol", h.cg_tol);
  integer("hum", "cg_maxiter", h.cg_maxiter);
  integer("hum", "quad_nodes", h.quad_nodes);
  integer("hum", "quad_panels", h.quad_panels);
  r.with("hum", "preconditioner", [&](const std::string& k, const std::string& v) {
    const auto t = trim(v);
    if (t == "bracket_inverse") {
      h.preconditioner = Preconditioner::bracket_inverse;
    } else if (t == "none") {
      h.preconditioner = Preconditioner::none;
    } else {
      bad_value(k, v, "bracket_inverse or none");
    }
  });
  num("hum", "dt", h.dt);
  r.with("hum", "scheme", [&](const std::string& k, const std::string& v) { h.scheme = to_scheme(k, v); });
  num("hum", "eps_loc", h.eps_loc);
  num("hum", "cert_tol", h.cert_tol);
  num("hum", "picard_tol", h.picard_tol);
  integer("hum", "picard_maxiter", h.picard_maxiter);

  auto& ct = s.control;
  num("control", "eps", ct.eps);
  r.with("control", "R_list", [&](const std::string& k, const std::string& v) {
    ct.R_list.clear();
    for (const auto& item : split_list(v)) ct.R_list.push_back(to_double(k, item));
  });
  num("control", "damping_dt", ct.phase.dt);
  integer("control", "record_stride", ct.phase.record_stride);
  num("control", "max_time", ct.phase.max_time);
  integer("control", "max_retries", ct.phase.max_retries);

  auto& dc = s.decay;
  r.with("decay", "energies", [&](const std::string& k, const std::string& v) {
    dc.energies.clear();
    for (const auto& item : split_list(v)) dc.energies.push_back(to_double(k, item));
  });
  num("decay", "window_start", dc.window_start);
  num("decay", "window_end", dc.window_end);

  auto& b = s.bourgain;
  num("bourgain", "s", b.s);
  num("bourgain", "bprime", b.bprime);
  integer("bourgain", "samples", b.samples);
  integer("bourgain", "time_samples", b.time_samples);
  integer("bourgain", "time_band", b.time_band);
  num("bourgain", "T", b.T);

  auto& o = s.output;
  r.with("output", "dir", [&](const std::string&, const std::string& v) { o.dir = trim(v); });
  r.with("output", "series", [&](const std::string& k, const std::string& v) { o.series = to_bool(k, v); });
  r.with("output", "snapshots", [&](const std::string& k, const std::string& v) { o.snapshots = to_bool(k, v); });

  s.validate();
  return s;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

double Scenario::time_step() const { return evolution.dt > 0.0 ? evolution.dt : default_time_step(grid()); }

void Scenario::validate() const {
  for (const char c : name) {
    require(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.',
            "scenario.name: only letters, digits, '_', '-' and '.' are allowed");
  }
  const auto& g = geometry;
  require(g.d >= 1 && g.d <= 3, "geometry.d: must be 1, 2 or 3");
  require(g.n >= 8 && g.n % 2 == 0, "geometry.n: must be even and >= 8");
  require(g.eps > 0.0 && g.eps <= kPi, "geometry.eps: must lie in (0, pi]");
  require(g.eps0 > 0.0, "geometry.eps0: must be positive");
  require(g.eps0 < g.eps, "geometry.eps0 must be smaller than geometry.eps");
  require(g.a0 >= 0.0, "geometry.a0: must be nonnegative");
  require(g.amax >= g.a0, "geometry.a0 must not exceed geometry.amax");
  require(g.a0 > 0.0 || g.amax == 0.0, "geometry.a0 must be positive unless geometry.amax = 0 (undamped)");
  require(g.sharpness > 0.0, "geometry.sharpness: must be positive");

  const auto& e = evolution;
  require(e.dt >= 0.0, "evolution.dt: must be nonnegative (0 selects the default)");
  require(e.T > 0.0, "evolution.T: must be positive");
  require(e.record_stride >= 1, "evolution.record_stride: must be >= 1");
  require(e.snapshot_stride >= 0, "evolution.snapshot_stride: must be >= 0");

  const auto& in = initial;
  require(in.base != Preset::rescaled_to_energy, "initial.base: cannot itself be rescaled_to_energy");
  require(!in.k.empty() && in.k.size() <= std::size_t(g.d), "initial.k: needs 1..d integer components");
  for (const int k : in.k) require(2 * std::abs(k) <= g.n, "initial.k: wavenumber outside the grid band");
  require(in.band >= 0 && 2 * in.band <= g.n, "initial.band: must lie in [0, n/2]");
  require(in.h1_target >= 0.0, "initial.h1_target: must be nonnegative");
  require(in.E_target >= 0.0, "initial.E_target: must be nonnegative");

  const auto& c = carleman;
  require(c.m > 1.0, "carleman.m: must exceed 1");
  require(c.T > 0.0, "carleman.T: must be positive");
  require(c.C > 0.0, "carleman.C: must be positive");
  require(c.lambda >= 0.0 && c.s >= 0.0, "carleman.lambda, carleman.s: must be nonnegative (0 selects the default)");
  require(c.nodes >= 2, "carleman.nodes: must be >= 2");
  require(c.corpus >= 1, "carleman.corpus: must be >= 1");
  require(c.eta_scale >= 0.0, "carleman.eta_scale: must be nonnegative");
  require(c.margin >= 0.0 && 2.0 * c.margin < c.T, "carleman.margin: must lie in [0, T/2)");

  try {
    hum.cfg.validate();
  } catch (const InvalidArgument& ex) {
    throw ConfigError(std::string("hum: ") + ex.what());
  }

  const auto& ct = control;
  require(ct.eps > 0.0, "control.eps: must be positive");
  require(!ct.R_list.empty(), "control.R_list: needs at least one value");
  for (const double R : ct.R_list) require(R > 0.0, "control.R_list: values must be positive");
  require(ct.phase.dt > 0.0, "control.damping_dt: must be positive");
  require(ct.phase.record_stride >= 1, "control.record_stride: must be >= 1");
  require(ct.phase.max_time > 0.0, "control.max_time: must be positive");
  require(ct.phase.max_retries >= 0, "control.max_retries: must be >= 0");

  require(!decay.energies.empty(), "decay.energies: needs at least one value");
  for (const double v : decay.energies) require(v > 0.0, "decay.energies: values must be positive");
  require(decay.window_start >= 0.0 && decay.window_end >= 0.0, "decay.window_start, decay.window_end: must be >= 0");

  const auto& b = bourgain;
  require(b.bprime > 0.0 && b.bprime < 0.5, "bourgain.bprime: must lie in (0, 1/2)");
  require(b.samples >= 1, "bourgain.samples: must be >= 1");
  require(b.time_samples >= kMinTimeSamples, "bourgain.time_samples: must be >= 32");
  require(b.time_band >= 0, "bourgain.time_band: must be >= 0");
  require(b.T > 0.0, "bourgain.T: must be positive");

  require(!output.dir.empty(), "output.dir: must be nonempty");
}

Scenario parse_scenario(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    std::ostringstream msg;
    msg << "malformed scenario file at line " << e.line() << ": " << e.message();
    throw ConfigError(msg.str());
  }
  return from_tree(tree);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream os;
  auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << '\n'; };
  os << "[scenario]\n";
  kv("name", s.name);
  kv("seed", std::to_string(s.seed));
  const auto& g = s.geometry;
  os << "\n[geometry]\n";
  kv("d", std::to_string(g.d));
  kv("n", std::to_string(g.n));
  kv("eps", fmt(g.eps));
  kv("eps0", fmt(g.eps0));
  kv("a0", fmt(g.a0));
  kv("amax", fmt(g.amax));
  kv("sharpness", fmt(g.sharpness));
  const auto& e = s.evolution;
  os << "\n[evolution]\n";
  kv("dt", fmt(e.dt));
  kv("T", fmt(e.T));
  kv("scheme", scheme_name(e.scheme));
  kv("record_stride", std::to_string(e.record_stride));
  kv("snapshot_stride", std::to_string(e.snapshot_stride));
  const auto& in = s.initial;
  os << "\n[initial]\n";
  kv("preset", preset_name(in.preset));
  kv("base", preset_name(in.base));
  kv("A", fmt(in.A));
  kv("k", join(in.k));
  kv("seed", std::to_string(in.seed));
  kv("band", std::to_string(in.band));
  kv("h1_target", fmt(in.h1_target));
  kv("E_target", fmt(in.E_target));
  const auto& c = s.carleman;
  os << "\n[carleman]\n";
  kv("lambda", fmt(c.lambda));
  kv("s", fmt(c.s));
  kv("m", fmt(c.m));
  kv("T", fmt(c.T));
  kv("C", fmt(c.C));
  kv("nodes", std::to_string(c.nodes));
  kv("corpus", std::to_string(c.corpus));
  kv("eta_scale", fmt(c.eta_scale));
  kv("margin", fmt(c.margin));
  const auto& h = s.hum.cfg;
  os << "\n[hum]\n";
  kv("T", fmt(h.T));
  kv("cg_tol", fmt(h.cg_tol));
  kv("cg_maxiter", std::to_string(h.cg_maxiter));
  kv("quad_nodes", std::to_string(h.quad_nodes));
  kv("quad_panels", std::to_string(h.quad_panels));
  kv("preconditioner", h.preconditioner == Preconditioner::none ? "none" : "bracket_inverse");
  kv("dt", fmt(h.dt));
  kv("scheme", scheme_name(h.scheme));
  kv("eps_loc", fmt(h.eps_loc));
  kv("cert_tol", fmt(h.cert_tol));
  kv("picard_tol", fmt(h.picard_tol));
  kv("picard_maxiter", std::to_string(h.picard_maxiter));
  const auto& ct = s.control;
  os << "\n[control]\n";
  kv("eps", fmt(ct.eps));
  kv("R_list", join(ct.R_list));
  kv("damping_dt", fmt(ct.phase.dt));
  kv("record_stride", std::to_string(ct.phase.record_stride));
  kv("max_time", fmt(ct.phase.max_time));
  kv("max_retries", std::to_string(ct.phase.max_retries));
  const auto& dc = s.decay;
  os << "\n[decay]\n";
  kv("energies", join(dc.energies));
  kv("window_start", fmt(dc.window_start));
  kv("window_end", fmt(dc.window_end));
  const auto& b = s.bourgain;
  os << "\n[bourgain]\n";
  kv("s", fmt(b.s));
  kv("bprime", fmt(b.bprime));
  kv("samples", std::to_string(b.samples));
  kv("time_samples", std::to_string(b.time_samples));
  kv("time_band", std::to_string(b.time_band));
  kv("T", fmt(b.T));
  const auto& o = s.output;
  os << "\n[output]\n";
  kv("dir", o.dir);
  kv("series", o.series ? "true" : "false");
  kv("snapshots", o.snapshots ? "true" : "false");
  return os.str();
}

std::string normalize_scenario(const std::string& text) { return serialize_scenario(parse_scenario(text)); }

SpectralField random_smooth(const TorusGrid& grid, int band, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  SpectralField u(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    // Draw for every mode so the stream does not depend on the band.
    const double re = normal(rng), im = normal(rng);
    const auto k = grid.wavevector(i);
    bool inside = true;
    for (int a = 0; a < grid.dim(); ++a) inside = inside && std::abs(k[a]) <= band;
    if (!inside) continue;
    u[i] = std::exp(-std::sqrt(grid.k_squared(i))) * cplx(re, im);
  }
  return u;
}

namespace {

SpectralField preset_field(const Scenario& s, Preset p, std::uint64_t member) {
  const auto grid = s.grid();
  const auto& in = s.initial;
  SpectralField u(grid);
  switch (p) {
    case Preset::plane_wave: {
      std::array<int, 3> k{0, 0, 0};
      for (std::size_t a = 0; a < in.k.size(); ++a) k[a] = in.k[a];
      u.mode(k) = in.A;
      break;
    }
    case Preset::constant:
      u.mode({0, 0, 0}) = in.A;
      break;
    case Preset::random_smooth: {
      const int band = in.band > 0 ? in.band : s.geometry.n / 3;
      const std::uint64_t seed = (in.seed ? in.seed : s.seed) + member;
      u = random_smooth(grid, band, seed);
      if (in.h1_target > 0.0) {
        const double h1 = sobolev_norm(u, 1.0);
        if (h1 == 0.0) throw NumericalError("random_smooth draw is identically zero");
        u *= cplx(in.h1_target / h1);
      } else {
        u *= cplx(in.A);
      }
      break;
    }
    case Preset::rescaled_to_energy:
      throw ConfigError("initial.base: cannot itself be rescaled_to_energy");
  }
  return u;
}

}  // namespace

SpectralField initial_data(const Scenario& s, std::uint64_t member) {
  if (s.initial.preset == Preset::rescaled_to_energy) {
    return scale_to_energy(preset_field(s, s.initial.base, member), s.initial.E_target);
  }
  return preset_field(s, s.initial.preset, member);
}

DampingProfile scenario_damping(const Scenario& s) {
  const auto grid = s.grid();
  if (s.geometry.amax == 0.0) return constant_damping(grid, 0.0);
  return build_damping(s.omega(), s.geometry.a0, s.geometry.amax, grid, s.geometry.sharpness);
}

}  // namespace nlslab
