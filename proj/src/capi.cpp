#include <cstring>
#include <new>
#include <string>

#include "errors.hpp"
#include "harness.hpp"
#include "nlslab/nlslab.h"

struct nls_scenario {
  nlslab::Scenario value;
};

struct nls_field {
  nlslab::PhysicalField value;
};

namespace {

thread_local std::string g_last_error;

nls_status fail(nls_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <class F>
nls_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const std::bad_alloc&) {
    return fail(NLS_ERR_NUMERICAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(static_cast<nls_status>(nlslab::exit_code_for(e)), e.what());
  } catch (...) {
    return fail(NLS_ERR_CONFIG, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  auto* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

#define NLS_REQUIRE(ptr)                                                      \
  do {                                                                        \
    if (!(ptr)) return fail(NLS_ERR_CONFIG, std::string(#ptr) + " is null"); \
  } while (0)

}  // namespace

extern "C" {

const char* nls_last_error(void) { return g_last_error.c_str(); }

const char* nls_version(void) { return nlslab::version_string(); }

nls_status nls_scenario_load(const char* path, nls_scenario** out) {
  NLS_REQUIRE(path);
  NLS_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    *out = new nls_scenario{nlslab::load_scenario(path)};
    return NLS_OK;
  });
}

nls_status nls_scenario_parse(const char* text, nls_scenario** out) {
  NLS_REQUIRE(text);
  NLS_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    *out = new nls_scenario{nlslab::parse_scenario(text)};
    return NLS_OK;
  });
}

void nls_scenario_free(nls_scenario* scn) { delete scn; }

nls_status nls_scenario_set_seed(nls_scenario* scn, uint64_t seed) {
  NLS_REQUIRE(scn);
  scn->value.seed = seed;
  return NLS_OK;
}

nls_status nls_scenario_serialize(const nls_scenario* scn, char** out) {
  NLS_REQUIRE(scn);
  NLS_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    *out = dup_string(nlslab::serialize_scenario(scn->value));
    return NLS_OK;
  });
}

nls_status nls_run(const nls_scenario* scn, const char* subcommand, const char* out_dir, char** report_json) {
  NLS_REQUIRE(scn);
  NLS_REQUIRE(subcommand);
  NLS_REQUIRE(report_json);
  *report_json = nullptr;
  return guarded([&] {
    const auto r = nlslab::run(subcommand, scn->value, out_dir ? out_dir : "");
    *report_json = dup_string(r.report.dump(2));
    if (r.exit_code == 3) return fail(NLS_ERR_VERIFICATION, "verify: at least one check failed");
    return NLS_OK;
  });
}

void nls_string_free(char* s) { delete[] s; }

nls_status nls_field_create(int d, int n, nls_field** out) {
  NLS_REQUIRE(out);
  *out = nullptr;
  if (d < 1 || d > 3) return fail(NLS_ERR_CONFIG, "d must be 1, 2 or 3");
  if (n < 2 || n % 2 != 0) return fail(NLS_ERR_CONFIG, "n must be even and >= 2");
  return guarded([&] {
    *out = new nls_field{nlslab::PhysicalField(nlslab::TorusGrid(d, n))};
    return NLS_OK;
  });
}

void nls_field_free(nls_field* f) { delete f; }

size_t nls_field_size(const nls_field* f) { return f ? f->value.size() : 0; }

nls_status nls_field_set_physical(nls_field* f, const double* values, size_t count) {
  NLS_REQUIRE(f);
  NLS_REQUIRE(values);
  if (count != 2 * f->value.size()) return fail(NLS_ERR_CONFIG, "count must be 2 n^d");
  for (std::size_t i = 0; i < f->value.size(); ++i) f->value[i] = nlslab::cplx(values[2 * i], values[2 * i + 1]);
  return NLS_OK;
}

nls_status nls_field_get_physical(const nls_field* f, double* values, size_t count) {
  NLS_REQUIRE(f);
  NLS_REQUIRE(values);
  if (count != 2 * f->value.size()) return fail(NLS_ERR_CONFIG, "count must be 2 n^d");
  for (std::size_t i = 0; i < f->value.size(); ++i) {
    values[2 * i] = f->value[i].real();
    values[2 * i + 1] = f->value[i].imag();
  }
  return NLS_OK;
}

nls_status nls_field_sobolev_norm(const nls_field* f, double s, double* out) {
  NLS_REQUIRE(f);
  NLS_REQUIRE(out);
  return guarded([&] {
    *out = nlslab::sobolev_norm(nlslab::to_spectral(f->value), s);
    return NLS_OK;
  });
}

nls_status nls_field_energy(const nls_field* f, double* out) {
  NLS_REQUIRE(f);
  NLS_REQUIRE(out);
  return guarded([&] {
    *out = nlslab::energy_record(nlslab::to_spectral(f->value), 0.0).E;
    return NLS_OK;
  });
}

nls_status nls_field_write_snapshot(const nls_field* f, double time, const char* path) {
  NLS_REQUIRE(f);
  NLS_REQUIRE(path);
  return guarded([&] {
    nlslab::write_snapshot_file(path, f->value, time);
    return NLS_OK;
  });
}

nls_status nls_field_read_snapshot(const char* path, nls_field** out, double* time) {
  NLS_REQUIRE(path);
  NLS_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    auto snap = nlslab::read_snapshot_file(path);
    if (time) *time = snap.time;
    *out = new nls_field{std::move(snap.field)};
    return NLS_OK;
  });
}

}  // extern "C"
