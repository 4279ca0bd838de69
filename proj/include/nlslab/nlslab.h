#ifndef NLSLAB_NLSLAB_H
#define NLSLAB_NLSLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NLS_API __declspec(dllexport)
#elif defined(__GNUC__)
#define NLS_API __attribute__((visibility("default")))
#else
#define NLS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. The nonzero values match the CLI exit codes. */
typedef enum nls_status {
  NLS_OK = 0,
  NLS_ERR_CONFIG = 1, /* bad scenario, bad argument, I/O */
  NLS_ERR_NUMERICAL = 2,
  NLS_ERR_VERIFICATION = 3
} nls_status;

typedef struct nls_scenario nls_scenario;
typedef struct nls_field nls_field;

/* Message of the last failed call on this thread ("" if none). */
NLS_API const char* nls_last_error(void);
NLS_API const char* nls_version(void);

/* Scenarios */
NLS_API nls_status nls_scenario_load(const char* path, nls_scenario** out);
NLS_API nls_status nls_scenario_parse(const char* text, nls_scenario** out);
NLS_API void nls_scenario_free(nls_scenario* scn);
NLS_API nls_status nls_scenario_set_seed(nls_scenario* scn, uint64_t seed);
/* Normalized text; release with nls_string_free. */
NLS_API nls_status nls_scenario_serialize(const nls_scenario* scn, char** out);

/* Runs a subcommand and writes its side files under out_dir (NULL: the
   scenario's [output] dir). *report_json receives the report; release it with
   nls_string_free. A failed verify returns NLS_ERR_VERIFICATION and still
   fills *report_json. */
NLS_API nls_status nls_run(const nls_scenario* scn, const char* subcommand, const char* out_dir,
                           char** report_json);
NLS_API void nls_string_free(char* s);

/* Fields on the torus grid with n^d points, d in 1..3. Values are interleaved
   (re, im) pairs in row-major physical order, 2 n^d doubles. */
NLS_API nls_status nls_field_create(int d, int n, nls_field** out);
NLS_API void nls_field_free(nls_field* f);
NLS_API size_t nls_field_size(const nls_field* f);
NLS_API nls_status nls_field_set_physical(nls_field* f, const double* values, size_t count);
NLS_API nls_status nls_field_get_physical(const nls_field* f, double* values, size_t count);
NLS_API nls_status nls_field_sobolev_norm(const nls_field* f, double s, double* out);
/* E = mass / 2 + grad / 2 + quartic / 4. */
NLS_API nls_status nls_field_energy(const nls_field* f, double* out);
NLS_API nls_status nls_field_write_snapshot(const nls_field* f, double time, const char* path);
NLS_API nls_status nls_field_read_snapshot(const char* path, nls_field** out, double* time);

#ifdef __cplusplus
}
#endif

#endif
