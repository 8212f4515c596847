/*
 * spinbus C API.
 *
 * Every function that can fail returns a spinbus_status; on failure the
 * message is available from spinbus_last_error() on the same thread until
 * the next call into the library. Objects are opaque handles released with
 * their matching _free function. Site indices are 1-based.
 */
#ifndef SPINBUS_SPINBUS_H
#define SPINBUS_SPINBUS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SPINBUS_BUILDING_LIBRARY)
#    define SPINBUS_API __declspec(dllexport)
#  else
#    define SPINBUS_API __declspec(dllimport)
#  endif
#else
#  define SPINBUS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spinbus_status {
  SPINBUS_OK = 0,
  SPINBUS_ERR_PARAMETER = 1,   /* invalid argument */
  SPINBUS_ERR_RESOURCE = 2,    /* dense path above the memory cap */
  SPINBUS_ERR_CONVERGENCE = 3, /* iterative solver did not converge */
  SPINBUS_ERR_STATE = 4,       /* required data (eigenvectors, full spectrum) missing */
  SPINBUS_ERR_USAGE = 5,       /* operation does not apply (odd vs even bus, ...) */
  SPINBUS_ERR_CONFIG = 6,      /* malformed or inconsistent configuration */
  SPINBUS_ERR_IO = 7,
  SPINBUS_ERR_INTERNAL = 99
} spinbus_status;

typedef struct spinbus_spec spinbus_spec;
typedef struct spinbus_spectrum spinbus_spectrum;
typedef struct spinbus_run spinbus_run;

SPINBUS_API const char* spinbus_version(void);
SPINBUS_API const char* spinbus_last_error(void);
SPINBUS_API const char* spinbus_status_name(spinbus_status status);

/* ---- systems ---- */

/* couplings has n-1 entries (chain) or n entries (ring); fields has n. */
SPINBUS_API spinbus_status spinbus_spec_chain(int n, const double* couplings, const double* fields,
                                              spinbus_spec** out);
SPINBUS_API spinbus_status spinbus_spec_ring(int n, const double* couplings, const double* fields,
                                             spinbus_spec** out);
SPINBUS_API spinbus_status spinbus_spec_from_json(const char* json, spinbus_spec** out);
/* The returned string is released with spinbus_string_free. */
SPINBUS_API spinbus_status spinbus_spec_to_json(const spinbus_spec* spec, char** out);
/* Appends a qubit site ('A' or 'B') bonded to bus_site with the given coupling. */
SPINBUS_API spinbus_status spinbus_spec_attach_qubit(const spinbus_spec* bus, char qubit, int bus_site,
                                                     double coupling, spinbus_spec** out);
SPINBUS_API int spinbus_spec_n_sites(const spinbus_spec* spec);
SPINBUS_API void spinbus_spec_free(spinbus_spec* spec);

/* ---- spectra ---- */

SPINBUS_API spinbus_status spinbus_full_spectrum(const spinbus_spec* spec, spinbus_spectrum** out);
SPINBUS_API spinbus_status spinbus_lowest_k(const spinbus_spec* spec, size_t k, spinbus_spectrum** out);
SPINBUS_API size_t spinbus_spectrum_size(const spinbus_spectrum* spectrum);
/* energy and sz may be NULL. */
SPINBUS_API spinbus_status spinbus_spectrum_level(const spinbus_spectrum* spectrum, size_t level, double* energy,
                                                  double* sz);
/* Writes n_sites values of <level|sigma_iz|level> into out (capacity n). */
SPINBUS_API spinbus_status spinbus_local_moments(const spinbus_spectrum* spectrum, size_t level, double* out,
                                                 size_t n);
/* K_ij for axis 'x' or 'z'; needs a full spectrum. warning may be NULL. */
SPINBUS_API spinbus_status spinbus_j2_exact(const spinbus_spectrum* spectrum, int i, int j, char axis, double* k,
                                            int* warning);
SPINBUS_API void spinbus_spectrum_free(spinbus_spectrum* spectrum);

/* ---- commands ---- */

/* Runs spectrum | effective | ensemble | scaling | validate on a JSON
 * config. Output files are held in memory by the run handle. */
SPINBUS_API spinbus_status spinbus_run_command(const char* command, const char* config_json, unsigned threads,
                                               spinbus_run** out);
SPINBUS_API size_t spinbus_run_file_count(const spinbus_run* run);
SPINBUS_API const char* spinbus_run_file_name(const spinbus_run* run, size_t index);
SPINBUS_API spinbus_status spinbus_run_file_content(const spinbus_run* run, size_t index, const char** data,
                                                    size_t* size);
SPINBUS_API size_t spinbus_run_warning_count(const spinbus_run* run);
SPINBUS_API const char* spinbus_run_warning(const spinbus_run* run, size_t index);
/* Fully resolved config as JSON text. */
SPINBUS_API const char* spinbus_run_resolved_config(const spinbus_run* run);
SPINBUS_API void spinbus_run_free(spinbus_run* run);

SPINBUS_API void spinbus_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* SPINBUS_SPINBUS_H */
