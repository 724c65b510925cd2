#ifndef HJFLOW_H
#define HJFLOW_H

/* C interface to the hjflow library. All functions return a status code;
 * on failure hjf_last_error() describes the problem (per thread). Strings
 * returned by the library stay valid until the owning handle is freed, or
 * until the next failing call on the same thread for hjf_last_error(). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HJF_API __declspec(dllexport)
#else
#define HJF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hjf_status {
  HJF_OK = 0,
  HJF_ERR_ARGUMENT = 1,  /* null pointer or invalid argument */
  HJF_ERR_CONFIG = 2,    /* configuration error, see hjf_last_error_field */
  HJF_ERR_NUMERICAL = 3, /* a numerical method missed its accuracy target */
  HJF_ERR_IO = 4,
  HJF_ERR_INTERNAL = 5
} hjf_status;

typedef struct hjf_space hjf_space;
typedef struct hjf_report hjf_report;

HJF_API const char* hjf_version(void);
HJF_API const char* hjf_status_string(hjf_status status);
HJF_API const char* hjf_last_error(void);
/* Dotted config path of the last HJF_ERR_CONFIG, or "" */
HJF_API const char* hjf_last_error_field(void);

/* ---- model spaces ---------------------------------------------------- */

/* spec_json is the "space" block of an experiment config, e.g.
 * {"kind": "euclidean", "dimension": 1, "potential": "quadratic", "kappa": 1} */
HJF_API hjf_status hjf_space_create(const char* spec_json, hjf_space** out);
HJF_API void hjf_space_free(hjf_space* space);
/* number of coordinates of a point */
HJF_API size_t hjf_space_size(const hjf_space* space);
HJF_API double hjf_space_kappa(const hjf_space* space);

/* Points are arrays of hjf_space_size() doubles. */
HJF_API hjf_status hjf_space_distance(const hjf_space* space, const double* x,
                                      const double* y, double* out);
HJF_API hjf_status hjf_space_energy(const hjf_space* space, const double* x,
                                    double* energy, double* slope);
HJF_API hjf_status hjf_space_flow(const hjf_space* space, const double* x,
                                  double t, double* out);

HJF_API hjf_status hjf_psi_eps(double eps, double r, double* out);

/* Tataru distance (eps = 0) or its smoothed form. Up to capacity minimizers
 * are copied; *count receives the total number found. */
HJF_API hjf_status hjf_tataru(const hjf_space* space, const double* pi,
                              const double* mu, double eps, double* value,
                              double* minimizers, size_t capacity,
                              size_t* count);

/* ---- experiments ------------------------------------------------------ */

/* command may be NULL to use the config's own; seed is applied only when
 * has_seed is nonzero. */
HJF_API hjf_status hjf_run_experiment(const char* config_json,
                                      const char* command, int has_seed,
                                      uint64_t seed, hjf_report** out);
HJF_API void hjf_report_free(hjf_report* report);

HJF_API int hjf_report_passed(const hjf_report* report);
HJF_API size_t hjf_report_row_count(const hjf_report* report);
HJF_API size_t hjf_report_failed_count(const hjf_report* report);
HJF_API hjf_status hjf_report_row(const hjf_report* report, size_t index,
                                  const char** check, size_t* instance,
                                  double* value, double* bound,
                                  double* violation, int* pass);
/* Output directory from the config. */
HJF_API const char* hjf_report_output_dir(const hjf_report* report);
HJF_API const char* hjf_report_csv(const hjf_report* report);
HJF_API const char* hjf_report_json(const hjf_report* report);
/* One line per check: name, rows, failed, max violation. */
HJF_API const char* hjf_report_summary(const hjf_report* report);

/* format is "csv" or "json"; writes <dir>/<command>.<ext> plus data tables. */
HJF_API hjf_status hjf_report_write(const hjf_report* report, const char* dir,
                                    const char* format);

#ifdef __cplusplus
}
#endif

#endif
