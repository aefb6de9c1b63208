#ifndef IONJC_IONJC_H
#define IONJC_IONJC_H

/* C interface to the trapped-ion nonlinear Jaynes-Cummings solvers.
 *
 * Every fallible call returns an ionjc_status. On failure the message of the
 * most recent error on the calling thread is available from
 * ionjc_last_error(). Strings returned through char** are owned by the caller
 * and released with ionjc_string_free(). */

#include <stddef.h>

#if defined(_WIN32)
#  if defined(IONJC_BUILDING_LIBRARY)
#    define IONJC_API __declspec(dllexport)
#  else
#    define IONJC_API __declspec(dllimport)
#  endif
#else
#  define IONJC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ionjc_status {
  IONJC_OK = 0,
  IONJC_ERR_INVALID_ARGUMENT = 1,
  IONJC_ERR_PARSE = 2,
  IONJC_ERR_VALIDATION = 3,
  IONJC_ERR_UNKNOWN_PRESET = 4,
  IONJC_ERR_IO = 5,
  IONJC_ERR_TRUNCATION = 6,
  IONJC_ERR_DEGENERATE_BLOCK = 7,
  IONJC_ERR_STEP_FAILURE = 8,
  IONJC_ERR_QUADRATURE = 9,
  IONJC_ERR_INTERNAL = 10
} ionjc_status;

typedef struct ionjc_config ionjc_config;
typedef struct ionjc_density ionjc_density;
typedef struct ionjc_ptable ionjc_ptable;

/* Model constants in units of |kappa|. */
typedef struct ionjc_params {
  int k;
  double eta;
  double delta_phi;
  double delta_omega_tilde;
  double nu_tilde;
  double omega21_tilde;
} ionjc_params;

/* Rectangular phase-space grid; flat index j * n_re + i. */
typedef struct ionjc_grid {
  double re_min, re_max;
  int n_re;
  double im_min, im_max;
  int n_im;
} ionjc_grid;

IONJC_API const char* ionjc_version(void);
IONJC_API const char* ionjc_status_name(ionjc_status status);
/* 0 for success, 2 for configuration errors, 3 for numerical failures. */
IONJC_API int ionjc_exit_code(ionjc_status status);
IONJC_API const char* ionjc_last_error(void);
/* Machine-readable form of the last error: {"status","kind","message",...}. */
IONJC_API const char* ionjc_last_error_json(void);
IONJC_API void ionjc_string_free(char* s);

/* Run configuration */
IONJC_API ionjc_status ionjc_config_parse(const char* text, ionjc_config** out);
IONJC_API ionjc_status ionjc_config_load(const char* path, ionjc_config** out);
IONJC_API ionjc_status ionjc_config_preset(const char* name, ionjc_config** out);
IONJC_API ionjc_status ionjc_config_serialize(const ionjc_config* config, char** out);
IONJC_API void ionjc_config_destroy(ionjc_config* config);
/* Comma-separated preset names. */
IONJC_API ionjc_status ionjc_preset_names(char** out);

/* Writes CSV and JSON artifacts into out_dir. summary_json may be NULL. */
IONJC_API ionjc_status ionjc_run(const ionjc_config* config, const char* out_dir, char** summary_json);

/* Excited-state populations. */
IONJC_API ionjc_status ionjc_sigma22_quantized(const ionjc_params* params, double alpha_re, double alpha_im,
                                               double beta_re, double beta_im, const double* t_tilde, size_t n,
                                               double tail_epsilon, double* out);
IONJC_API ionjc_status ionjc_sigma22_time_ordered(const ionjc_params* params, double alpha_re, double alpha_im,
                                                  double r, const double* taus, size_t n, double tol,
                                                  double tail_epsilon, double* out);
/* taus[0] is the initial time. */
IONJC_API ionjc_status ionjc_sigma22_no_ordering(const ionjc_params* params, double alpha_re, double alpha_im,
                                                 double r, const double* taus, size_t n, double tail_epsilon,
                                                 double* out);

/* Reduced motional density matrix */
IONJC_API ionjc_status ionjc_rho_vib(const ionjc_params* params, double t_tilde, double alpha_re, double alpha_im,
                                     double beta_re, double beta_im, int initial_level, double tail_epsilon,
                                     ionjc_density** out);
IONJC_API ionjc_status ionjc_density_from_matrix(size_t dim, const double* re, const double* im,
                                                 ionjc_density** out);
IONJC_API ionjc_status ionjc_density_dim(const ionjc_density* rho, size_t* dim);
/* Row-major copies of the real and imaginary parts; either may be NULL. */
IONJC_API ionjc_status ionjc_density_copy(const ionjc_density* rho, double* re, double* im);
IONJC_API ionjc_status ionjc_density_trace_defect(const ionjc_density* rho, double* out);
IONJC_API void ionjc_density_destroy(ionjc_density* rho);

/* Regularized P function. cache_dir may be NULL to skip the disk cache. */
IONJC_API ionjc_status ionjc_ptable_build(int n_max, const ionjc_grid* grid, double w, int quadrature_order,
                                          const char* cache_dir, ionjc_ptable** out);
IONJC_API ionjc_status ionjc_ptable_grid_size(const ionjc_ptable* table, size_t* size);
/* values holds grid size doubles; quadrature_error and imag_residue may be NULL. */
IONJC_API ionjc_status ionjc_ptable_apply(const ionjc_ptable* table, const ionjc_density* rho, double* values,
                                          double* quadrature_error, double* imag_residue);
IONJC_API void ionjc_ptable_destroy(ionjc_ptable* table);

#ifdef __cplusplus
}
#endif

#endif /* IONJC_IONJC_H */
