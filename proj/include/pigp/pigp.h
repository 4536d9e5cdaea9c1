#ifndef PIGP_PIGP_H
#define PIGP_PIGP_H

#include <stddef.h>

#if defined(_WIN32)
#define PIGP_API __declspec(dllexport)
#else
#define PIGP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pigp_status {
  PIGP_OK = 0,
  PIGP_E_INVALID_ARGUMENT = 1,
  PIGP_E_CONFIG = 2,
  PIGP_E_DATA = 3,
  PIGP_E_NUMERICAL = 4,
  PIGP_E_IO = 5,
  PIGP_E_INTERNAL = 6
} pigp_status;

typedef struct pigp_gp pigp_gp;
typedef struct pigp_rrgp pigp_rrgp;

/* Message of the last failed call on this thread; never NULL. */
PIGP_API const char* pigp_last_error(void);
PIGP_API const char* pigp_version(void);
PIGP_API void pigp_string_free(char* s);

/* Kernel descriptions are JSON objects, e.g.
 *   {"family": "SquaredExponential", "sigma_f": 1.0, "lengthscales": [0.5]}
 *   {"family": "SdofDerived", "zeta": 0.05, "omega_n": 9.42, "sigma2": 1.0}  */
PIGP_API pigp_status pigp_kernel_eval(const char* kernel_json, const double* x, const double* x_prime, size_t dim,
                                      double* out);
PIGP_API pigp_status pigp_spectral_density(const char* kernel_json, double omega, double* out);

/* Row-major inputs X (n x dim). Mean JSON: {"form": "zero"} or
 * {"form": "linear", "theta0": 0.0, "theta": [...]}; NULL means zero. */
PIGP_API pigp_status pigp_gp_fit(const double* X, size_t n, size_t dim, const double* y, const char* kernel_json,
                                 const char* mean_json, double noise_variance, pigp_gp** out);
PIGP_API pigp_status pigp_gp_predict(const pigp_gp* gp, const double* X_star, size_t m, double* mean, double* variance);
PIGP_API pigp_status pigp_gp_log_marginal_likelihood(const pigp_gp* gp, double* out);
PIGP_API void pigp_gp_free(pigp_gp* gp);

/* Domain JSON: {"half_widths": [...], "basis_counts": [...], "boundary": "Dirichlet"}. */
PIGP_API pigp_status pigp_rrgp_fit(const double* X, size_t n, size_t dim, const double* y, const char* kernel_json,
                                   const char* domain_json, double noise_variance, pigp_rrgp** out);
PIGP_API pigp_status pigp_rrgp_predict(const pigp_rrgp* gp, const double* X_star, size_t m, double* mean,
                                       double* variance);
PIGP_API pigp_status pigp_rrgp_log_marginal_likelihood(const pigp_rrgp* gp, double* out);
PIGP_API void pigp_rrgp_free(pigp_rrgp* gp);

PIGP_API pigp_status pigp_nmse(const double* y, const double* f, size_t n, double* out);
PIGP_API pigp_status pigp_coverage(const double* train, size_t n_train, const double* test, size_t n_test, size_t dim,
                                   double* out);

/* Experiment entry points. On success *report_json receives a heap string
 * owned by the caller (release with pigp_string_free). A NULL output_dir
 * selects the configured directory, then $PIGP_OUTPUT_ROOT/<name>. */
PIGP_API pigp_status pigp_run_experiment(const char* config_path, const char* output_dir, char** report_json);
/* Like pigp_run_experiment but rejects configs whose task is not LatentForce. */
PIGP_API pigp_status pigp_run_latent_force(const char* config_path, const char* output_dir, char** report_json);
PIGP_API pigp_status pigp_generate(const char* spec_path, const char* output_dir, char** report_json);
PIGP_API pigp_status pigp_predict(const char* model_dir, const char* data_csv, const char* output_dir,
                                  char** report_json);
/* column may be NULL. */
PIGP_API pigp_status pigp_eval(const char* pred_csv, const char* truth_csv, const char* column, char** report_json);

#ifdef __cplusplus
}
#endif

#endif
