/*
 * pstest — specification tests for parametric propensity-score models.
 *
 * C interface over the projection-based test library: probit/logit fitting,
 * the projected empirical process with Cramer-von Mises / Kolmogorov-Smirnov
 * statistics and multiplier-bootstrap inference, a kernel-smoothing benchmark
 * test, simulation experiments, and ECDF plot data.
 *
 * All handles are opaque; every *_free accepts NULL. Functions that can fail
 * return pstest_status; pstest_last_error() describes the most recent failure
 * on the calling thread.
 */

#ifndef PSTEST_H
#define PSTEST_H

#include <stdint.h>

#if defined(_WIN32)
#define PSTEST_API __declspec(dllexport)
#else
#define PSTEST_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pstest_status {
    PSTEST_OK = 0,
    PSTEST_ERROR_INTERNAL = 1,
    PSTEST_ERROR_INVALID_INPUT = 2,
    PSTEST_ERROR_NO_CONVERGENCE = 3,
    PSTEST_ERROR_SINGULAR_DESIGN = 4,
    PSTEST_ERROR_DEGENERATE_VARIANCE = 5,
    PSTEST_ERROR_DEGENERATE_DRAW = 6
} pstest_status;

typedef enum pstest_link {
    PSTEST_LINK_PROBIT = 0,
    PSTEST_LINK_LOGIT = 1
} pstest_link;

typedef enum pstest_method {
    PSTEST_METHOD_MLE = 0,
    PSTEST_METHOD_NLLS = 1
} pstest_method;

typedef struct pstest_dataset pstest_dataset;
typedef struct pstest_fit pstest_fit;
typedef struct pstest_test pstest_test;
typedef struct pstest_table pstest_table;
typedef struct pstest_ecdf pstest_ecdf;

PSTEST_API const char* pstest_version(void);
PSTEST_API const char* pstest_status_name(pstest_status status);

/* Message for the last failing call on this thread; empty string if none. */
PSTEST_API const char* pstest_last_error(void);

/* ---- datasets ---------------------------------------------------------- */

/*
 * d: n treatment values, each exactly 0 or 1, both classes present.
 * x: n*k design matrix in row-major order; the intercept column, when
 *    wanted, is the caller's responsibility.
 * names: k column labels, or NULL for automatic "x0".."x{k-1}".
 */
PSTEST_API pstest_status pstest_dataset_create(const double* d, const double* x_rowmajor,
                                               int64_t n, int64_t k,
                                               const char* const* names,
                                               pstest_dataset** out);
PSTEST_API void pstest_dataset_free(pstest_dataset* dataset);
PSTEST_API int64_t pstest_dataset_rows(const pstest_dataset* dataset);
PSTEST_API int64_t pstest_dataset_cols(const pstest_dataset* dataset);

/* ---- model fitting ----------------------------------------------------- */

PSTEST_API pstest_status pstest_fit_run(const pstest_dataset* dataset, pstest_link link,
                                        pstest_method method, pstest_fit** out);
PSTEST_API void pstest_fit_free(pstest_fit* fit);
PSTEST_API int64_t pstest_fit_rows(const pstest_fit* fit);
PSTEST_API int64_t pstest_fit_dim(const pstest_fit* fit);
/* Buffers must hold pstest_fit_dim / pstest_fit_rows doubles. */
PSTEST_API void pstest_fit_theta(const pstest_fit* fit, double* out);
PSTEST_API void pstest_fit_propensities(const pstest_fit* fit, double* out);
PSTEST_API void pstest_fit_residuals(const pstest_fit* fit, double* out);
PSTEST_API int pstest_fit_converged(const pstest_fit* fit);
PSTEST_API int64_t pstest_fit_iterations(const pstest_fit* fit);
/* Final sup-norm of the estimating equations. */
PSTEST_API double pstest_fit_gradient_norm(const pstest_fit* fit);
/* Log-likelihood for MLE fits, sum of squared residuals for NLLS fits. */
PSTEST_API double pstest_fit_objective(const pstest_fit* fit);

/* ---- projection test with multiplier bootstrap ------------------------- */

PSTEST_API pstest_status pstest_test_run(const pstest_fit* fit, int64_t bootstrap_draws,
                                         uint64_t seed, pstest_test** out);
PSTEST_API void pstest_test_free(pstest_test* test);
PSTEST_API double pstest_test_cvm(const pstest_test* test);
PSTEST_API double pstest_test_ks(const pstest_test* test);
PSTEST_API double pstest_test_pval_cvm(const pstest_test* test);
PSTEST_API double pstest_test_pval_ks(const pstest_test* test);
PSTEST_API int64_t pstest_test_draws(const pstest_test* test);
PSTEST_API uint64_t pstest_test_seed(const pstest_test* test);
/* Bootstrap critical values at any alpha in (0,1); either out pointer may be NULL. */
PSTEST_API pstest_status pstest_test_critical(const pstest_test* test, double alpha,
                                              double* cvm_crit, double* ks_crit);
/* Buffers must hold pstest_test_draws doubles. */
PSTEST_API void pstest_test_boot_cvm(const pstest_test* test, double* out);
PSTEST_API void pstest_test_boot_ks(const pstest_test* test, double* out);

/* ---- kernel-smoothing benchmark test ----------------------------------- */

typedef struct pstest_kernel_result {
    double c;         /* bandwidth constant */
    double h;         /* bandwidth c * n^(-1/8) */
    double vhat;      /* leave-one-out U-statistic */
    double sigma_hat; /* variance estimator */
    double t;         /* studentized statistic */
    double pval;      /* one-sided upper-tail normal p-value */
} pstest_kernel_result;

PSTEST_API pstest_status pstest_kernel_run(const pstest_fit* fit, double c,
                                           pstest_kernel_result* out);

/* ---- simulation experiments -------------------------------------------- */

typedef struct pstest_mc_config {
    const int32_t* dgps; /* design ids, each 1..10 */
    int64_t n_dgps;
    const int64_t* sizes; /* sample sizes, each >= 30 */
    int64_t n_sizes;
    int64_t replications;
    int64_t bootstrap_draws;
    const double* kernel_c; /* bandwidth constants; NULL/0 to skip the kernel test */
    int64_t n_kernel_c;
    const double* alphas; /* significance levels in (0,1) */
    int64_t n_alphas;
    uint64_t seed;
    pstest_method method;
} pstest_mc_config;

PSTEST_API pstest_status pstest_mc_run(const pstest_mc_config* config, pstest_table** out);
PSTEST_API void pstest_table_free(pstest_table* table);
PSTEST_API int64_t pstest_table_rows(const pstest_table* table);
/*
 * Any out pointer may be NULL. The label pointer stays valid while the table
 * handle lives. rate is the rejection proportion, se its Monte Carlo
 * standard error; retries/abandoned count resampled attempts and abandoned
 * replications for the row's (dgp, n) cell.
 */
PSTEST_API pstest_status pstest_table_row(const pstest_table* table, int64_t index, int32_t* dgp,
                                          int64_t* n, const char** test_label, double* alpha,
                                          double* rate, double* se, int64_t* rejections,
                                          int64_t* replications, int64_t* retries,
                                          int64_t* abandoned);
PSTEST_API const char* pstest_table_csv(const pstest_table* table);
PSTEST_API const char* pstest_table_markdown(const pstest_table* table);

/* ---- fitted-propensity ECDF comparison --------------------------------- */

PSTEST_API pstest_status pstest_ecdf_run(int64_t n, uint64_t seed, pstest_ecdf** out);
PSTEST_API void pstest_ecdf_free(pstest_ecdf* ecdf);
PSTEST_API int64_t pstest_ecdf_size(const pstest_ecdf* ecdf);
/* Each non-NULL buffer must hold pstest_ecdf_size doubles. */
PSTEST_API void pstest_ecdf_values(const pstest_ecdf* ecdf, double* u, double* misspecified,
                                   double* correct);
PSTEST_API const char* pstest_ecdf_csv(const pstest_ecdf* ecdf);

#ifdef __cplusplus
}
#endif

#endif /* PSTEST_H */
