#include "pstest/pstest.h"

#include <cstring>
#include <exception>
#include <memory>
#include <string>

#include "bootstrap.hpp"
#include "error.hpp"
#include "kernel_test.hpp"
#include "mc.hpp"
#include "model.hpp"
#include "projection.hpp"

struct pstest_dataset {
    pstest::Dataset data;
};

struct pstest_fit {
    pstest::FittedModel model;
};

struct pstest_test {
    pstest::TestResult result;
};

struct pstest_table {
    pstest::RejectionTable table;
    std::string csv;
    std::string markdown;
};

struct pstest_ecdf {
    pstest::EcdfTable table;
    std::string csv;
};

namespace {

thread_local std::string g_last_error;

pstest_status to_status(pstest::ErrorCode code) {
    switch (code) {
        case pstest::ErrorCode::invalid_input: return PSTEST_ERROR_INVALID_INPUT;
        case pstest::ErrorCode::no_convergence: return PSTEST_ERROR_NO_CONVERGENCE;
        case pstest::ErrorCode::singular_design: return PSTEST_ERROR_SINGULAR_DESIGN;
        case pstest::ErrorCode::degenerate_variance: return PSTEST_ERROR_DEGENERATE_VARIANCE;
        case pstest::ErrorCode::degenerate_draw: return PSTEST_ERROR_DEGENERATE_DRAW;
        case pstest::ErrorCode::internal: return PSTEST_ERROR_INTERNAL;
    }
    return PSTEST_ERROR_INTERNAL;
}

template <typename Fn>
pstest_status guarded(Fn&& fn) noexcept {
    try {
        fn();
        g_last_error.clear();
        return PSTEST_OK;
    } catch (const pstest::Error& err) {
        g_last_error = err.what();
        return to_status(err.code());
    } catch (const std::exception& err) {
        g_last_error = err.what();
        return PSTEST_ERROR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return PSTEST_ERROR_INTERNAL;
    }
}

pstest::Link to_link(pstest_link link) {
    return link == PSTEST_LINK_LOGIT ? pstest::Link::logit : pstest::Link::probit;
}

pstest::FitMethod to_method(pstest_method method) {
    return method == PSTEST_METHOD_NLLS ? pstest::FitMethod::nlls : pstest::FitMethod::mle;
}

} // namespace

extern "C" {

const char* pstest_version(void) { return "1.0.0"; }

const char* pstest_status_name(pstest_status status) {
    switch (status) {
        case PSTEST_OK: return "Ok";
        case PSTEST_ERROR_INTERNAL: return "Internal";
        case PSTEST_ERROR_INVALID_INPUT: return "InvalidInput";
        case PSTEST_ERROR_NO_CONVERGENCE: return "NoConvergence";
        case PSTEST_ERROR_SINGULAR_DESIGN: return "SingularDesign";
        case PSTEST_ERROR_DEGENERATE_VARIANCE: return "DegenerateVariance";
        case PSTEST_ERROR_DEGENERATE_DRAW: return "DegenerateDraw";
    }
    return "Unknown";
}

const char* pstest_last_error(void) { return g_last_error.c_str(); }

/* ---- datasets ---------------------------------------------------------- */

pstest_status pstest_dataset_create(const double* d, const double* x_rowmajor, int64_t n,
                                    int64_t k, const char* const* names, pstest_dataset** out) {
    return guarded([&] {
        if (!d || !x_rowmajor || !out)
            pstest::fail(pstest::ErrorCode::invalid_input, "null pointer argument");
        if (n < 1 || k < 1)
            pstest::fail(pstest::ErrorCode::invalid_input, "dimensions must be positive");
        auto handle = std::make_unique<pstest_dataset>();
        handle->data.d = Eigen::Map<const Eigen::VectorXd>(d, n);
        handle->data.x =
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                           Eigen::RowMajor>>(x_rowmajor, n, k);
        handle->data.names.reserve(static_cast<std::size_t>(k));
        for (int64_t j = 0; j < k; ++j) {
            if (names && names[j])
                handle->data.names.emplace_back(names[j]);
            else
                handle->data.names.emplace_back("x" + std::to_string(j));
        }
        pstest::validate_dataset(handle->data);
        *out = handle.release();
    });
}

void pstest_dataset_free(pstest_dataset* dataset) { delete dataset; }

int64_t pstest_dataset_rows(const pstest_dataset* dataset) {
    return dataset ? dataset->data.n() : 0;
}

int64_t pstest_dataset_cols(const pstest_dataset* dataset) {
    return dataset ? dataset->data.k() : 0;
}

/* ---- model fitting ----------------------------------------------------- */

pstest_status pstest_fit_run(const pstest_dataset* dataset, pstest_link link,
                             pstest_method method, pstest_fit** out) {
    return guarded([&] {
        if (!dataset || !out)
            pstest::fail(pstest::ErrorCode::invalid_input, "null pointer argument");
        auto handle = std::make_unique<pstest_fit>();
        handle->model = pstest::fit(dataset->data, to_link(link), to_method(method));
        *out = handle.release();
    });
}

void pstest_fit_free(pstest_fit* fit) { delete fit; }

int64_t pstest_fit_rows(const pstest_fit* fit) { return fit ? fit->model.n() : 0; }

int64_t pstest_fit_dim(const pstest_fit* fit) { return fit ? fit->model.k() : 0; }

void pstest_fit_theta(const pstest_fit* fit, double* out) {
    if (!fit || !out) return;
    std::memcpy(out, fit->model.theta.data(), sizeof(double) * fit->model.theta.size());
}

void pstest_fit_propensities(const pstest_fit* fit, double* out) {
    if (!fit || !out) return;
    std::memcpy(out, fit->model.qhat.data(), sizeof(double) * fit->model.qhat.size());
}

void pstest_fit_residuals(const pstest_fit* fit, double* out) {
    if (!fit || !out) return;
    std::memcpy(out, fit->model.resid.data(), sizeof(double) * fit->model.resid.size());
}

int pstest_fit_converged(const pstest_fit* fit) {
    return fit && fit->model.converged ? 1 : 0;
}

int64_t pstest_fit_iterations(const pstest_fit* fit) {
    return fit ? fit->model.iterations : 0;
}

double pstest_fit_gradient_norm(const pstest_fit* fit) {
    return fit ? fit->model.gradient_norm : 0.0;
}

double pstest_fit_objective(const pstest_fit* fit) { return fit ? fit->model.objective : 0.0; }

/* ---- projection test ---------------------------------------------------- */

pstest_status pstest_test_run(const pstest_fit* fit, int64_t bootstrap_draws, uint64_t seed,
                              pstest_test** out) {
    return guarded([&] {
        if (!fit || !out)
            pstest::fail(pstest::ErrorCode::invalid_input, "null pointer argument");
        const pstest::WeightMatrix wmat = pstest::build_weights(fit->model, false);
        const pstest::ProjectionParts parts = pstest::build_projection(fit->model, wmat);
        const pstest::ProjectedProcess proc =
            pstest::project_weights(fit->model, wmat, parts, false);
        auto handle = std::make_unique<pstest_test>();
        handle->result = pstest::run_bootstrap(fit->model, proc, bootstrap_draws, seed);
        *out = handle.release();
    });
}

void pstest_test_free(pstest_test* test) { delete test; }

double pstest_test_cvm(const pstest_test* test) { return test ? test->result.stats.cvm : 0.0; }

double pstest_test_ks(const pstest_test* test) { return test ? test->result.stats.ks : 0.0; }

double pstest_test_pval_cvm(const pstest_test* test) {
    return test ? test->result.pval_cvm : 1.0;
}

double pstest_test_pval_ks(const pstest_test* test) { return test ? test->result.pval_ks : 1.0; }

int64_t pstest_test_draws(const pstest_test* test) { return test ? test->result.draws : 0; }

uint64_t pstest_test_seed(const pstest_test* test) { return test ? test->result.seed : 0; }

pstest_status pstest_test_critical(const pstest_test* test, double alpha, double* cvm_crit,
                                   double* ks_crit) {
    return guarded([&] {
        if (!test) pstest::fail(pstest::ErrorCode::invalid_input, "null test handle");
        if (cvm_crit) *cvm_crit = pstest::critical_value(test->result.boot_cvm, alpha);
        if (ks_crit) *ks_crit = pstest::critical_value(test->result.boot_ks, alpha);
    });
}

void pstest_test_boot_cvm(const pstest_test* test, double* out) {
    if (!test || !out) return;
    std::memcpy(out, test->result.boot_cvm.data(),
                sizeof(double) * test->result.boot_cvm.size());
}

void pstest_test_boot_ks(const pstest_test* test, double* out) {
    if (!test || !out) return;
    std::memcpy(out, test->result.boot_ks.data(), sizeof(double) * test->result.boot_ks.size());
}

/* ---- kernel benchmark test ---------------------------------------------- */

pstest_status pstest_kernel_run(const pstest_fit* fit, double c, pstest_kernel_result* out) {
    return guarded([&] {
        if (!fit || !out)
            pstest::fail(pstest::ErrorCode::invalid_input, "null pointer argument");
        const pstest::KernelTestResult kr = pstest::t_test(fit->model, c);
        out->c = kr.c;
        out->h = kr.h;
        out->vhat = kr.vhat;
        out->sigma_hat = kr.sigma_hat;
        out->t = kr.t;
        out->pval = kr.pval;
    });
}

/* ---- simulation experiments --------------------------------------------- */

pstest_status pstest_mc_run(const pstest_mc_config* config, pstest_table** out) {
    return guarded([&] {
        if (!config || !out)
            pstest::fail(pstest::ErrorCode::invalid_input, "null pointer argument");
        pstest::McConfig cfg;
        if (config->dgps && config->n_dgps > 0)
            cfg.dgps.assign(config->dgps, config->dgps + config->n_dgps);
        if (config->sizes && config->n_sizes > 0)
            cfg.sizes.assign(config->sizes, config->sizes + config->n_sizes);
        cfg.replications = config->replications;
        cfg.bootstrap = config->bootstrap_draws;
        if (config->kernel_c && config->n_kernel_c > 0)
            cfg.kernel_c.assign(config->kernel_c, config->kernel_c + config->n_kernel_c);
        if (config->alphas && config->n_alphas > 0)
            cfg.alphas.assign(config->alphas, config->alphas + config->n_alphas);
        cfg.seed = config->seed;
        cfg.method = to_method(config->method);

        auto handle = std::make_unique<pstest_table>();
        handle->table = pstest::run_experiment(cfg);
        handle->csv = pstest::to_csv(handle->table);
        handle->markdown = pstest::to_markdown(handle->table);
        *out = handle.release();
    });
}

void pstest_table_free(pstest_table* table) { delete table; }

int64_t pstest_table_rows(const pstest_table* table) {
    return table ? static_cast<int64_t>(table->table.rows.size()) : 0;
}

pstest_status pstest_table_row(const pstest_table* table, int64_t index, int32_t* dgp,
                               int64_t* n, const char** test_label, double* alpha, double* rate,
                               double* se, int64_t* rejections, int64_t* replications,
                               int64_t* retries, int64_t* abandoned) {
    return guarded([&] {
        if (!table) pstest::fail(pstest::ErrorCode::invalid_input, "null table handle");
        if (index < 0 || index >= static_cast<int64_t>(table->table.rows.size()))
            pstest::fail(pstest::ErrorCode::invalid_input, "row index out of range");
        const pstest::RejectionRow& row = table->table.rows[static_cast<std::size_t>(index)];
        if (dgp) *dgp = row.dgp;
        if (n) *n = row.n;
        if (test_label) *test_label = row.test.c_str();
        if (alpha) *alpha = row.alpha;
        if (rate) *rate = row.rate;
        if (se) *se = row.se;
        if (rejections) *rejections = row.rejections;
        if (replications) *replications = row.replications;
        if (retries) *retries = row.retries;
        if (abandoned) *abandoned = row.abandoned;
    });
}

const char* pstest_table_csv(const pstest_table* table) {
    return table ? table->csv.c_str() : "";
}

const char* pstest_table_markdown(const pstest_table* table) {
    return table ? table->markdown.c_str() : "";
}

/* ---- ECDF comparison ----------------------------------------------------- */

pstest_status pstest_ecdf_run(int64_t n, uint64_t seed, pstest_ecdf** out) {
    return guarded([&] {
        if (!out) pstest::fail(pstest::ErrorCode::invalid_input, "null pointer argument");
        auto handle = std::make_unique<pstest_ecdf>();
        handle->table = pstest::ecdf_comparison(n, seed);
        handle->csv = pstest::to_csv(handle->table);
        *out = handle.release();
    });
}

void pstest_ecdf_free(pstest_ecdf* ecdf) { delete ecdf; }

int64_t pstest_ecdf_size(const pstest_ecdf* ecdf) {
    return ecdf ? ecdf->table.u.size() : 0;
}

void pstest_ecdf_values(const pstest_ecdf* ecdf, double* u, double* misspecified,
                        double* correct) {
    if (!ecdf) return;
    const int64_t m = ecdf->table.u.size();
    if (u) std::memcpy(u, ecdf->table.u.data(), sizeof(double) * m);
    if (misspecified)
        std::memcpy(misspecified, ecdf->table.ecdf_mis.data(), sizeof(double) * m);
    if (correct) std::memcpy(correct, ecdf->table.ecdf_cor.data(), sizeof(double) * m);
}

const char* pstest_ecdf_csv(const pstest_ecdf* ecdf) { return ecdf ? ecdf->csv.c_str() : ""; }

} // extern "C"
