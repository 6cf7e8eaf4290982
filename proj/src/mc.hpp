#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bootstrap.hpp"
#include "kernel_test.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace pstest {

struct DgpSpec {
    int id = 1;   // 1..10
    Index n = 0;  // >= 30

    // Designs 1-5 carry covariates (X1, X2); 6-10 carry (X1, ..., X10).
    // X1 = Z1, X2 = (Z1+Z2)/sqrt(2), Z1,Z2 iid N(0,1); the rest iid N(0,1).
    static bool high_dimensional(int id) { return id >= 6; }
};

// One draw of the design: treatment plus the raw covariate columns
// (misspecification terms live only in the latent index, never in the
// returned covariates).
struct DgpDraw {
    VectorXd d;
    MatrixXd covariates;  // n x 2 or n x 10
};

DgpDraw draw_dgp(const DgpSpec& spec, Rng& rng);

// Null design: intercept + raw covariates with labels. Throws DegenerateDraw
// when the sampled treatment is constant (retry policy lives in the runner).
Dataset generate(const DgpSpec& spec, Rng& rng);

struct McConfig {
    std::vector<int> dgps;
    std::vector<Index> sizes;
    Index replications = 1000;
    Index bootstrap = 499;
    std::vector<double> kernel_c;  // empty = skip the kernel test
    std::vector<double> alphas = {0.05};
    std::uint64_t seed = 0;
    FitMethod method = FitMethod::mle;
    Index retry_cap = 100;
};

void validate_config(const McConfig& cfg);

// Raw per-replication p-values for one (dgp, n) cell; the acceptance checks
// consume these directly and run_experiment aggregates them into rates.
struct CellStats {
    std::vector<double> pval_cvm;
    std::vector<double> pval_ks;
    std::vector<std::vector<double>> tn_pval;  // [c index][replication]
    Index retries = 0;    // resampled attempts beyond the first, summed
    Index abandoned = 0;  // replications given up after the retry cap
};

CellStats run_cell(int dgp, Index n, const McConfig& cfg);

struct RejectionRow {
    int dgp = 0;
    Index n = 0;
    std::string test;  // "CvM", "KS", "T(0.10)", ...
    double alpha = 0.0;
    Index rejections = 0;
    Index replications = 0;  // completed replications
    double rate = 0.0;
    double se = 0.0;  // sqrt(rate*(1-rate)/replications)
    Index retries = 0;
    Index abandoned = 0;
};

struct RejectionTable {
    std::vector<RejectionRow> rows;
    Index replications = 0;
    Index bootstrap = 0;
    std::uint64_t seed = 0;
};

RejectionTable run_experiment(const McConfig& cfg);

std::string to_csv(const RejectionTable& table);
std::string to_markdown(const RejectionTable& table);

// Fitted-propensity ECDF comparison on a single draw: misspecified null
// design (main effects) versus the correctly specified design (main effects
// plus the X1*X2 interaction the latent index actually contains).
struct EcdfTable {
    VectorXd u;         // pooled sorted unique fitted propensities
    VectorXd ecdf_mis;  // ECDF of the misspecified fit at u
    VectorXd ecdf_cor;  // ECDF of the correct fit at u
    Index n = 0;
    std::uint64_t seed = 0;
};

EcdfTable ecdf_comparison(Index n, std::uint64_t seed);

std::string to_csv(const EcdfTable& table);

} // namespace pstest
