#pragma once

#include <cstdint>
#include <vector>

#include "projection.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace pstest {

// Two-point multiplier law with mean 0, variance 1 and bounded support:
// P(V = 1-kappa) = kappa/sqrt(5), P(V = kappa) = 1 - kappa/sqrt(5),
// kappa = (sqrt(5)+1)/2.
struct MultiplierSpec {
    double value_lo;
    double value_hi;
    double prob_lo;
    double prob_hi;

    static MultiplierSpec mammen();

    double mean() const { return value_lo * prob_lo + value_hi * prob_hi; }
    double variance() const {
        const double m = mean();
        return (value_lo - m) * (value_lo - m) * prob_lo +
               (value_hi - m) * (value_hi - m) * prob_hi;
    }
};

VectorXd draw_multipliers(Index n, Rng& rng);

struct TestResult {
    StatPair stats;
    VectorXd boot_cvm;  // B replicate statistics
    VectorXd boot_ks;
    double pval_cvm = 1.0;
    double pval_ks = 1.0;
    struct Critical {
        double alpha;
        double cvm;
        double ks;
    };
    std::vector<Critical> crit;  // at the standard alpha grid below
    Index draws = 0;
    std::uint64_t seed = 0;
};

inline constexpr double kAlphaGrid[] = {0.01, 0.05, 0.10};

// One bootstrap replicate of the projected process: the projected weights and
// residuals stay fixed, only the multipliers vary — no refitting.
VectorXd bootstrap_process(const ProjectedProcess& proc, const VectorXd& resid,
                           const VectorXd& v);

// ceil(B*(1-alpha))-th smallest replicate.
double critical_value(const VectorXd& boot, double alpha);

TestResult run_bootstrap(const FittedModel& fitted, const ProjectedProcess& proc, Index draws,
                         std::uint64_t seed);

} // namespace pstest
