#include "bootstrap.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace pstest {

MultiplierSpec MultiplierSpec::mammen() {
    const double kappa = (std::sqrt(5.0) + 1.0) / 2.0;
    MultiplierSpec spec;
    spec.value_lo = 1.0 - kappa;
    spec.value_hi = kappa;
    spec.prob_lo = kappa / std::sqrt(5.0);
    spec.prob_hi = 1.0 - spec.prob_lo;
    return spec;
}

VectorXd draw_multipliers(Index n, Rng& rng) {
    if (n < 1) fail(ErrorCode::invalid_input, "multiplier vector length must be positive");
    static const MultiplierSpec spec = MultiplierSpec::mammen();
    VectorXd v(n);
    for (Index i = 0; i < n; ++i)
        v[i] = rng.uniform() < spec.prob_lo ? spec.value_lo : spec.value_hi;
    return v;
}

VectorXd bootstrap_process(const ProjectedProcess& proc, const VectorXd& resid,
                           const VectorXd& v) {
    if (resid.size() != proc.n || v.size() != proc.n)
        fail(ErrorCode::invalid_input, "residual/multiplier length mismatch");
    return process_values(proc, resid.cwiseProduct(v));
}

double critical_value(const VectorXd& boot, double alpha) {
    const Index b = boot.size();
    if (b < 1) fail(ErrorCode::invalid_input, "no bootstrap replicates");
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::invalid_input, "alpha must be in (0,1)");
    // Small backoff keeps ceil() faithful to the exact rational B*(1-alpha)
    // when the product lands a hair above an integer in floating point.
    Index rank = static_cast<Index>(
        std::ceil(static_cast<double>(b) * (1.0 - alpha) - 1e-9));
    rank = std::clamp<Index>(rank, 1, b);
    std::vector<double> sorted(boot.data(), boot.data() + b);
    std::nth_element(sorted.begin(), sorted.begin() + (rank - 1), sorted.end());
    return sorted[rank - 1];
}

TestResult run_bootstrap(const FittedModel& fitted, const ProjectedProcess& proc, Index draws,
                         std::uint64_t seed) {
    if (draws < 1) fail(ErrorCode::invalid_input, "bootstrap draw count must be positive");
    TestResult result;
    result.stats = compute_stats(proc);
    result.boot_cvm.resize(draws);
    result.boot_ks.resize(draws);
    result.draws = draws;
    result.seed = seed;

    for (Index b = 0; b < draws; ++b) {
        // Counter-based stream per draw: independent of execution order.
        Rng rng(derive_key(seed, 0x626f6f74ULL, static_cast<std::uint64_t>(b)));
        const VectorXd v = draw_multipliers(proc.n, rng);
        const VectorXd rp_b = bootstrap_process(proc, fitted.resid, v);
        const StatPair sp = stats_from_knot_values(proc, rp_b);
        result.boot_cvm[b] = sp.cvm;
        result.boot_ks[b] = sp.ks;
    }

    Index count_cvm = 0, count_ks = 0;
    for (Index b = 0; b < draws; ++b) {
        if (result.boot_cvm[b] >= result.stats.cvm) ++count_cvm;
        if (result.boot_ks[b] >= result.stats.ks) ++count_ks;
    }
    const double denom = static_cast<double>(draws) + 1.0;
    result.pval_cvm = (1.0 + static_cast<double>(count_cvm)) / denom;
    result.pval_ks = (1.0 + static_cast<double>(count_ks)) / denom;

    for (double alpha : kAlphaGrid)
        result.crit.push_back({alpha, critical_value(result.boot_cvm, alpha),
                               critical_value(result.boot_ks, alpha)});
    return result;
}

} // namespace pstest
