#include "kernel_test.hpp"

#include <cmath>

#include "error.hpp"

namespace pstest {

namespace {

void check_pre(const FittedModel& fitted, double h) {
    if (fitted.n() < 2) fail(ErrorCode::invalid_input, "kernel test needs at least 2 observations");
    if (!(h > 0.0)) fail(ErrorCode::invalid_input, "bandwidth must be positive");
}

// One pass over unordered pairs i<j; each unordered pair stands for the two
// symmetric ordered terms of the double sums.
struct PairSums {
    double v = 0.0;  // sum K * e_i e_j
    double s = 0.0;  // sum K^2 * e_i^2 e_j^2
};

PairSums pair_sums(const VectorXd& qhat, const VectorXd& resid, double h) {
    const Index n = qhat.size();
    PairSums out;
    for (Index i = 0; i < n; ++i) {
        const double qi = qhat[i];
        const double ei = resid[i];
        for (Index j = i + 1; j < n; ++j) {
            const double kv = normal_kernel((qi - qhat[j]) / h);
            const double ee = ei * resid[j];
            out.v += kv * ee;
            out.s += kv * kv * ee * ee;
        }
    }
    return out;
}

} // namespace

double vhat_stat(const FittedModel& fitted, double h) {
    check_pre(fitted, h);
    const double n = static_cast<double>(fitted.n());
    const PairSums ps = pair_sums(fitted.qhat, fitted.resid, h);
    return 2.0 * ps.v / (n * (n - 1.0) * h);
}

double sigma_hat_stat(const FittedModel& fitted, double h) {
    check_pre(fitted, h);
    const double n = static_cast<double>(fitted.n());
    const PairSums ps = pair_sums(fitted.qhat, fitted.resid, h);
    const double sigma = 4.0 * ps.s / (n * (n - 1.0) * h);
    if (!(sigma > 0.0))
        fail(ErrorCode::degenerate_variance,
             "variance estimator is zero; residuals carry no signal");
    return sigma;
}

KernelTestResult t_test(const FittedModel& fitted, double c) {
    if (!(c > 0.0)) fail(ErrorCode::invalid_input, "bandwidth constant must be positive");
    const double n = static_cast<double>(fitted.n());
    const double h = c * std::pow(n, -0.125);
    check_pre(fitted, h);

    const PairSums ps = pair_sums(fitted.qhat, fitted.resid, h);
    const double vhat = 2.0 * ps.v / (n * (n - 1.0) * h);
    const double sigma = 4.0 * ps.s / (n * (n - 1.0) * h);
    if (!(sigma > 0.0))
        fail(ErrorCode::degenerate_variance,
             "variance estimator is zero; residuals carry no signal");

    KernelTestResult result;
    result.c = c;
    result.h = h;
    result.vhat = vhat;
    result.sigma_hat = sigma;
    result.t = std::sqrt((n - 1.0) / n) * n * std::sqrt(h) * vhat / std::sqrt(sigma);
    result.pval = normal_sf(result.t);
    return result;
}

} // namespace pstest
