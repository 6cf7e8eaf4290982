#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "error.hpp"
#include "helpers.hpp"
#include "model.hpp"
#include "projection.hpp"

using namespace pstest;
using testutil::dgp1_dataset;
using testutil::hand_model;
using testutil::hand_model4;

namespace {

FittedModel model_with_qhat(const VectorXd& qhat) {
    FittedModel fm;
    fm.link = Link::probit;
    fm.qhat = qhat;
    fm.resid = VectorXd::Zero(qhat.size());
    fm.grad = MatrixXd::Ones(qhat.size(), 1);
    fm.theta = VectorXd::Zero(1);
    fm.converged = true;
    return fm;
}

// Direct evaluation of the projected process at an arbitrary u, using only
// the definition: indicator minus gradient times gram^{-1} times the
// indicator-restricted gradient mean.
double process_at(const FittedModel& fm, double u) {
    const Index n = fm.n();
    const MatrixXd gram = fm.grad.transpose() * fm.grad / static_cast<double>(n);
    VectorXd gbar = VectorXd::Zero(fm.k());
    for (Index i = 0; i < n; ++i)
        if (fm.qhat[i] <= u) gbar += fm.grad.row(i).transpose();
    gbar /= static_cast<double>(n);
    const VectorXd coef = gram.ldlt().solve(gbar);
    double sum = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double w = fm.qhat[i] <= u ? 1.0 : 0.0;
        sum += fm.resid[i] * (w - fm.grad.row(i).dot(coef));
    }
    return sum / std::sqrt(static_cast<double>(n));
}

} // namespace

TEST_CASE("indicator weights on three distinct fitted values") {
    VectorXd q(3);
    q << 0.2, 0.5, 0.8;
    WeightMatrix wmat = build_weights(model_with_qhat(q));
    REQUIRE(wmat.m() == 3);
    CHECK(wmat.u_grid[0] == 0.2);
    CHECK(wmat.u_grid[1] == 0.5);
    CHECK(wmat.u_grid[2] == 0.8);
    const double expected[3][3] = {{1, 1, 1}, {0, 1, 1}, {0, 0, 1}};
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 3; ++j) CHECK(wmat.w(i, j) == expected[i][j]);
}

TEST_CASE("duplicate fitted values collapse to one knot") {
    VectorXd q(2);
    q << 0.4, 0.4;
    WeightMatrix wmat = build_weights(model_with_qhat(q));
    REQUIRE(wmat.m() == 1);
    CHECK(wmat.u_grid[0] == 0.4);
    CHECK(wmat.w(0, 0) == 1.0);
    CHECK(wmat.w(1, 0) == 1.0);
    CHECK(wmat.obs_knot[0] == 0);
    CHECK(wmat.obs_knot[1] == 0);
    CHECK(wmat.prefix[0] == 2);
}

TEST_CASE("each row has exactly its rank of trailing ones") {
    Rng rng(41);
    VectorXd q(5);
    for (Index i = 0; i < 5; ++i) q[i] = rng.uniform(0.05, 0.95);
    WeightMatrix wmat = build_weights(model_with_qhat(q));
    for (Index i = 0; i < 5; ++i) {
        Index ones = 0;
        bool monotone = true;
        for (Index j = 0; j < wmat.m(); ++j) {
            ones += wmat.w(i, j) == 1.0 ? 1 : 0;
            if (j > 0 && wmat.w(i, j) < wmat.w(i, j - 1)) monotone = false;
        }
        Index rank = 0;  // knots at or above q[i]
        for (Index j = 0; j < wmat.m(); ++j)
            if (wmat.u_grid[j] >= q[i]) ++rank;
        CHECK(ones == rank);
        CHECK(monotone);
        CHECK(wmat.w(i, wmat.m() - 1) == 1.0);
    }
}

TEST_CASE("gram and gbar match a double-loop oracle on the hand dataset") {
    const FittedModel fm = hand_model4();
    WeightMatrix wmat = build_weights(fm);
    ProjectionParts parts = build_projection(fm, wmat);
    const Index n = fm.n(), k = fm.k(), m = wmat.m();

    MatrixXd gram_oracle = MatrixXd::Zero(k, k);
    for (Index i = 0; i < n; ++i)
        for (Index a = 0; a < k; ++a)
            for (Index b = 0; b < k; ++b) gram_oracle(a, b) += fm.grad(i, a) * fm.grad(i, b);
    gram_oracle /= static_cast<double>(n);

    MatrixXd gbar_oracle = MatrixXd::Zero(k, m);
    for (Index j = 0; j < m; ++j)
        for (Index i = 0; i < n; ++i)
            if (fm.qhat[i] <= wmat.u_grid[j])
                for (Index a = 0; a < k; ++a) gbar_oracle(a, j) += fm.grad(i, a);
    gbar_oracle /= static_cast<double>(n);

    CHECK((parts.gram - gram_oracle).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((parts.gbar - gbar_oracle).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((parts.gram - parts.gram.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("unit gradient column gives a unit gram") {
    VectorXd q(4);
    q << 0.1, 0.3, 0.6, 0.9;
    FittedModel fm = model_with_qhat(q);  // grad is a column of ones
    WeightMatrix wmat = build_weights(fm);
    ProjectionParts parts = build_projection(fm, wmat);
    REQUIRE(parts.gram.rows() == 1);
    CHECK(parts.gram(0, 0) == 1.0);
}

TEST_CASE("final gbar column is the gradient column mean") {
    const Dataset data = dgp1_dataset(60, derive_key(2026, 601));
    const FittedModel fm = fit_mle(data, Link::probit);
    WeightMatrix wmat = build_weights(fm);
    ProjectionParts parts = build_projection(fm, wmat);
    const VectorXd mean = fm.grad.colwise().mean().transpose();
    CHECK((parts.gbar.col(wmat.m() - 1) - mean).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("projected weights follow their defining formula") {
    const FittedModel fm = hand_model4();
    WeightMatrix wmat = build_weights(fm);
    ProjectionParts parts = build_projection(fm, wmat);
    ProjectedProcess proc = project_weights(fm, wmat, parts);
    REQUIRE(proc.pw.size() > 0);
    for (Index i = 0; i < fm.n(); ++i)
        for (Index j = 0; j < wmat.m(); ++j) {
            const double expected = wmat.w(i, j) - fm.grad.row(i).dot(parts.coef.col(j));
            CHECK(std::abs(proc.pw(i, j) - expected) <= 1e-12);
        }
}

TEST_CASE("projected process matches the brute-force oracle on the hand dataset") {
    const FittedModel fm = hand_model4();
    WeightMatrix wmat = build_weights(fm);
    ProjectionParts parts = build_projection(fm, wmat);
    ProjectedProcess proc = project_weights(fm, wmat, parts);
    const Index n = fm.n(), m = wmat.m();

    // Independent solve (LDLT rather than the eigendecomposition used by the
    // library) and naive summation order.
    const MatrixXd gram = fm.grad.transpose() * fm.grad / static_cast<double>(n);
    for (Index j = 0; j < m; ++j) {
        VectorXd gbar = VectorXd::Zero(fm.k());
        for (Index i = 0; i < n; ++i)
            if (fm.qhat[i] <= wmat.u_grid[j]) gbar += fm.grad.row(i).transpose();
        gbar /= static_cast<double>(n);
        const VectorXd coef = gram.ldlt().solve(gbar);
        double sum = 0.0;
        for (Index i = 0; i < n; ++i) {
            const double w = fm.qhat[i] <= wmat.u_grid[j] ? 1.0 : 0.0;
            sum += fm.resid[i] * (w - fm.grad.row(i).dot(coef));
        }
        CHECK(std::abs(proc.rp[j] - sum / 2.0) <= 1e-12);  // sqrt(4) = 2
    }
    for (Index i = 0; i < n; ++i) CHECK(proc.rp_at_obs[i] == proc.rp[proc.obs_knot[i]]);
}

TEST_CASE("zero residuals give a zero process") {
    FittedModel fm = hand_model4();
    fm.resid.setZero();
    WeightMatrix wmat = build_weights(fm);
    ProjectionParts parts = build_projection(fm, wmat);
    ProjectedProcess proc = project_weights(fm, wmat, parts);
    CHECK(proc.rp.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(proc.rp_at_obs.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(unprojected_process(fm, wmat).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("projected weights are sample-orthogonal to the gradients") {
    const Dataset data = dgp1_dataset(150, derive_key(2026, 150));
    const FittedModel fm = fit_mle(data, Link::probit);
    WeightMatrix wmat = build_weights(fm);
    ProjectionParts parts = build_projection(fm, wmat);
    ProjectedProcess proc = project_weights(fm, wmat, parts);
    const double scale = fm.grad.cwiseAbs().maxCoeff();
    const MatrixXd cross = fm.grad.transpose() * proc.pw / static_cast<double>(fm.n());
    CHECK(cross.cwiseAbs().maxCoeff() <= 1e-10 * scale);
}

TEST_CASE("projection is idempotent") {
    const Dataset data = dgp1_dataset(100, derive_key(2026, 100));
    const FittedModel fm = fit_mle(data, Link::probit);
    WeightMatrix wmat = build_weights(fm);
    ProjectionParts parts = build_projection(fm, wmat);
    ProjectedProcess proc = project_weights(fm, wmat, parts);
    // Re-project each pw column on the gradient columns: the correction term
    // is gram^{-1} (grad' pw / n), which must vanish.
    const MatrixXd cross = fm.grad.transpose() * proc.pw / static_cast<double>(fm.n());
    const MatrixXd correction = solve_spd(parts.gram, cross, "re-projection");
    const MatrixXd reprojected = proc.pw - fm.grad * correction;
    CHECK((reprojected - proc.pw).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("the process is a right-continuous step function on the knots") {
    const FittedModel fm = hand_model4();
    WeightMatrix wmat = build_weights(fm);
    ProjectionParts parts = build_projection(fm, wmat);
    ProjectedProcess proc = project_weights(fm, wmat, parts);
    const Index m = wmat.m();

    // Below the smallest knot the indicator set is empty: the process is 0.
    CHECK(process_at(fm, wmat.u_grid[0] - 1e-6) == 0.0);
    CHECK(process_at(fm, 0.0) == 0.0);
    // At midpoints between knots it equals the value at the left knot.
    for (Index j = 0; j + 1 < m; ++j) {
        const double mid = 0.5 * (wmat.u_grid[j] + wmat.u_grid[j + 1]);
        CHECK(std::abs(process_at(fm, mid) - proc.rp[j]) <= 1e-12);
    }
    // Beyond the largest knot it stays at the final value.
    CHECK(std::abs(process_at(fm, 1.0) - proc.rp[m - 1]) <= 1e-12);
}

TEST_CASE("unprojected process matches its direct-sum oracle") {
    const FittedModel fm = hand_model4();
    WeightMatrix wmat = build_weights(fm);
    const VectorXd r = unprojected_process(fm, wmat);
    for (Index j = 0; j < wmat.m(); ++j) {
        double sum = 0.0;
        for (Index i = 0; i < fm.n(); ++i)
            if (fm.qhat[i] <= wmat.u_grid[j]) sum += fm.resid[i];
        CHECK(std::abs(r[j] - sum / 2.0) <= 1e-12);
    }
}

TEST_CASE("projection is the identity when gradients are orthogonal to the weights") {
    // Two observations with identical fitted values and opposite gradients:
    // every gbar column is zero, so the projected and raw processes agree.
    FittedModel fm;
    fm.link = Link::probit;
    fm.theta = VectorXd::Zero(1);
    fm.qhat.resize(2);
    fm.qhat << 0.4, 0.4;
    fm.resid.resize(2);
    fm.resid << 0.6, -0.4;
    fm.grad.resize(2, 1);
    fm.grad << 1.0, -1.0;
    fm.converged = true;
    WeightMatrix wmat = build_weights(fm);
    ProjectionParts parts = build_projection(fm, wmat);
    ProjectedProcess proc = project_weights(fm, wmat, parts);
    const VectorXd raw = unprojected_process(fm, wmat);
    CHECK((proc.rp - raw).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("factored evaluation agrees with the dense weight matrix") {
    const Dataset data = dgp1_dataset(90, derive_key(2026, 90));
    const FittedModel fm = fit_mle(data, Link::probit);
    WeightMatrix wmat = build_weights(fm);
    ProjectionParts parts = build_projection(fm, wmat);
    ProjectedProcess proc = project_weights(fm, wmat, parts);
    Rng rng(5);
    VectorXd z(fm.n());
    for (Index i = 0; i < fm.n(); ++i) z[i] = rng.uniform(-1, 1);
    const VectorXd fast = process_values(proc, z);
    const VectorXd dense =
        (proc.pw.transpose() * z) / std::sqrt(static_cast<double>(fm.n()));
    CHECK((fast - dense).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("estimator sensitivity of the raw process shrinks with n") {
    // Under a correctly specified design the raw process evaluated at the
    // estimate decomposes into the process at the truth minus a gradient
    // correction; the remainder vanishes as n grows.
    VectorXd theta0(3);
    theta0 << 1.0, 1.0, 1.0;
    const std::vector<Index> sizes = {250, 1000, 4000};
    const int reps = 21;
    std::vector<double> medians;
    for (Index n : sizes) {
        std::vector<double> sups;
        for (int rep = 0; rep < reps; ++rep) {
            Rng rng(derive_key(909, static_cast<std::uint64_t>(n), rep));
            const Dataset data = generate(DgpSpec{1, n}, rng);
            const FittedModel at_hat = fit_mle(data, Link::probit);
            const FittedModel at_true =
                hand_model(Link::probit, data.x, data.d, theta0);
            WeightMatrix wm_hat = build_weights(at_hat, false);
            WeightMatrix wm_true = build_weights(at_true, false);
            const VectorXd raw_hat = unprojected_process(at_hat, wm_hat);
            const VectorXd raw_true = unprojected_process(at_true, wm_true);
            // Common evaluation grid: deciles of the unit interval.
            double sup = 0.0;
            for (int gi = 1; gi <= 19; ++gi) {
                const double u = gi / 20.0;
                auto value_at = [u](const VectorXd& vals, const VectorXd& grid) {
                    double v = 0.0;
                    for (Index j = 0; j < grid.size(); ++j)
                        if (grid[j] <= u) v = vals[j];
                    return v;
                };
                VectorXd gbar = VectorXd::Zero(3);
                for (Index i = 0; i < n; ++i)
                    if (at_true.qhat[i] <= u) gbar += at_true.grad.row(i).transpose();
                gbar /= static_cast<double>(n);
                const double correction = std::sqrt(static_cast<double>(n)) *
                                          (at_hat.theta - theta0).dot(gbar);
                const double lhs = value_at(raw_hat, wm_hat.u_grid);
                const double rhs = value_at(raw_true, wm_true.u_grid) - correction;
                sup = std::max(sup, std::abs(lhs - rhs));
            }
            sups.push_back(sup);
        }
        std::sort(sups.begin(), sups.end());
        medians.push_back(sups[sups.size() / 2]);
    }
    CHECK(medians[1] < medians[0]);
    CHECK(medians[2] < medians[1]);
}
