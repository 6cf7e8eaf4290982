#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "helpers.hpp"
#include "projection.hpp"
#include "stats.hpp"

using namespace pstest;
using testutil::dgp1_dataset;
using testutil::hand_model4;

namespace {

ProjectedProcess make_proc(const VectorXd& u_grid, const VectorXd& rp,
                           const std::vector<Index>& obs_knot) {
    ProjectedProcess proc;
    proc.u_grid = u_grid;
    proc.rp = rp;
    proc.obs_knot = obs_knot;
    proc.n = static_cast<Index>(obs_knot.size());
    proc.rp_at_obs.resize(proc.n);
    for (Index i = 0; i < proc.n; ++i) proc.rp_at_obs[i] = rp[obs_knot[i]];
    return proc;
}

ProjectedProcess full_pipeline(const FittedModel& fm) {
    WeightMatrix wmat = build_weights(fm);
    ProjectionParts parts = build_projection(fm, wmat);
    return project_weights(fm, wmat, parts);
}

} // namespace

TEST_CASE("zero process gives zero statistics") {
    VectorXd u(2), rp(2);
    u << 0.3, 0.7;
    rp << 0.0, 0.0;
    const ProjectedProcess proc = make_proc(u, rp, {0, 1});
    CHECK(cvm_stat(proc) == 0.0);
    CHECK(ks_stat(proc) == 0.0);
}

TEST_CASE("two observations at plus and minus one") {
    VectorXd u(2), rp(2);
    u << 0.3, 0.6;
    rp << 1.0, -1.0;
    const ProjectedProcess proc = make_proc(u, rp, {0, 1});
    CHECK(cvm_stat(proc) == 1.0);
    CHECK(ks_stat(proc) == 1.0);
}

TEST_CASE("ks picks the largest absolute knot value") {
    VectorXd u(3), rp(3);
    u << 0.2, 0.5, 0.8;
    rp << 0.3, -0.7, 0.2;
    const ProjectedProcess proc = make_proc(u, rp, {0, 1, 2});
    CHECK(ks_stat(proc) == 0.7);
}

TEST_CASE("cvm equals the knot-mass integral oracle") {
    const FittedModel fm = hand_model4();
    const ProjectedProcess proc = full_pipeline(fm);
    // Independent form: integrate |rp|^2 against the EDF of the fitted
    // propensities, i.e. sum over unique knots weighted by knot mass.
    double oracle = 0.0;
    for (Index j = 0; j < proc.m(); ++j) {
        Index count = 0;
        for (Index i = 0; i < fm.n(); ++i)
            if (fm.qhat[i] == proc.u_grid[j]) ++count;
        oracle += proc.rp[j] * proc.rp[j] * static_cast<double>(count);
    }
    oracle /= static_cast<double>(fm.n());
    CHECK(std::abs(cvm_stat(proc) - oracle) <= 1e-12);
}

TEST_CASE("cvm knot-mass oracle with duplicate fitted values") {
    FittedModel fm;
    fm.link = Link::probit;
    fm.theta = VectorXd::Zero(1);
    fm.qhat.resize(5);
    fm.qhat << 0.3, 0.3, 0.3, 0.7, 0.7;  // masses 3/5 and 2/5
    fm.resid.resize(5);
    fm.resid << 0.7, -0.3, 0.7, -0.6, 0.4;
    fm.grad = MatrixXd::Ones(5, 1);
    const ProjectedProcess proc = full_pipeline(fm);
    REQUIRE(proc.m() == 2);
    const double oracle =
        (proc.rp[0] * proc.rp[0] * 3.0 + proc.rp[1] * proc.rp[1] * 2.0) / 5.0;
    CHECK(std::abs(cvm_stat(proc) - oracle) <= 1e-12);
    // Each observation contributes once, so rp_at_obs repeats knot values.
    CHECK(proc.rp_at_obs[0] == proc.rp[0]);
    CHECK(proc.rp_at_obs[2] == proc.rp[0]);
    CHECK(proc.rp_at_obs[4] == proc.rp[1]);
}

TEST_CASE("ks equals a 10000-point dense-grid recomputation") {
    const FittedModel fm = hand_model4();
    const ProjectedProcess proc = full_pipeline(fm);
    const Index n = fm.n();

    // Naive per-knot values straight from the dense projected weights.
    VectorXd naive(proc.m());
    for (Index j = 0; j < proc.m(); ++j) {
        double sum = 0.0;
        for (Index i = 0; i < n; ++i) sum += fm.resid[i] * proc.pw(i, j);
        naive[j] = sum / std::sqrt(static_cast<double>(n));
    }
    // The process is a step function: its value anywhere on [0,1] is the
    // value at the greatest knot below. Sup over the dense grid therefore
    // cannot exceed — and on well-separated knots exactly attains — the knot
    // maximum.
    double dense_sup = 0.0;
    for (int g = 0; g < 10000; ++g) {
        const double u = g / 9999.0;
        double value = 0.0;
        for (Index j = 0; j < proc.m(); ++j)
            if (proc.u_grid[j] <= u) value = naive[j];
        dense_sup = std::max(dense_sup, std::abs(value));
    }
    double knot_sup = 0.0;
    for (Index j = 0; j < proc.m(); ++j) knot_sup = std::max(knot_sup, std::abs(naive[j]));
    CHECK(dense_sup == knot_sup);
    CHECK(std::abs(ks_stat(proc) - knot_sup) <= 1e-12);
}

TEST_CASE("statistics are invariant to row permutations") {
    const Dataset data = dgp1_dataset(70, derive_key(2026, 700));
    const FittedModel fm = fit_mle(data, Link::probit);
    const ProjectedProcess proc = full_pipeline(fm);
    const StatPair base = compute_stats(proc);

    std::vector<Index> perm(70);
    std::iota(perm.begin(), perm.end(), Index{0});
    Rng rng(23);
    for (Index i = 69; i > 0; --i)
        std::swap(perm[i], perm[static_cast<Index>(rng.uniform() * (i + 1))]);

    // Same parameter, permuted rows: the statistics are symmetric functions
    // of the observations.
    FittedModel shuffled = fm;
    for (Index i = 0; i < 70; ++i) {
        shuffled.qhat[i] = fm.qhat[perm[i]];
        shuffled.resid[i] = fm.resid[perm[i]];
        shuffled.grad.row(i) = fm.grad.row(perm[i]);
    }
    const StatPair permuted = compute_stats(full_pipeline(shuffled));
    CHECK(std::abs(base.cvm - permuted.cvm) <= 1e-12);
    CHECK(std::abs(base.ks - permuted.ks) <= 1e-12);

    // End to end with refitting on the shuffled dataset; fitting tolerance
    // dominates here.
    Dataset sd = data;
    for (Index i = 0; i < 70; ++i) {
        sd.d[i] = data.d[perm[i]];
        sd.x.row(i) = data.x.row(perm[i]);
    }
    const StatPair refit = compute_stats(full_pipeline(fit_mle(sd, Link::probit)));
    CHECK(std::abs(base.cvm - refit.cvm) <= 1e-9);
    CHECK(std::abs(base.ks - refit.ks) <= 1e-9);
}

TEST_CASE("cvm never exceeds the squared ks") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const Dataset data = dgp1_dataset(50, derive_key(2026, 7000 + s));
        const StatPair st = compute_stats(full_pipeline(fit_mle(data, Link::probit)));
        CHECK(st.cvm >= 0.0);
        CHECK(st.ks >= 0.0);
        CHECK(st.cvm <= st.ks * st.ks + 1e-15);
    }
}

TEST_CASE("statistics vanish only for the zero process") {
    VectorXd u(2), rp(2);
    u << 0.4, 0.6;
    rp << 0.0, 1e-9;
    const ProjectedProcess proc = make_proc(u, rp, {0, 1});
    CHECK(cvm_stat(proc) > 0.0);
    CHECK(ks_stat(proc) > 0.0);
}
