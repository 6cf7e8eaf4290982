#include "projection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"

namespace pstest {

WeightMatrix build_weights(const FittedModel& fitted, bool materialize) {
    const Index n = fitted.n();
    if (n == 0) fail(ErrorCode::invalid_input, "empty fitted model");

    WeightMatrix wmat;
    wmat.n = n;
    wmat.sorted_idx.resize(n);
    std::iota(wmat.sorted_idx.begin(), wmat.sorted_idx.end(), Index{0});
    std::stable_sort(wmat.sorted_idx.begin(), wmat.sorted_idx.end(),
                     [&](Index a, Index b) { return fitted.qhat[a] < fitted.qhat[b]; });

    // Collapse exact duplicates into one knot; keep per-observation mapping.
    wmat.obs_knot.assign(n, 0);
    std::vector<double> knots;
    std::vector<Index> prefix;
    knots.reserve(n);
    prefix.reserve(n);
    for (Index s = 0; s < n; ++s) {
        const double q = fitted.qhat[wmat.sorted_idx[s]];
        if (knots.empty() || q != knots.back()) {
            knots.push_back(q);
            prefix.push_back(s + 1);
        } else {
            prefix.back() = s + 1;
        }
        wmat.obs_knot[wmat.sorted_idx[s]] = static_cast<Index>(knots.size()) - 1;
    }
    wmat.u_grid = Eigen::Map<const VectorXd>(knots.data(), static_cast<Index>(knots.size()));
    wmat.prefix = std::move(prefix);

    if (materialize) materialize_weights(wmat);
    return wmat;
}

void materialize_weights(WeightMatrix& wmat) {
    if (wmat.w.size() != 0) return;
    const Index n = wmat.n;
    const Index m = wmat.m();
    wmat.w.setZero(n, m);
    for (Index i = 0; i < n; ++i)
        for (Index j = wmat.obs_knot[i]; j < m; ++j) wmat.w(i, j) = 1.0;
}

ProjectionParts build_projection(const FittedModel& fitted, const WeightMatrix& wmat) {
    const Index n = fitted.n();
    const Index k = fitted.k();
    const Index m = wmat.m();
    if (wmat.n != n) fail(ErrorCode::invalid_input, "weight matrix does not match fitted model");

    ProjectionParts parts;
    parts.gram = fitted.grad.transpose() * fitted.grad / static_cast<double>(n);

    // gbar columns are running means of gradient rows in qhat order.
    parts.gbar.resize(k, m);
    VectorXd acc = VectorXd::Zero(k);
    Index s = 0;
    for (Index j = 0; j < m; ++j) {
        while (s < wmat.prefix[j]) {
            acc += fitted.grad.row(wmat.sorted_idx[s]).transpose();
            ++s;
        }
        parts.gbar.col(j) = acc / static_cast<double>(n);
    }

    parts.coef = solve_spd(parts.gram, parts.gbar, "projection gram matrix");
    return parts;
}

ProjectedProcess project_weights(const FittedModel& fitted, const WeightMatrix& wmat,
                                 const ProjectionParts& parts, bool materialize_pw) {
    ProjectedProcess proc;
    proc.u_grid = wmat.u_grid;
    proc.sorted_idx = wmat.sorted_idx;
    proc.prefix = wmat.prefix;
    proc.obs_knot = wmat.obs_knot;
    proc.grad = fitted.grad;
    proc.coef = parts.coef;
    proc.n = wmat.n;

    proc.rp = process_values(proc, fitted.resid);
    proc.rp_at_obs.resize(proc.n);
    for (Index i = 0; i < proc.n; ++i) proc.rp_at_obs[i] = proc.rp[proc.obs_knot[i]];

    if (materialize_pw) {
        // pw[i,j] = 1{qhat_i <= u_j} - grad_i' gram^{-1} gbar_j
        proc.pw.noalias() = -fitted.grad * parts.coef;
        for (Index i = 0; i < proc.n; ++i)
            for (Index j = proc.obs_knot[i]; j < proc.m(); ++j) proc.pw(i, j) += 1.0;
    }
    return proc;
}

VectorXd process_values(const ProjectedProcess& proc, const VectorXd& z) {
    const Index n = proc.n;
    const Index m = proc.m();
    if (z.size() != n) fail(ErrorCode::invalid_input, "perturbation vector has wrong length");

    VectorXd cums(m);
    double acc = 0.0;
    Index s = 0;
    for (Index j = 0; j < m; ++j) {
        while (s < proc.prefix[j]) {
            acc += z[proc.sorted_idx[s]];
            ++s;
        }
        cums[j] = acc;
    }
    const VectorXd a = proc.grad.transpose() * z;
    VectorXd rp = cums;
    rp.noalias() -= proc.coef.transpose() * a;
    rp /= std::sqrt(static_cast<double>(n));
    return rp;
}

VectorXd unprojected_process(const FittedModel& fitted, const WeightMatrix& wmat) {
    const Index n = wmat.n;
    const Index m = wmat.m();
    VectorXd out(m);
    double acc = 0.0;
    Index s = 0;
    for (Index j = 0; j < m; ++j) {
        while (s < wmat.prefix[j]) {
            acc += fitted.resid[wmat.sorted_idx[s]];
            ++s;
        }
        out[j] = acc;
    }
    out /= std::sqrt(static_cast<double>(n));
    return out;
}

} // namespace pstest
