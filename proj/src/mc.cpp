#include "mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "error.hpp"
#include "projection.hpp"

namespace pstest {

namespace {

constexpr double kSqrt2Inv = 0.7071067811865476;  // 1/sqrt(2)

std::string format_double(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

std::string kernel_label(double c) { return "T(" + format_double("%.2f", c) + ")"; }

} // namespace

DgpDraw draw_dgp(const DgpSpec& spec, Rng& rng) {
    if (spec.id < 1 || spec.id > 10) fail(ErrorCode::invalid_input, "dgp id must be 1..10");
    if (spec.n < 30) fail(ErrorCode::invalid_input, "dgp sample size must be at least 30");
    const Index n = spec.n;

    // Column-at-a-time draw order: Z1, Z2, (X3..X10,) epsilon.
    VectorXd z1(n), z2(n);
    for (Index i = 0; i < n; ++i) z1[i] = rng.normal();
    for (Index i = 0; i < n; ++i) z2[i] = rng.normal();

    DgpDraw draw;
    const Index p = DgpSpec::high_dimensional(spec.id) ? 10 : 2;
    draw.covariates.resize(n, p);
    draw.covariates.col(0) = z1;
    draw.covariates.col(1) = kSqrt2Inv * (z1 + z2);
    for (Index c = 2; c < p; ++c)
        for (Index i = 0; i < n; ++i) draw.covariates(i, c) = rng.normal();

    VectorXd eps(n);
    switch (spec.id) {
        case 4:
            for (Index i = 0; i < n; ++i) {
                const double z = rng.normal();
                eps[i] = z * z;  // chi-squared with one degree of freedom
            }
            break;
        case 5:
            for (Index i = 0; i < n; ++i) eps[i] = rng.uniform(-1.0, 1.0);
            break;
        default:
            if (DgpSpec::high_dimensional(spec.id)) {
                const double scale = std::sqrt(10.0);  // N(0,10): variance 10
                for (Index i = 0; i < n; ++i) eps[i] = scale * rng.normal();
            } else {
                for (Index i = 0; i < n; ++i) eps[i] = rng.normal();
            }
            break;
    }

    const auto& x = draw.covariates;
    VectorXd index(n);
    for (Index i = 0; i < n; ++i) {
        double v = 0.0;
        switch (spec.id) {
            case 1:
            case 4:
            case 5: v = 1.0 + x(i, 0) + x(i, 1); break;
            case 2: v = 1.0 + x(i, 0) + x(i, 1) + x(i, 0) * x(i, 1); break;
            case 3: {
                const double b = 1.0 + x(i, 0) + x(i, 1);
                v = b * b;
                break;
            }
            default: {
                v = 1.0 + x.row(i).sum();
                if (spec.id == 7) v -= x(i, 0) * x(i, 1);
                if (spec.id == 8 || spec.id == 10)
                    v -= x(i, 0) * (x(i, 1) + x(i, 2) + x(i, 3) + x(i, 4));
                if (spec.id == 9 || spec.id == 10)
                    v -= x(i, 0) * x(i, 0) + x(i, 1) * x(i, 1) + x(i, 2) * x(i, 2) +
                         x(i, 3) * x(i, 3) + x(i, 4) * x(i, 4);
                break;
            }
        }
        index[i] = v;
    }

    draw.d.resize(n);
    for (Index i = 0; i < n; ++i) draw.d[i] = index[i] - eps[i] > 0.0 ? 1.0 : 0.0;
    return draw;
}

Dataset generate(const DgpSpec& spec, Rng& rng) {
    DgpDraw draw = draw_dgp(spec, rng);
    const double first = draw.d[0];
    bool constant = true;
    for (Index i = 1; i < draw.d.size(); ++i)
        if (draw.d[i] != first) {
            constant = false;
            break;
        }
    if (constant)
        fail(ErrorCode::degenerate_draw, "sampled treatment vector is constant");

    Dataset data;
    data.d = std::move(draw.d);
    const Index p = draw.covariates.cols();
    data.x.resize(spec.n, p + 1);
    data.x.col(0).setOnes();
    data.x.rightCols(p) = draw.covariates;
    data.names.reserve(p + 1);
    data.names.push_back("intercept");
    for (Index c = 1; c <= p; ++c) data.names.push_back("x" + std::to_string(c));
    return data;
}

void validate_config(const McConfig& cfg) {
    if (cfg.dgps.empty()) fail(ErrorCode::invalid_input, "no dgp ids given");
    for (int id : cfg.dgps)
        if (id < 1 || id > 10) fail(ErrorCode::invalid_input, "dgp id must be 1..10");
    if (cfg.sizes.empty()) fail(ErrorCode::invalid_input, "no sample sizes given");
    for (Index n : cfg.sizes)
        if (n < 30) fail(ErrorCode::invalid_input, "sample sizes must be at least 30");
    if (cfg.replications < 1) fail(ErrorCode::invalid_input, "replications must be positive");
    if (cfg.bootstrap < 1) fail(ErrorCode::invalid_input, "bootstrap draws must be positive");
    if (cfg.alphas.empty()) fail(ErrorCode::invalid_input, "no alpha levels given");
    for (double a : cfg.alphas)
        if (!(a > 0.0 && a < 1.0)) fail(ErrorCode::invalid_input, "alpha levels must be in (0,1)");
    for (double c : cfg.kernel_c)
        if (!(c > 0.0)) fail(ErrorCode::invalid_input, "bandwidth constants must be positive");
    if (cfg.retry_cap < 1) fail(ErrorCode::invalid_input, "retry cap must be positive");
}

CellStats run_cell(int dgp, Index n, const McConfig& cfg) {
    validate_config(cfg);
    CellStats cell;
    cell.tn_pval.resize(cfg.kernel_c.size());

    const DgpSpec spec{dgp, n};
    for (Index rep = 0; rep < cfg.replications; ++rep) {
        bool done = false;
        for (Index attempt = 0; attempt < cfg.retry_cap && !done; ++attempt) {
            // Stream key: (seed, dgp, n, rep, attempt). Retries draw fresh
            // data; the key excludes the estimator so MLE/NLLS runs pair up.
            const std::uint64_t key =
                derive_key(cfg.seed, static_cast<std::uint64_t>(dgp),
                           static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep),
                           static_cast<std::uint64_t>(attempt));
            if (attempt > 0) ++cell.retries;
            try {
                Rng data_rng(derive_key(key, 1));
                const Dataset data = generate(spec, data_rng);
                const FittedModel fm = fit(data, Link::probit, cfg.method);
                const WeightMatrix wmat = build_weights(fm, /*materialize=*/false);
                const ProjectionParts parts = build_projection(fm, wmat);
                const ProjectedProcess proc =
                    project_weights(fm, wmat, parts, /*materialize_pw=*/false);
                const TestResult tr = run_bootstrap(fm, proc, cfg.bootstrap, derive_key(key, 2));

                std::vector<double> tn;
                tn.reserve(cfg.kernel_c.size());
                for (double c : cfg.kernel_c) tn.push_back(t_test(fm, c).pval);

                cell.pval_cvm.push_back(tr.pval_cvm);
                cell.pval_ks.push_back(tr.pval_ks);
                for (std::size_t ci = 0; ci < tn.size(); ++ci)
                    cell.tn_pval[ci].push_back(tn[ci]);
                done = true;
            } catch (const Error& err) {
                if (err.code() == ErrorCode::invalid_input ||
                    err.code() == ErrorCode::internal)
                    throw;  // configuration bug, not sampling noise
            }
        }
        if (!done) ++cell.abandoned;
    }
    return cell;
}

namespace {

RejectionRow make_row(int dgp, Index n, std::string test, double alpha,
                      const std::vector<double>& pvals, const CellStats& cell) {
    RejectionRow row;
    row.dgp = dgp;
    row.n = n;
    row.test = std::move(test);
    row.alpha = alpha;
    row.replications = static_cast<Index>(pvals.size());
    for (double p : pvals)
        if (p <= alpha) ++row.rejections;
    if (row.replications > 0) {
        row.rate = static_cast<double>(row.rejections) / static_cast<double>(row.replications);
        row.se = std::sqrt(row.rate * (1.0 - row.rate) / static_cast<double>(row.replications));
    }
    row.retries = cell.retries;
    row.abandoned = cell.abandoned;
    return row;
}

} // namespace

RejectionTable run_experiment(const McConfig& cfg) {
    validate_config(cfg);
    RejectionTable table;
    table.replications = cfg.replications;
    table.bootstrap = cfg.bootstrap;
    table.seed = cfg.seed;

    for (int dgp : cfg.dgps) {
        for (Index n : cfg.sizes) {
            const CellStats cell = run_cell(dgp, n, cfg);
            for (double alpha : cfg.alphas) {
                table.rows.push_back(make_row(dgp, n, "CvM", alpha, cell.pval_cvm, cell));
                table.rows.push_back(make_row(dgp, n, "KS", alpha, cell.pval_ks, cell));
                for (std::size_t ci = 0; ci < cfg.kernel_c.size(); ++ci)
                    table.rows.push_back(make_row(dgp, n, kernel_label(cfg.kernel_c[ci]), alpha,
                                                  cell.tn_pval[ci], cell));
            }
        }
    }
    return table;
}

std::string to_csv(const RejectionTable& table) {
    std::ostringstream out;
    out << "dgp,n,test,alpha,rate,mc_se,rejections,replications,bootstrap,seed,retries,abandoned\n";
    for (const auto& row : table.rows) {
        out << row.dgp << ',' << row.n << ',' << row.test << ','
            << format_double("%g", row.alpha) << ',' << format_double("%.6f", row.rate) << ','
            << format_double("%.6f", row.se) << ',' << row.rejections << ',' << row.replications
            << ',' << table.bootstrap << ',' << table.seed << ',' << row.retries << ','
            << row.abandoned << '\n';
    }
    return out.str();
}

std::string to_markdown(const RejectionTable& table) {
    std::ostringstream out;
    out << "Rejection rates (" << table.replications << " replications, " << table.bootstrap
        << " bootstrap draws, seed " << table.seed << ")\n\n";
    out << "| dgp | n | test | alpha | rate | mc se | retries | abandoned |\n";
    out << "|----:|--:|:-----|------:|-----:|------:|--------:|----------:|\n";
    for (const auto& row : table.rows) {
        out << "| " << row.dgp << " | " << row.n << " | " << row.test << " | "
            << format_double("%g", row.alpha) << " | " << format_double("%.4f", row.rate)
            << " | " << format_double("%.4f", row.se) << " | " << row.retries << " | "
            << row.abandoned << " |\n";
    }
    return out.str();
}

EcdfTable ecdf_comparison(Index n, std::uint64_t seed) {
    if (n < 100) fail(ErrorCode::invalid_input, "ecdf comparison needs n >= 100");

    Rng rng(derive_key(seed, 7, static_cast<std::uint64_t>(n)));
    const DgpDraw draw = draw_dgp(DgpSpec{7, n}, rng);
    if (draw.d.minCoeff() == draw.d.maxCoeff())
        fail(ErrorCode::degenerate_draw, "sampled treatment vector is constant");

    Dataset mis;
    mis.d = draw.d;
    mis.x.resize(n, 11);
    mis.x.col(0).setOnes();
    mis.x.rightCols(10) = draw.covariates;

    Dataset cor;
    cor.d = draw.d;
    cor.x.resize(n, 12);
    cor.x.leftCols(11) = mis.x;
    cor.x.col(11) = draw.covariates.col(0).cwiseProduct(draw.covariates.col(1));

    const FittedModel fit_mis = fit_mle(mis, Link::probit);
    const FittedModel fit_cor = fit_mle(cor, Link::probit);

    std::vector<double> qm(fit_mis.qhat.data(), fit_mis.qhat.data() + n);
    std::vector<double> qc(fit_cor.qhat.data(), fit_cor.qhat.data() + n);
    std::sort(qm.begin(), qm.end());
    std::sort(qc.begin(), qc.end());

    std::vector<double> grid;
    grid.reserve(2 * n);
    grid.insert(grid.end(), qm.begin(), qm.end());
    grid.insert(grid.end(), qc.begin(), qc.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    EcdfTable table;
    table.n = n;
    table.seed = seed;
    const Index m = static_cast<Index>(grid.size());
    table.u.resize(m);
    table.ecdf_mis.resize(m);
    table.ecdf_cor.resize(m);
    for (Index j = 0; j < m; ++j) {
        table.u[j] = grid[j];
        table.ecdf_mis[j] =
            static_cast<double>(std::upper_bound(qm.begin(), qm.end(), grid[j]) - qm.begin()) /
            static_cast<double>(n);
        table.ecdf_cor[j] =
            static_cast<double>(std::upper_bound(qc.begin(), qc.end(), grid[j]) - qc.begin()) /
            static_cast<double>(n);
    }
    return table;
}

std::string to_csv(const EcdfTable& table) {
    std::ostringstream out;
    out << "u,ecdf_misspecified,ecdf_correct\n";
    for (Index j = 0; j < table.u.size(); ++j) {
        out << format_double("%.17g", table.u[j]) << ','
            << format_double("%.17g", table.ecdf_mis[j]) << ','
            << format_double("%.17g", table.ecdf_cor[j]) << '\n';
    }
    return out.str();
}

} // namespace pstest
