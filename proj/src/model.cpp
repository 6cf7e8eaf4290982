#include "model.hpp"

#include <cmath>
#include <sstream>

#include "error.hpp"

namespace pstest {

namespace {

constexpr int kMaxIterations = 100;
constexpr int kMaxHalvings = 30;
constexpr double kStepTol = 1e-10;
constexpr double kRcondTol = 1e-12;

double fit_tolerance(Index n) {
    // The stop rule is stated as 1e-8*n, but converged fits must also satisfy
    // the 1e-6 sup-norm bound on the estimating equations at any n.
    return std::min(1e-8 * static_cast<double>(n), 1e-6);
}

struct LinkEval {
    VectorXd q;      // clamped probabilities
    VectorXd score;  // per-obs d(loglik)/dz
    VectorXd wgt;    // per-obs negative second derivative (Newton weights)
    double loglik = 0.0;
};

LinkEval eval_mle(const VectorXd& d, const MatrixXd& x, const VectorXd& theta, Link link) {
    const Index n = d.size();
    LinkEval ev;
    ev.q.resize(n);
    ev.score.resize(n);
    ev.wgt.resize(n);
    const VectorXd z = x * theta;
    double ll = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double zi = z[i];
        const double qi = link_cdf(link, zi);
        ev.q[i] = qi;
        if (link == Link::probit) {
            const double phi = normal_pdf(zi);
            const double u = d[i] == 1.0 ? phi / qi : -phi / (1.0 - qi);
            ev.score[i] = u;
            ev.wgt[i] = u * (zi + u);  // observed information, positive for both classes
        } else {
            ev.score[i] = d[i] - qi;
            ev.wgt[i] = link_density(link, zi);
        }
        ll += d[i] == 1.0 ? std::log(qi) : std::log1p(-qi);
    }
    ev.loglik = ll;
    return ev;
}

struct NllsEval {
    VectorXd q;
    VectorXd resid;
    MatrixXd jac;  // n x k rows density(z_i) * x_i
    double sse = 0.0;
};

NllsEval eval_nlls(const VectorXd& d, const MatrixXd& x, const VectorXd& theta, Link link) {
    const Index n = d.size();
    NllsEval ev;
    ev.q.resize(n);
    ev.resid.resize(n);
    ev.jac.resize(n, x.cols());
    const VectorXd z = x * theta;
    for (Index i = 0; i < n; ++i) {
        ev.q[i] = link_cdf(link, z[i]);
        ev.resid[i] = d[i] - ev.q[i];
        ev.jac.row(i) = link_density(link, z[i]) * x.row(i);
    }
    ev.sse = ev.resid.squaredNorm();
    return ev;
}

MatrixXd gradient_matrix(const MatrixXd& x, const VectorXd& theta, Link link) {
    const VectorXd z = x * theta;
    MatrixXd g(x.rows(), x.cols());
    for (Index i = 0; i < x.rows(); ++i) g.row(i) = link_density(link, z[i]) * x.row(i);
    return g;
}

FittedModel finish(const Dataset& data, Link link, FitMethod method, const VectorXd& theta,
                   int iterations, double gradient_norm, double objective) {
    FittedModel fm;
    fm.link = link;
    fm.method = method;
    fm.theta = theta;
    const VectorXd z = data.x * theta;
    fm.qhat.resize(data.n());
    for (Index i = 0; i < data.n(); ++i) fm.qhat[i] = link_cdf(link, z[i]);
    fm.resid = data.d - fm.qhat;
    fm.grad = gradient_matrix(data.x, theta, link);
    fm.converged = true;
    fm.iterations = iterations;
    fm.gradient_norm = gradient_norm;
    fm.objective = objective;
    return fm;
}

// A binary-response fit whose residuals all vanish numerically can only come
// from a separating configuration: the likelihood has no interior maximizer.
void reject_separation(const VectorXd& d, const VectorXd& q) {
    double worst = 0.0;
    for (Index i = 0; i < d.size(); ++i) worst = std::max(worst, std::abs(d[i] - q[i]));
    if (worst <= 1e-4)
        fail(ErrorCode::no_convergence,
             "perfectly separated data: the likelihood has no interior maximum");
}

} // namespace

void validate_dataset(const Dataset& data) {
    const Index n = data.n();
    const Index k = data.k();
    if (n == 0 || k == 0) fail(ErrorCode::invalid_input, "empty dataset");
    if (data.x.rows() != n)
        fail(ErrorCode::invalid_input, "treatment vector and design matrix row counts differ");
    if (n < k + 1) {
        std::ostringstream msg;
        msg << "need at least k+1 = " << (k + 1) << " observations, got " << n;
        fail(ErrorCode::invalid_input, msg.str());
    }
    bool seen0 = false, seen1 = false;
    for (Index i = 0; i < n; ++i) {
        const double di = data.d[i];
        if (di != 0.0 && di != 1.0) {
            std::ostringstream msg;
            msg << "treatment value at row " << i << " is " << di << ", expected 0 or 1";
            fail(ErrorCode::invalid_input, msg.str());
        }
        (di == 0.0 ? seen0 : seen1) = true;
    }
    if (!seen0 || !seen1)
        fail(ErrorCode::invalid_input, "treatment is constant; both classes must be present");
    if (!data.x.allFinite())
        fail(ErrorCode::invalid_input, "design matrix contains non-finite entries");
    if (!data.names.empty() && static_cast<Index>(data.names.size()) != k)
        fail(ErrorCode::invalid_input, "column label count does not match design matrix");
}

VectorXd gradient_row(Link link, const VectorXd& x, const VectorXd& theta) {
    return link_density(link, x.dot(theta)) * x;
}

MatrixXd solve_spd(const MatrixXd& a, const MatrixXd& b, const char* what) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
    if (es.info() != Eigen::Success)
        fail(ErrorCode::singular_design, std::string(what) + ": eigendecomposition failed");
    const VectorXd& ev = es.eigenvalues();
    const double lo = ev.minCoeff();
    const double hi = ev.maxCoeff();
    const double rcond = lo / hi;
    if (!(rcond >= kRcondTol)) {
        std::ostringstream msg;
        msg << what << " is numerically singular (reciprocal condition " << rcond << ")";
        fail(ErrorCode::singular_design, msg.str());
    }
    return es.eigenvectors() *
           es.eigenvalues().cwiseInverse().asDiagonal() *
           (es.eigenvectors().transpose() * b);
}

FittedModel fit_mle(const Dataset& data, Link link) {
    validate_dataset(data);
    const Index n = data.n();
    const Index k = data.k();
    const double tol = fit_tolerance(n);

    VectorXd theta = VectorXd::Zero(k);
    LinkEval ev = eval_mle(data.d, data.x, theta, link);
    int iter = 0;
    for (; iter < kMaxIterations; ++iter) {
        const VectorXd score = data.x.transpose() * ev.score;
        const double gnorm = score.lpNorm<Eigen::Infinity>();
        if (gnorm <= tol) {
            reject_separation(data.d, ev.q);
            return finish(data, link, FitMethod::mle, theta, iter, gnorm, ev.loglik);
        }
        const MatrixXd hess =
            data.x.transpose() * ev.wgt.asDiagonal() * data.x;
        const VectorXd step = solve_spd(hess, score, "log-likelihood Hessian");
        double lambda = 1.0;
        VectorXd trial;
        LinkEval trial_ev;
        for (int h = 0; h <= kMaxHalvings; ++h) {
            trial = theta + lambda * step;
            trial_ev = eval_mle(data.d, data.x, trial, link);
            if (trial_ev.loglik > ev.loglik || h == kMaxHalvings) break;
            lambda *= 0.5;
        }
        const double step_norm = (lambda * step).norm();
        theta = trial;
        ev = std::move(trial_ev);
        if (step_norm <= kStepTol) {
            reject_separation(data.d, ev.q);
            const double gn =
                (data.x.transpose() * ev.score).lpNorm<Eigen::Infinity>();
            return finish(data, link, FitMethod::mle, theta, iter + 1, gn, ev.loglik);
        }
    }
    fail(ErrorCode::no_convergence, "maximum-likelihood iteration cap reached");
}

FittedModel fit_nlls(const Dataset& data, Link link) {
    validate_dataset(data);
    const Index n = data.n();
    const Index k = data.k();
    const double tol = fit_tolerance(n);

    VectorXd theta = VectorXd::Zero(k);
    NllsEval ev = eval_nlls(data.d, data.x, theta, link);
    int iter = 0;
    for (; iter < kMaxIterations; ++iter) {
        const VectorXd normal_eq = ev.jac.transpose() * ev.resid;
        const double gnorm = normal_eq.lpNorm<Eigen::Infinity>();
        if (gnorm <= tol) {
            reject_separation(data.d, ev.q);
            return finish(data, link, FitMethod::nlls, theta, iter, gnorm, ev.sse);
        }
        const MatrixXd gram = ev.jac.transpose() * ev.jac;
        const VectorXd step = solve_spd(gram, normal_eq, "least-squares Gauss-Newton matrix");
        double lambda = 1.0;
        VectorXd trial;
        NllsEval trial_ev;
        for (int h = 0; h <= kMaxHalvings; ++h) {
            trial = theta + lambda * step;
            trial_ev = eval_nlls(data.d, data.x, trial, link);
            if (trial_ev.sse < ev.sse || h == kMaxHalvings) break;
            lambda *= 0.5;
        }
        const double step_norm = (lambda * step).norm();
        theta = trial;
        ev = std::move(trial_ev);
        if (step_norm <= kStepTol) {
            reject_separation(data.d, ev.q);
            const double gn =
                (ev.jac.transpose() * ev.resid).lpNorm<Eigen::Infinity>();
            return finish(data, link, FitMethod::nlls, theta, iter + 1, gn, ev.sse);
        }
    }
    fail(ErrorCode::no_convergence, "least-squares iteration cap reached");
}

FittedModel fit(const Dataset& data, Link link, FitMethod method) {
    return method == FitMethod::mle ? fit_mle(data, link) : fit_nlls(data, link);
}

} // namespace pstest
