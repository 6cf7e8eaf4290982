#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "link.hpp"

namespace pstest {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Dataset {
    VectorXd d;                      // binary treatment, length n
    MatrixXd x;                      // n x k design, intercept supplied by caller
    std::vector<std::string> names;  // k column labels (may be empty = unnamed)

    Index n() const { return d.size(); }
    Index k() const { return x.cols(); }
};

// Throws Error(invalid_input) when any Dataset invariant fails:
// n >= k+1, d binary, both classes present, x finite, names consistent.
void validate_dataset(const Dataset& data);

enum class FitMethod { mle, nlls };

struct FittedModel {
    Link link = Link::probit;
    FitMethod method = FitMethod::mle;
    VectorXd theta;        // k
    VectorXd qhat;         // n, clamped to [kProbFloor, 1-kProbFloor]
    VectorXd resid;        // n, d - qhat
    MatrixXd grad;         // n x k, row i = density(x_i'theta) * x_i
    bool converged = false;
    int iterations = 0;
    double gradient_norm = 0.0;  // final sup-norm of the estimating equations
    double objective = 0.0;      // log-likelihood (mle) or sum of squares (nlls)

    Index n() const { return qhat.size(); }
    Index k() const { return theta.size(); }
};

VectorXd gradient_row(Link link, const VectorXd& x, const VectorXd& theta);

FittedModel fit_mle(const Dataset& data, Link link);
FittedModel fit_nlls(const Dataset& data, Link link);
FittedModel fit(const Dataset& data, Link link, FitMethod method);

// Solve a symmetric positive-definite system through an eigendecomposition,
// failing with SingularDesign when the relative reciprocal condition number
// falls below 1e-12. No ridge fallback: a silently regularized matrix would
// change the statistics downstream.
MatrixXd solve_spd(const MatrixXd& a, const MatrixXd& b, const char* what);

} // namespace pstest
