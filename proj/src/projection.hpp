#pragma once

#include <vector>

#include "model.hpp"

namespace pstest {

// Indicator weights w(q,u) = 1{q <= u} evaluated on the jump grid of the
// process: the sorted unique fitted propensities. Between knots the process
// is constant, and it is zero left of the smallest knot, so this grid is
// exact for both the supremum and the EDF integral.
struct WeightMatrix {
    VectorXd u_grid;                // m ascending unique fitted propensities
    MatrixXd w;                     // n x m of {0,1}; empty until materialized
    std::vector<Index> sorted_idx;  // observation indices, ascending by qhat
    std::vector<Index> prefix;      // per knot j: #{i : qhat_i <= u_grid[j]}
    std::vector<Index> obs_knot;    // per observation: its knot index
    Index n = 0;

    Index m() const { return u_grid.size(); }
};

WeightMatrix build_weights(const FittedModel& fitted, bool materialize = true);

// Fills wmat.w from the knot structure if not already present.
void materialize_weights(WeightMatrix& wmat);

struct ProjectionParts {
    MatrixXd gram;  // k x k, (1/n) grad' grad
    MatrixXd gbar;  // k x m, column j = (1/n) sum_i grad_i 1{qhat_i <= u_j}
    MatrixXd coef;  // k x m, gram^{-1} gbar
};

ProjectionParts build_projection(const FittedModel& fitted, const WeightMatrix& wmat);

struct ProjectedProcess {
    VectorXd u_grid;      // m
    VectorXd rp;          // m, process value at each knot
    VectorXd rp_at_obs;   // n, process value at each observation's qhat
    MatrixXd pw;          // n x m projected weights; empty unless materialized
    // Factored evaluation structure, shared with the bootstrap so every
    // process evaluation (observed or multiplier-perturbed) runs through one
    // code path:
    std::vector<Index> sorted_idx;
    std::vector<Index> prefix;
    std::vector<Index> obs_knot;
    MatrixXd grad;  // n x k
    MatrixXd coef;  // k x m
    Index n = 0;

    Index m() const { return u_grid.size(); }
};

// The dense pw matrix is only needed by diagnostics and tests; the Monte
// Carlo hot path passes materialize_pw = false and evaluates the process in
// O(n k + m k) through the knot structure instead of O(n m).
ProjectedProcess project_weights(const FittedModel& fitted, const WeightMatrix& wmat,
                                 const ProjectionParts& parts, bool materialize_pw = true);

// Evaluates rp(z)[j] = (1/sqrt(n)) * sum_i z_i * pw[i,j] for an arbitrary
// per-observation vector z, via the algebraically identical factored form
// ( sum_{qhat_i <= u_j} z_i  -  gbar_j' gram^{-1} (grad' z) ) / sqrt(n).
VectorXd process_values(const ProjectedProcess& proc, const VectorXd& z);

// Unprojected process R_hat(u_j) = (1/sqrt(n)) sum_i resid_i 1{qhat_i <= u_j};
// kept for diagnostics and the estimator-sensitivity decomposition check.
VectorXd unprojected_process(const FittedModel& fitted, const WeightMatrix& wmat);

} // namespace pstest
