#pragma once

#include <cmath>

#include "mc.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace testutil {

using pstest::Dataset;
using pstest::FittedModel;
using pstest::Index;
using pstest::Link;
using pstest::MatrixXd;
using pstest::VectorXd;

// Model with a FIXED theta (nothing estimated): qhat/resid/grad derived
// directly from the parameter, as the hand-dataset oracles require.
inline FittedModel hand_model(Link link, const MatrixXd& x, const VectorXd& d,
                              const VectorXd& theta) {
    FittedModel fm;
    fm.link = link;
    fm.theta = theta;
    const Index n = x.rows();
    fm.qhat.resize(n);
    fm.resid.resize(n);
    fm.grad.resize(n, x.cols());
    for (Index i = 0; i < n; ++i) {
        const double eta = x.row(i).dot(theta);
        fm.qhat[i] = pstest::link_cdf(link, eta);
        fm.resid[i] = d[i] - fm.qhat[i];
        fm.grad.row(i) = pstest::link_density(link, eta) * x.row(i);
    }
    fm.converged = true;
    return fm;
}

// Fixed 4-observation probit design used by the double-loop oracles.
inline Dataset hand_dataset4() {
    Dataset data;
    data.d.resize(4);
    data.d << 1, 0, 1, 0;
    data.x.resize(4, 2);
    data.x << 1.0, 0.5, 1.0, -1.2, 1.0, 0.8, 1.0, 0.1;
    data.names = {"intercept", "x"};
    return data;
}

inline FittedModel hand_model4() {
    Dataset data = hand_dataset4();
    VectorXd theta(2);
    theta << 0.3, -0.2;
    return hand_model(Link::probit, data.x, data.d, theta);
}

inline Dataset dgp1_dataset(Index n, std::uint64_t key) {
    pstest::Rng rng(key);
    return pstest::generate(pstest::DgpSpec{1, n}, rng);
}

} // namespace testutil
