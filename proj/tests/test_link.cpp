#include <doctest.h>

#include <cmath>

#include "link.hpp"
#include "model.hpp"
#include "rng.hpp"

using namespace pstest;

TEST_CASE("link cdf at zero is one half for both families") {
    CHECK(link_cdf(Link::probit, 0.0) == 0.5);
    CHECK(link_cdf(Link::logit, 0.0) == 0.5);
}

TEST_CASE("probit cdf matches the erf oracle at the 97.5% quantile") {
    // Phi(1.959964) = 0.9750000009..., checked against an independent
    // high-precision evaluation of the normal CDF.
    CHECK(std::abs(link_cdf(Link::probit, 1.959964) - 0.975) <= 1e-6);
}

TEST_CASE("link densities at zero") {
    CHECK(link_density(Link::logit, 0.0) == 0.25);
    CHECK(std::abs(link_density(Link::probit, 0.0) - 0.3989423) <= 1e-6);
}

TEST_CASE("density is the derivative of the cdf (central differences)") {
    const double eps = 1e-6;
    for (Link link : {Link::probit, Link::logit}) {
        for (int zi = -3; zi <= 3; ++zi) {
            const double z = static_cast<double>(zi);
            const double fd = (link_cdf(link, z + eps) - link_cdf(link, z - eps)) / (2 * eps);
            CHECK(std::abs(fd - link_density(link, z)) <= 1e-6);
        }
    }
}

TEST_CASE("cdf values are clamped inside the open unit interval") {
    for (Link link : {Link::probit, Link::logit}) {
        CHECK(link_cdf(link, -60.0) >= kProbFloor);
        CHECK(link_cdf(link, 60.0) <= 1.0 - kProbFloor);
        CHECK(link_cdf(link, -60.0) <= link_cdf(link, 60.0));
    }
}

TEST_CASE("cdf is strictly increasing where the probability floor is inactive") {
    for (Link link : {Link::probit, Link::logit}) {
        double prev = link_cdf(link, -6.0);
        for (double z = -5.5; z <= 6.0; z += 0.5) {
            const double cur = link_cdf(link, z);
            CHECK(cur > prev);
            prev = cur;
        }
    }
}

TEST_CASE("gradient_row on hand inputs") {
    VectorXd x(2), theta(2);
    x << 1, 0;
    theta << 0, 5;
    const VectorXd g = gradient_row(Link::logit, x, theta);
    CHECK(g[0] == 0.25);
    CHECK(g[1] == 0.0);

    VectorXd x2(2), theta2(2);
    x2 << 1, 1;
    theta2 << 0, 0;
    const VectorXd g2 = gradient_row(Link::probit, x2, theta2);
    CHECK(std::abs(g2[0] - 0.3989423) <= 1e-6);
    CHECK(std::abs(g2[1] - 0.3989423) <= 1e-6);
}

TEST_CASE("gradient_row matches finite differences of the cdf in each coordinate") {
    Rng rng(7);
    const double eps = 1e-6;
    for (Link link : {Link::probit, Link::logit}) {
        for (int rep = 0; rep < 20; ++rep) {
            VectorXd x(3), theta(3);
            for (int j = 0; j < 3; ++j) {
                x[j] = rng.uniform(-1.5, 1.5);
                theta[j] = rng.uniform(-1.0, 1.0);
            }
            const VectorXd g = gradient_row(link, x, theta);
            for (int j = 0; j < 3; ++j) {
                VectorXd up = theta, dn = theta;
                up[j] += eps;
                dn[j] -= eps;
                const double fd =
                    (link_cdf(link, x.dot(up)) - link_cdf(link, x.dot(dn))) / (2 * eps);
                CHECK(std::abs(fd - g[j]) <= 1e-6);
            }
        }
    }
}

TEST_CASE("normal_sf is the complementary tail") {
    CHECK(normal_sf(0.0) == 0.5);
    CHECK(std::abs(normal_sf(1.959964) - 0.025) <= 1e-6);
    CHECK(normal_sf(10.0) < 1e-20);
    CHECK(normal_sf(10.0) > 0.0);
}
