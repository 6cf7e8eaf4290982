#pragma once

#include <cmath>

namespace pstest {

enum class Link { probit, logit };

// Fitted probabilities are clamped to [floor, 1-floor] before logs and
// residual-based statistics; prevents log(0) under near-separation.
inline constexpr double kProbFloor = 1e-12;

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

// Upper tail 1 - Phi(z), accurate for large z.
inline double normal_sf(double z) { return 0.5 * std::erfc(z * M_SQRT1_2); }

inline double normal_pdf(double z) {
    static const double inv_sqrt_2pi = 0.3989422804014327;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

inline double clamp_prob(double p) {
    if (p < kProbFloor) return kProbFloor;
    if (p > 1.0 - kProbFloor) return 1.0 - kProbFloor;
    return p;
}

inline double link_cdf(Link link, double z) {
    if (link == Link::probit) return clamp_prob(normal_cdf(z));
    // logistic, computed via the negative tail to avoid overflow
    if (z >= 0.0) return clamp_prob(1.0 / (1.0 + std::exp(-z)));
    double e = std::exp(z);
    return clamp_prob(e / (1.0 + e));
}

inline double link_density(Link link, double z) {
    if (link == Link::probit) return normal_pdf(z);
    double e = std::exp(-std::abs(z));
    double den = 1.0 + e;
    return e / (den * den);
}

} // namespace pstest
