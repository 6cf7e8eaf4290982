#pragma once

#include "projection.hpp"

namespace pstest {

struct StatPair {
    double cvm = 0.0;
    double ks = 0.0;
};

// Shared by the observed statistics and every bootstrap replicate so that the
// two paths are bitwise identical (strictly sequential reductions, no SIMD
// reassociation). knot_values holds the process at each knot.
inline StatPair stats_from_knot_values(const ProjectedProcess& proc, const VectorXd& knot_values) {
    StatPair out;
    double cvm = 0.0;
    for (Index i = 0; i < proc.n; ++i) {
        const double r = knot_values[proc.obs_knot[i]];
        cvm += r * r;
    }
    out.cvm = cvm / static_cast<double>(proc.n);
    double ks = 0.0;
    for (Index j = 0; j < knot_values.size(); ++j) ks = std::max(ks, std::abs(knot_values[j]));
    out.ks = ks;
    return out;
}

// CvM_n = (1/n) sum_i rp(qhat_i)^2 — the exact sum form of the EDF integral,
// duplicates included once per observation.
inline double cvm_stat(const ProjectedProcess& proc) {
    return stats_from_knot_values(proc, proc.rp).cvm;
}

// KS_n = sup_u |rp(u)|; the process is a step function jumping only at the
// knots, so the knot maximum is the supremum.
inline double ks_stat(const ProjectedProcess& proc) {
    return stats_from_knot_values(proc, proc.rp).ks;
}

inline StatPair compute_stats(const ProjectedProcess& proc) {
    return stats_from_knot_values(proc, proc.rp);
}

} // namespace pstest
