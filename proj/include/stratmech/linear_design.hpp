#pragma once

#include <cmath>

#include "stratmech/core.hpp"

namespace stratmech {

// The gain-optimal linear mechanism points along the visible shadow of the
// quality direction: w_g = R * (P w_f)/||P w_f||, bias 0. Depends on (P, w_f,
// R) only, never on the data.
inline LinearMechanism optimal_linear(const Projection& p, const QualityFunction& f, double R) {
    if (!(R > 0.0)) throw std::invalid_argument("optimal_linear: R must be > 0");
    vec::check_same_dim(f.w.size(), p.n);
    FeatureVector pw = p.apply(f.w);
    const double nrm = vec::norm(pw);
    if (nrm <= 1e-12)
        throw degenerate_error("optimal_linear: invisible quality direction (||P w_f|| = 0)");
    for (double& v : pw) v *= R / nrm;
    return LinearMechanism(std::move(pw), 0.0, R);
}

enum class LinearRegime { inert, unbounded };

// c > ||w_g||: no agent moves, gain 0. Otherwise improvement is unbounded.
inline LinearRegime linear_regime(const LinearMechanism& g, const CostModel& cm) {
    return cm.c > vec::norm(g.w) ? LinearRegime::inert : LinearRegime::unbounded;
}

inline const char* regime_name(LinearRegime r) {
    return r == LinearRegime::inert ? "inert" : "unbounded";
}

}  // namespace stratmech
