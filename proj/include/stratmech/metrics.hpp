#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "stratmech/core.hpp"
#include "stratmech/detail/sum.hpp"

namespace stratmech {

struct GainReport {
    double val = 0.0;
    double baseline = 0.0;
    double gain = 0.0;
    bool unbounded_flag = false;
    std::size_t m = 0;
};

namespace detail {

inline double mean_quality(const SampleSet& s, const QualityFunction& f) {
    Accumulator acc;
    const std::size_t m = s.size();
    for (std::size_t i = 0; i < m; ++i) {
        const double* x = s.point(i);
        acc.add(f.apply(vec::dot(f.w.data(), x, s.n) - f.b));
    }
    return acc.value() / static_cast<double>(m);
}

}  // namespace detail

inline GainReport val(const ThresholdMechanism& g, const SampleSet& s, const QualityFunction& f, const CostModel& cm) {
    s.require_nonempty();
    vec::check_same_dim(g.w.size(), s.n);
    vec::check_same_dim(f.w.size(), s.n);
    const std::size_t m = s.size();
    const double ell = cm.ell();
    detail::Accumulator after;
    detail::Accumulator before;
    FeatureVector moved(s.n);
    for (std::size_t i = 0; i < m; ++i) {
        const double* x = s.point(i);
        const double fx = f.apply(vec::dot(f.w.data(), x, s.n) - f.b);
        const double gap = vec::dot(g.w.data(), x, s.n) - g.b;
        before.add(fx);
        if (gap >= -ell && gap < 0.0) {
            // land on the boundary and re-evaluate quality at the new point
            for (std::size_t j = 0; j < s.n; ++j) moved[j] = x[j] - gap * g.w[j];
            after.add(f.apply(vec::dot(f.w.data(), moved.data(), s.n) - f.b));
        } else {
            after.add(fx);
        }
    }
    GainReport rep;
    rep.m = m;
    rep.baseline = before.value() / static_cast<double>(m);
    rep.val = after.value() / static_cast<double>(m);
    rep.gain = rep.val - rep.baseline;
    return rep;
}

inline GainReport val(const LinearMechanism& g, const SampleSet& s, const QualityFunction& f, const CostModel& cm) {
    s.require_nonempty();
    vec::check_same_dim(g.w.size(), s.n);
    vec::check_same_dim(f.w.size(), s.n);
    GainReport rep;
    rep.m = s.size();
    rep.baseline = detail::mean_quality(s, f);
    if (cm.c <= vec::norm(g.w)) {
        rep.unbounded_flag = true;
        rep.val = std::numeric_limits<double>::quiet_NaN();
        rep.gain = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }
    rep.val = rep.baseline;  // nobody moves
    rep.gain = 0.0;
    return rep;
}

template <typename Mechanism>
GainReport gain(const Mechanism& g, const SampleSet& s, const QualityFunction& f, const CostModel& cm) {
    return val(g, s, f, cm);
}

// Monte Carlo standard error of the gain estimate: std of per-point quality
// improvements over sqrt(m).
inline double gain_standard_error(const ThresholdMechanism& g, const SampleSet& s, const QualityFunction& f, const CostModel& cm) {
    s.require_nonempty();
    const std::size_t m = s.size();
    const double ell = cm.ell();
    detail::Accumulator mean_acc;
    std::vector<double> delta(m);
    FeatureVector moved(s.n);
    for (std::size_t i = 0; i < m; ++i) {
        const double* x = s.point(i);
        const double fx = f.apply(vec::dot(f.w.data(), x, s.n) - f.b);
        const double gap = vec::dot(g.w.data(), x, s.n) - g.b;
        double fy = fx;
        if (gap >= -ell && gap < 0.0) {
            for (std::size_t j = 0; j < s.n; ++j) moved[j] = x[j] - gap * g.w[j];
            fy = f.apply(vec::dot(f.w.data(), moved.data(), s.n) - f.b);
        }
        delta[i] = fy - fx;
        mean_acc.add(delta[i]);
    }
    const double mean = mean_acc.value() / static_cast<double>(m);
    detail::Accumulator var_acc;
    for (double d : delta) var_acc.add((d - mean) * (d - mean));
    if (m < 2) return 0.0;
    const double var = var_acc.value() / static_cast<double>(m - 1);
    return std::sqrt(var / static_cast<double>(m));
}

// Window membership is canonical across the library: p is inside [b - ell, b]
// iff p >= edge and p <= b with edge = b - ell rounded once. The sorted-array
// scanners use the same test, so counts agree bit for bit.
inline double margin_density(const SampleSet& s, const FeatureVector& w, double b, double ell) {
    s.require_nonempty();
    if (!(ell > 0.0)) throw std::invalid_argument("margin_density: ell must be > 0");
    vec::check_same_dim(w.size(), s.n);
    const std::size_t m = s.size();
    const double edge = b - ell;
    std::size_t inside = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double p = vec::dot(w.data(), s.point(i), s.n);
        if (p >= edge && p <= b) ++inside;
    }
    return static_cast<double>(inside) / static_cast<double>(m);
}

inline double soft_margin_density(const SampleSet& s, const FeatureVector& w, double b, double ell) {
    s.require_nonempty();
    if (!(ell > 0.0)) throw std::invalid_argument("soft_margin_density: ell must be > 0");
    vec::check_same_dim(w.size(), s.n);
    const std::size_t m = s.size();
    const double edge = b - ell;
    detail::Accumulator acc;
    for (std::size_t i = 0; i < m; ++i) {
        const double p = vec::dot(w.data(), s.point(i), s.n);
        if (p >= edge && p <= b) acc.add(b - p);
    }
    return acc.value() / static_cast<double>(m);
}

// Gain identity for threshold mechanisms over identity-transform quality:
// gain = (w_g.w_f) * soft margin density at width 1/c. Must agree with the
// simulated gain to 1e-9 on the same samples.
inline double gain_closed_form(const ThresholdMechanism& g, const SampleSet& s, const QualityFunction& f, const CostModel& cm) {
    if (f.transform != Transform::identity)
        throw std::invalid_argument("gain_closed_form: requires identity-transform quality");
    return vec::dot(g.w, f.w) * soft_margin_density(s, g.w, g.b, cm.ell());
}

// Fraction of samples strictly within distance 1/c of the acceptance
// halfspace of a sign-transform quality function, members included. The
// best-response simulation moves the tie at exactly distance 1/c while this
// closed form excludes it; the difference sits on a measure-zero set.
inline double reachable_mass(const SampleSet& s, const QualityFunction& f_binary, const CostModel& cm) {
    s.require_nonempty();
    if (f_binary.transform != Transform::sign)
        throw std::invalid_argument("reachable_mass: quality must be a sign threshold");
    vec::check_same_dim(f_binary.w.size(), s.n);
    const double ell = cm.ell();
    const std::size_t m = s.size();
    std::size_t reachable = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double gap = vec::dot(f_binary.w.data(), s.point(i), s.n) - f_binary.b;
        if (gap > -ell) ++reachable;  // gap >= 0 accepted outright, else distance to boundary is -gap
    }
    return static_cast<double>(reachable) / static_cast<double>(m);
}

// General-predicate variant: acceptance is probed through caller-supplied
// candidate points (a finite stand-in for the acceptance set).
inline double reachable_mass(const SampleSet& s, const std::function<bool(const FeatureVector&)>& accepted,
                             const std::vector<FeatureVector>& candidates, const CostModel& cm) {
    s.require_nonempty();
    std::vector<const FeatureVector*> anchors;
    for (const auto& c : candidates)
        if (accepted(c)) anchors.push_back(&c);
    const double ell = cm.ell();
    const std::size_t m = s.size();
    std::size_t reachable = 0;
    for (std::size_t i = 0; i < m; ++i) {
        FeatureVector x = s.point_vec(i);
        bool ok = accepted(x);
        for (std::size_t a = 0; !ok && a < anchors.size(); ++a)
            ok = vec::distance(x.data(), anchors[a]->data(), s.n) < ell;
        if (ok) ++reachable;
    }
    return static_cast<double>(reachable) / static_cast<double>(m);
}

}  // namespace stratmech
