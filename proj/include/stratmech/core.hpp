#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stratmech {

using FeatureVector = std::vector<double>;

// Thrown when a model is structurally unable to produce the requested number:
// invisible quality direction, unbounded linear improvement, and friends.
struct degenerate_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad input data: unreadable or malformed files, dimension clashes between
// user-supplied artifacts.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ───────────────────────── small vector helpers ─────────────────────────

namespace vec {

inline void check_same_dim(std::size_t a, std::size_t b) {
    if (a != b) throw std::invalid_argument("dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

inline double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline double dot(const FeatureVector& a, const FeatureVector& b) {
    check_same_dim(a.size(), b.size());
    return dot(a.data(), b.data(), a.size());
}

inline double norm(const FeatureVector& a) { return std::sqrt(dot(a.data(), a.data(), a.size())); }

inline double distance(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline void check_finite(const FeatureVector& x) {
    for (double v : x)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature entry");
}

// Renormalizes to unit length after checking the caller was already within
// tol of unit, so downstream algebra can rely on ||w|| = 1 to machine
// precision rather than to tol.
inline FeatureVector unitize(FeatureVector w, double tol, const char* what) {
    const double nrm = norm(w);
    if (std::abs(nrm - 1.0) > tol) throw std::invalid_argument(std::string(what) + ": vector is not unit length");
    for (double& v : w) v /= nrm;
    return w;
}

inline bool lex_less(const FeatureVector& a, const FeatureVector& b) {
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        if (a[i] != b[i]) return a[i] < b[i];
    }
    return a.size() < b.size();
}

}  // namespace vec

// ───────────────────────── domain types ─────────────────────────

struct CostModel {
    explicit CostModel(double cost_per_unit) : c(cost_per_unit) {
        if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("CostModel: c must be positive and finite");
    }
    double c;
    double ell() const { return 1.0 / c; }  // width of the movement margin
};

enum class Transform { identity, logistic, sign };

// True quality f(x) = h(w.x - b) with monotone h. Identity output is a raw
// affine value, deliberately not clipped to [0,1]: gains are differences and
// clipping would break the threshold gain identity.
struct QualityFunction {
    FeatureVector w;  // unit
    double b = 0.0;
    Transform transform = Transform::identity;
    double scale = 1.0;  // logistic steepness divisor

    QualityFunction(FeatureVector w_in, double b_in, Transform t = Transform::identity, double s = 1.0)
        : w(vec::unitize(std::move(w_in), 1e-9, "QualityFunction")), b(b_in), transform(t), scale(s) {
        if (t == Transform::logistic && !(s > 0.0)) throw std::invalid_argument("QualityFunction: logistic scale must be > 0");
    }

    double margin(const FeatureVector& x) const { return vec::dot(w, x) - b; }

    double operator()(const FeatureVector& x) const { return apply(margin(x)); }

    double apply(double m) const {
        switch (transform) {
            case Transform::identity: return m;
            case Transform::logistic: return 1.0 / (1.0 + std::exp(-m / scale));
            case Transform::sign: return m >= 0.0 ? 1.0 : 0.0;  // sign(0) = 1: boundary counts as accepted
        }
        return m;
    }
};

// Orthonormal row basis of the visible subspace. P = basis^T basis, so
// applying the basis twice is the identity on coefficients and P^2 = P holds
// by construction.
struct Projection {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<double> basis;  // k x n row-major

    Projection(std::size_t n_in, std::vector<std::vector<double>> rows) {
        n = n_in;
        k = rows.size();
        if (k == 0 || k > n) throw std::invalid_argument("Projection: need 1..n basis rows");
        basis.reserve(k * n);
        for (const auto& row : rows) {
            if (row.size() != n) throw std::invalid_argument("Projection: basis row has wrong length");
            basis.insert(basis.end(), row.begin(), row.end());
        }
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i; j < k; ++j) {
                const double d = vec::dot(row(i), row(j), n);
                const double want = i == j ? 1.0 : 0.0;
                if (std::abs(d - want) > 1e-9) throw std::invalid_argument("Projection: basis rows not orthonormal");
            }
        }
    }

    const double* row(std::size_t i) const { return basis.data() + i * n; }

    // coefficients of x in the basis (length k)
    FeatureVector coefficients(const FeatureVector& x) const {
        vec::check_same_dim(x.size(), n);
        FeatureVector c(k);
        for (std::size_t i = 0; i < k; ++i) c[i] = vec::dot(row(i), x.data(), n);
        return c;
    }

    FeatureVector lift(const FeatureVector& coeff) const {
        vec::check_same_dim(coeff.size(), k);
        FeatureVector out(n, 0.0);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < n; ++j) out[j] += coeff[i] * row(i)[j];
        return out;
    }

    FeatureVector apply(const FeatureVector& x) const { return lift(coefficients(x)); }

    static Projection identity(std::size_t n) {
        std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) rows[i][i] = 1.0;
        return Projection(n, std::move(rows));
    }

    // visible coordinate axes, 0-based
    static Projection coords(std::size_t n, const std::vector<std::size_t>& dims) {
        std::vector<std::vector<double>> rows;
        rows.reserve(dims.size());
        for (std::size_t d : dims) {
            if (d >= n) throw std::invalid_argument("Projection::coords: axis out of range");
            std::vector<double> row(n, 0.0);
            row[d] = 1.0;
            rows.push_back(std::move(row));
        }
        return Projection(n, std::move(rows));
    }
};

inline FeatureVector project(const Projection& p, const FeatureVector& x) { return p.apply(x); }

inline bool in_image(const Projection& p, const FeatureVector& w, double tol = 1e-9) {
    const FeatureVector pw = p.apply(w);
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double d = w[i] - pw[i];
        s += d * d;
    }
    return std::sqrt(s) <= tol;
}

// g(x) = w.x - b, norm capped by R.
struct LinearMechanism {
    FeatureVector w;
    double b = 0.0;
    double R = 1.0;

    LinearMechanism(FeatureVector w_in, double b_in, double cap) : w(std::move(w_in)), b(b_in), R(cap) {
        if (!(R > 0.0)) throw std::invalid_argument("LinearMechanism: R must be > 0");
        vec::check_finite(w);
        if (vec::norm(w) > R + 1e-9) throw std::invalid_argument("LinearMechanism: ||w|| exceeds cap R");
    }

    double operator()(const FeatureVector& x) const { return vec::dot(w, x) - b; }
};

// g(x) = 1(w.x - b >= 0) with unit w.
struct ThresholdMechanism {
    FeatureVector w;  // unit
    double b = 0.0;

    ThresholdMechanism(FeatureVector w_in, double b_in)
        : w(vec::unitize(std::move(w_in), 1e-9, "ThresholdMechanism")), b(b_in) {}

    double margin(const FeatureVector& x) const { return vec::dot(w, x) - b; }
    double operator()(const FeatureVector& x) const { return margin(x) >= 0.0 ? 1.0 : 0.0; }
};

// Finite population standing in for the distribution. Flat row-major storage;
// points are only appended, never mutated, so views stay valid.
struct Provenance {
    std::string generator;  // kind tag, or "file"
    std::uint64_t seed = 0;
    double r = 0.0;
    double sigma = 0.0;          // 0 until smoothed
    std::uint64_t smooth_seed = 0;
    std::string sampler;         // noise source name once smoothed
    std::string path;            // file-backed sets only
};

struct SampleSet {
    std::size_t n = 0;
    double r = 0.0;  // declared radius of the pre-noise base
    std::vector<double> data;  // m x n row-major
    Provenance provenance;

    SampleSet() = default;
    SampleSet(std::size_t dim, double radius) : n(dim), r(radius) {
        if (n == 0) throw std::invalid_argument("SampleSet: dimension must be >= 1");
        if (!(r > 0.0)) throw std::invalid_argument("SampleSet: radius must be > 0");
    }

    std::size_t size() const { return n == 0 ? 0 : data.size() / n; }
    bool empty() const { return data.empty(); }
    const double* point(std::size_t i) const { return data.data() + i * n; }

    FeatureVector point_vec(std::size_t i) const {
        const double* p = point(i);
        return FeatureVector(p, p + n);
    }

    void push(const FeatureVector& x) {
        vec::check_same_dim(x.size(), n);
        vec::check_finite(x);
        data.insert(data.end(), x.begin(), x.end());
    }

    void require_nonempty() const {
        if (empty()) throw std::invalid_argument("SampleSet: empty sample set");
    }
};

// ───────────────────────── best-response calculus ─────────────────────────

enum class Response { stay, move, unbounded };

struct BestResponseOutcome {
    Response kind = Response::stay;
    FeatureVector new_point;  // empty when unbounded
    double cost_paid = 0.0;
};

inline double cost(const FeatureVector& x, const FeatureVector& y, const CostModel& cm) {
    vec::check_same_dim(x.size(), y.size());
    return cm.c * vec::distance(x.data(), y.data(), x.size());
}

inline double utility(const LinearMechanism& g, const FeatureVector& x, const FeatureVector& y, const CostModel& cm) {
    return g(y) - cost(x, y, cm);
}

inline double utility(const ThresholdMechanism& g, const FeatureVector& x, const FeatureVector& y, const CostModel& cm) {
    return g(y) - cost(x, y, cm);
}

// A linear score is improved at rate ||w|| per unit distance, so the agent
// either stays put (c > ||w||) or runs off to infinity (c <= ||w||).
inline BestResponseOutcome best_response_linear(const LinearMechanism& g, const FeatureVector& x, const CostModel& cm) {
    vec::check_same_dim(g.w.size(), x.size());
    const double wn = vec::norm(g.w);
    if (cm.c > wn) return {Response::stay, x, 0.0};
    return {Response::unbounded, {}, std::numeric_limits<double>::infinity()};
}

// Agents inside the margin band [-ell, 0] move straight to the boundary; the
// tie at exactly -ell (utility 0) moves, deterministically. Everyone else
// stays, including gap = 0 where the prescribed move has zero displacement.
inline BestResponseOutcome best_response_threshold(const ThresholdMechanism& g, const FeatureVector& x, const CostModel& cm) {
    vec::check_same_dim(g.w.size(), x.size());
    const double gap = g.margin(x);
    const double ell = cm.ell();
    if (gap < -ell || gap >= 0.0) return {Response::stay, x, 0.0};
    FeatureVector moved = x;
    for (std::size_t i = 0; i < moved.size(); ++i) moved[i] -= gap * g.w[i];
    return {Response::move, std::move(moved), cm.c * (-gap)};
}

inline double eval_quality(const QualityFunction& f, const FeatureVector& x) { return f(x); }

}  // namespace stratmech
