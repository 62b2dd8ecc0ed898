#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "stratmech/core.hpp"
#include "stratmech/detail/numfmt.hpp"
#include "stratmech/detail/rng.hpp"

namespace stratmech {

// ───────────────────────── generators ─────────────────────────

struct GeneratorSpec {
    enum class Kind { uniform_ball, uniform_box, line_segment, gaussian_mixture, file };

    Kind kind = Kind::uniform_ball;
    std::size_t n = 1;
    double r = 1.0;
    std::uint64_t seed = 0;

    std::size_t axis = 0;                  // line_segment, 0-based
    std::vector<FeatureVector> centers;    // gaussian_mixture
    double spread = 0.1;                   // gaussian_mixture
    std::string path;                      // file

    static const char* kind_name(Kind k) {
        switch (k) {
            case Kind::uniform_ball: return "uniform_ball";
            case Kind::uniform_box: return "uniform_box";
            case Kind::line_segment: return "line_segment";
            case Kind::gaussian_mixture: return "gaussian_mixture";
            case Kind::file: return "file";
        }
        return "?";
    }
};

struct SmoothingSpec {
    double sigma = 0.0;
};

// Dataset CSV: header x1..xn, one row per point, '.' decimals, LF endings,
// every number at 17 significant digits.
inline void write_dataset_csv(const SampleSet& s, std::ostream& out) {
    for (std::size_t j = 0; j < s.n; ++j) out << (j ? ",x" : "x") << (j + 1);
    out << '\n';
    const std::size_t m = s.size();
    for (std::size_t i = 0; i < m; ++i) {
        const double* p = s.point(i);
        for (std::size_t j = 0; j < s.n; ++j) {
            if (j) out << ',';
            out << detail::format_double(p[j]);
        }
        out << '\n';
    }
}

inline SampleSet read_dataset_csv(std::istream& in, const std::string& name) {
    std::string line;
    if (!std::getline(in, line)) throw data_error(name + ": empty dataset");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> cols;
    {
        std::stringstream header(line);
        std::string col;
        while (std::getline(header, col, ',')) cols.push_back(col);
    }
    for (std::size_t j = 0; j < cols.size(); ++j) {
        const std::string want = "x" + std::to_string(j + 1);
        if (cols[j] != want)
            throw data_error(name + ": bad header column '" + cols[j] + "' (expected '" + want + "')");
    }
    if (cols.empty()) throw data_error(name + ": header has no columns");

    SampleSet s(cols.size(), 1.0);
    std::size_t lineno = 1;
    FeatureVector row(cols.size());
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t start = 0;
        for (std::size_t j = 0; j < cols.size(); ++j) {
            std::size_t end = line.find(',', start);
            if (j + 1 == cols.size()) {
                if (end != std::string::npos)
                    throw data_error(name + ": line " + std::to_string(lineno) + ": too many fields");
                end = line.size();
            } else if (end == std::string::npos) {
                throw data_error(name + ": line " + std::to_string(lineno) + ": expected " +
                                 std::to_string(cols.size()) + " fields");
            }
            double v = 0.0;
            if (!detail::parse_double(std::string_view(line).substr(start, end - start), v) || !std::isfinite(v))
                throw data_error(name + ": line " + std::to_string(lineno) + ": bad number in column x" +
                                 std::to_string(j + 1));
            row[j] = v;
            start = end + 1;
        }
        s.data.insert(s.data.end(), row.begin(), row.end());
    }
    if (s.empty()) throw data_error(name + ": dataset has no rows");
    double maxsq = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double* p = s.point(i);
        maxsq = std::max(maxsq, vec::dot(p, p, s.n));
    }
    s.r = maxsq > 0.0 ? std::sqrt(maxsq) : 1.0;
    return s;
}

namespace detail {

inline void ball_point(Rng& rng, std::size_t n, double r, double* out) {
    double norm2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        out[j] = rng.normal();
        norm2 += out[j] * out[j];
    }
    const double nrm = std::sqrt(norm2);
    const double radius = r * std::pow(rng.unit(), 1.0 / static_cast<double>(n));
    const double scale = nrm > 0.0 ? radius / nrm : 0.0;
    for (std::size_t j = 0; j < n; ++j) out[j] *= scale;
}

}  // namespace detail

// Deterministic given (spec, seed); every point gets its own derived stream
// so generation order (or parallel generation) cannot change the output.
inline SampleSet sample(const GeneratorSpec& spec, std::size_t m) {
    if (m == 0) throw std::invalid_argument("sample: m must be >= 1");

    if (spec.kind == GeneratorSpec::Kind::file) {
        std::ifstream in(spec.path, std::ios::binary);
        if (!in) throw data_error("sample: cannot open '" + spec.path + "'");
        SampleSet s = read_dataset_csv(in, spec.path);
        s.provenance.generator = "file";
        s.provenance.path = spec.path;
        s.provenance.r = s.r;
        return s;
    }

    if (spec.n == 0) throw std::invalid_argument("sample: dimension must be >= 1");
    if (!(spec.r > 0.0)) throw std::invalid_argument("sample: radius must be > 0");

    SampleSet s(spec.n, spec.r);
    s.provenance.generator = GeneratorSpec::kind_name(spec.kind);
    s.provenance.seed = spec.seed;
    s.provenance.r = spec.r;
    s.data.resize(m * spec.n);

    switch (spec.kind) {
        case GeneratorSpec::Kind::uniform_ball: {
            for (std::size_t i = 0; i < m; ++i) {
                detail::Rng rng(detail::derive_seed(spec.seed, i));
                detail::ball_point(rng, spec.n, spec.r, s.data.data() + i * spec.n);
            }
            break;
        }
        case GeneratorSpec::Kind::uniform_box: {
            // cube inscribed in the radius-r ball, so the norm bound is exact
            const double half = spec.r / std::sqrt(static_cast<double>(spec.n));
            for (std::size_t i = 0; i < m; ++i) {
                detail::Rng rng(detail::derive_seed(spec.seed, i));
                double* p = s.data.data() + i * spec.n;
                for (std::size_t j = 0; j < spec.n; ++j) p[j] = rng.uniform(-half, half);
            }
            break;
        }
        case GeneratorSpec::Kind::line_segment: {
            if (spec.axis >= spec.n) throw std::invalid_argument("sample: line_segment axis out of range");
            for (std::size_t i = 0; i < m; ++i) {
                detail::Rng rng(detail::derive_seed(spec.seed, i));
                double* p = s.data.data() + i * spec.n;
                for (std::size_t j = 0; j < spec.n; ++j) p[j] = 0.0;
                p[spec.axis] = rng.uniform(-spec.r, spec.r);
            }
            break;
        }
        case GeneratorSpec::Kind::gaussian_mixture: {
            if (spec.centers.empty()) throw std::invalid_argument("sample: gaussian_mixture needs centers");
            if (!(spec.spread > 0.0)) throw std::invalid_argument("sample: gaussian_mixture spread must be > 0");
            for (const auto& c : spec.centers) {
                vec::check_same_dim(c.size(), spec.n);
                if (vec::norm(c) > spec.r)
                    throw std::invalid_argument("sample: mixture center outside radius-r ball");
            }
            for (std::size_t i = 0; i < m; ++i) {
                detail::Rng rng(detail::derive_seed(spec.seed, i));
                double* p = s.data.data() + i * spec.n;
                const auto& center = spec.centers[rng.below(spec.centers.size())];
                bool placed = false;
                for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
                    double norm2 = 0.0;
                    for (std::size_t j = 0; j < spec.n; ++j) {
                        p[j] = center[j] + spec.spread * rng.normal();
                        norm2 += p[j] * p[j];
                    }
                    placed = norm2 <= spec.r * spec.r;
                }
                if (!placed) throw std::runtime_error("sample: mixture rejection cap hit; spread too large for r");
            }
            break;
        }
        case GeneratorSpec::Kind::file: break;  // handled above
    }
    return s;
}

// x' = x + N(0, sigma^2 I). Smoothed points are not re-clipped to r; the
// radius describes the pre-noise base only.
inline SampleSet smooth(const SampleSet& s, const SmoothingSpec& sm, std::uint64_t seed) {
    if (sm.sigma < 0.0) throw std::invalid_argument("smooth: sigma must be >= 0");
    if (sm.sigma > s.r)
        std::cerr << "warning: sigma " << sm.sigma << " exceeds base radius " << s.r
                  << "; smoothing analysis assumes sigma = O(r)\n";
    if (sm.sigma == 0.0) return s;
    SampleSet out = s;
    const std::size_t m = s.size();
    for (std::size_t i = 0; i < m; ++i) {
        detail::Rng rng(detail::derive_seed(seed, i));
        double* p = out.data.data() + i * s.n;
        for (std::size_t j = 0; j < s.n; ++j) p[j] += sm.sigma * rng.normal();
    }
    out.provenance.sigma = sm.sigma;
    out.provenance.smooth_seed = seed;
    out.provenance.sampler = detail::kSamplerName;
    return out;
}

// ───────────────────────── smoothness spot checks ─────────────────────────

struct BandCheck {
    double empirical = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct TailCheck {
    double empirical = 0.0;
    double H = 0.0;
    bool pass = false;
};

// Smoothed mass of any slab [a,b] along any unit direction is at most
// (b-a)/(sigma*sqrt(2*pi)). Checked with 3-sigma Monte Carlo slack.
inline BandCheck verify_band_bound(const SampleSet& s, const FeatureVector& w, double a, double b, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("verify_band_bound: sigma must be > 0");
    if (a > b) throw std::invalid_argument("verify_band_bound: need a <= b");
    s.require_nonempty();
    vec::check_same_dim(w.size(), s.n);
    const std::size_t m = s.size();
    std::size_t inside = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double t = vec::dot(w.data(), s.point(i), s.n);
        if (t >= a && t <= b) ++inside;
    }
    BandCheck chk;
    chk.empirical = static_cast<double>(inside) / static_cast<double>(m);
    chk.bound = (b - a) / (sigma * std::sqrt(2.0 * 3.14159265358979323846));
    chk.pass = chk.empirical <= chk.bound + 3.0 * std::sqrt(chk.bound / static_cast<double>(m));
    return chk;
}

// Smoothed mass beyond H = 2r + sigma*sqrt(2 ln(1/eps)) is at most eps.
inline TailCheck verify_tail_bound(const SampleSet& s, double r, double sigma, double eps) {
    if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("verify_tail_bound: need 0 < eps <= 1");
    s.require_nonempty();
    TailCheck chk;
    chk.H = 2.0 * r + sigma * std::sqrt(2.0 * std::log(1.0 / eps));
    const std::size_t m = s.size();
    const double h2 = chk.H * chk.H;
    std::size_t beyond = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double* p = s.point(i);
        if (vec::dot(p, p, s.n) >= h2) ++beyond;
    }
    chk.empirical = static_cast<double>(beyond) / static_cast<double>(m);
    chk.pass = chk.empirical <= eps + 3.0 * std::sqrt(eps / static_cast<double>(m));
    return chk;
}

}  // namespace stratmech
