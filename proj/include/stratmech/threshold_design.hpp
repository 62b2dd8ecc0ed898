#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stratmech/core.hpp"
#include "stratmech/detail/margin_scan.hpp"
#include "stratmech/detail/parallel.hpp"
#include "stratmech/detail/rng.hpp"
#include "stratmech/metrics.hpp"

namespace stratmech {

// Directions in the visible subspace with a prescribed correlation to the
// quality direction: Img(P) ∩ {w : w·w_f = eta, ‖w‖ = 1}. Nonempty exactly
// when eta ≤ ‖P w_f‖.
struct DirectionFamily {
    Projection P;
    FeatureVector w_f;
    double eta = 0.0;
};

struct OracleResult {
    FeatureVector w;
    double b = 0.0;
    double den = 0.0;
};

struct Candidate {
    FeatureVector w;
    double b = 0.0;
    double gain = 0.0;
};

struct DesignReport {
    ThresholdMechanism chosen;
    double gain = 0.0;
    std::vector<Candidate> candidates;
    std::size_t oracle_calls = 0;
    double epsilon_prime = 0.0;
};

struct BestBias {
    double b = 0.0;
    double den = 0.0;
};

namespace detail {

constexpr double kRhoTol = 1e-12;
constexpr std::size_t kOracleCallCap = 10000000;
// stream id for the quasi-uniform direction generators; any fixed value works,
// it only has to stay fixed so enlarged grids extend rather than reshuffle
constexpr std::uint64_t kDirectionStreamSeed = 0xd1b54a32d192ed03ull;

// argmax with the shared tie-break: larger key, then smaller |b|, then
// lexicographically smallest w; first arrival wins full ties
struct ArgmaxState {
    bool has = false;
    double key = 0.0;
    double b = 0.0;
    FeatureVector w;

    bool improved_by(double key2, double b2, const FeatureVector& w2) const {
        if (!has) return true;
        if (key2 != key) return key2 > key;
        const double a1 = std::abs(b), a2 = std::abs(b2);
        if (a2 != a1) return a2 < a1;
        return vec::lex_less(w2, w);
    }

    void take(double key2, double b2, FeatureVector w2) {
        has = true;
        key = key2;
        b = b2;
        w = std::move(w2);
    }

    void consider(double key2, double b2, const FeatureVector& w2) {
        if (improved_by(key2, b2, w2)) take(key2, b2, w2);
    }
};

// Orthonormal frame of the visible subspace anchored at the quality
// direction: phat spans the visible quality component, qhats the rest.
struct VisibleFrame {
    double rho = 0.0;
    std::vector<double> phat_vis;                // k coords
    FeatureVector phat;                          // lifted, n coords
    std::vector<std::vector<double>> qhat_vis;   // k-1 rows of k coords
    std::vector<FeatureVector> qhat;             // lifted
};

inline VisibleFrame make_frame(const Projection& p, const FeatureVector& w_f) {
    VisibleFrame fr;
    std::vector<double> y = p.coefficients(w_f);
    double n2 = 0.0;
    for (double v : y) n2 += v * v;
    fr.rho = std::sqrt(n2);
    if (fr.rho <= kRhoTol) throw degenerate_error("invisible quality direction: ||P w_f|| is zero");
    fr.phat_vis = y;
    for (double& v : fr.phat_vis) v /= fr.rho;
    fr.phat = p.lift(fr.phat_vis);

    const std::size_t k = p.k;
    if (k == 2) {
        fr.qhat_vis.push_back({-fr.phat_vis[1], fr.phat_vis[0]});
    } else if (k >= 3) {
        // Gram-Schmidt of the coordinate axes against phat; some axis always
        // keeps at least 1/sqrt(k) of its norm, so the tolerance never starves
        std::vector<std::vector<double>> frame{fr.phat_vis};
        for (std::size_t j = 0; j < k && frame.size() < k; ++j) {
            std::vector<double> cand(k, 0.0);
            cand[j] = 1.0;
            for (const auto& f : frame) {
                double d = 0.0;
                for (std::size_t i = 0; i < k; ++i) d += f[i] * cand[i];
                for (std::size_t i = 0; i < k; ++i) cand[i] -= d * f[i];
            }
            double cn = 0.0;
            for (double v : cand) cn += v * v;
            cn = std::sqrt(cn);
            if (cn < 1e-6) continue;
            for (double& v : cand) v /= cn;
            frame.push_back(cand);
            fr.qhat_vis.push_back(std::move(cand));
        }
    }
    for (const auto& q : fr.qhat_vis) fr.qhat.push_back(p.lift(q));
    return fr;
}

// cos/sin of the rotation from the perpendicular circle toward phat;
// tau = eta / rho
inline std::pair<double, double> plane_trig(double tau) {
    const double c = tau > 1.0 ? 1.0 : tau;
    const double s = std::sqrt(std::max(0.0, (1.0 - c) * (1.0 + c)));
    return {c, s};
}

inline void project_components(const SampleSet& s, const FeatureVector& dir, std::vector<double>& out) {
    const std::size_t m = s.size(), n = s.n;
    out.resize(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = vec::dot(dir.data(), s.point(i), n);
}

// point j of an endless quasi-uniform stream on the unit sphere of R^dim;
// taking a prefix of the stream means enlarging a grid never drops directions
inline std::vector<double> sphere_stream_point(std::size_t dim, std::size_t j) {
    Rng rng(derive_seed(kDirectionStreamSeed, static_cast<std::uint64_t>(j)));
    std::vector<double> v(dim);
    for (;;) {
        double n2 = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            v[i] = rng.normal();
            n2 += v[i] * v[i];
        }
        if (n2 > 1e-24) {
            const double inv = 1.0 / std::sqrt(n2);
            for (double& x : v) x *= inv;
            return v;
        }
    }
}

}  // namespace detail

// Appendix-style constructive rotation: returns a unit w in span{w1, w2}
// whose correlation with w2 is raised to w1·w2 + eps while keeping
// w·w1 ≥ 1 − eps.
inline FeatureVector discretize_direction(const FeatureVector& w1, const FeatureVector& w2, double eps) {
    vec::check_same_dim(w1.size(), w2.size());
    if (!(eps >= 0.0)) throw std::invalid_argument("discretize_direction: eps must be >= 0");
    if (eps == 0.0) return w1;
    const double omega = vec::dot(w1, w2);
    if (omega > 1.0 - 2.0 * eps) throw std::invalid_argument("directions too aligned: w1.w2 > 1 - 2 eps");
    const double alpha = std::sqrt((1.0 - (omega + eps) * (omega + eps)) / (1.0 - omega * omega));
    // beta solves w.w2 = omega + eps directly; alpha then restores ||w|| = 1
    // since alpha^2 (1 - omega^2) + (omega + eps)^2 = 1
    const double beta = (omega + eps) - alpha * omega;
    FeatureVector w(w1.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = alpha * w1[i] + beta * w2[i];
    return w;
}

// Exact maximizer of the margin density over all biases for one direction:
// sort the projections, slide a closed window of width ell; the optimum is
// attained with the right edge on a data point, and that edge is the bias.
inline BestBias best_bias_for_direction(const SampleSet& s, const FeatureVector& w, double ell) {
    s.require_nonempty();
    if (!(ell > 0.0)) throw std::invalid_argument("best_bias_for_direction: ell must be positive");
    if (w.size() != s.n) throw std::invalid_argument("best_bias_for_direction: direction dimension mismatch");
    std::vector<double> proj;
    detail::project_components(s, w, proj);
    detail::MarginScanner scanner;
    scanner.load(proj.data(), proj.size());
    const detail::WindowBest wb = scanner.best(ell);
    return BestBias{wb.b, static_cast<double>(wb.count) / static_cast<double>(s.size())};
}

// Density-optimization oracle interface. Implementations must be pure and
// deterministic per call; algorithm1 may invoke them from worker threads.
class DensityOracle {
public:
    virtual ~DensityOracle() = default;
    virtual OracleResult find(const SampleSet& s, double ell, const DirectionFamily& family,
                              std::size_t angular_steps) const = 0;
};

// Default oracle: enumerate the direction family and run the exact bias scan
// on every member. The family is a (k-2)-sphere around the visible quality
// axis: a singleton for k = 1, an antipodal pair for k = 2, a circle sampled
// at angular_steps points for k = 3, and for k >= 4 the first angular_steps
// points of a fixed seeded stream on the sphere (so doubling the step count
// enumerates a superset).
class EnumerationOracle final : public DensityOracle {
public:
    OracleResult find(const SampleSet& s, double ell, const DirectionFamily& family,
                      std::size_t angular_steps) const override {
        s.require_nonempty();
        if (!(ell > 0.0)) throw std::invalid_argument("density oracle: ell must be positive");
        if (angular_steps < 1) throw std::invalid_argument("density oracle: angular_steps must be >= 1");
        if (family.P.n != s.n) throw std::invalid_argument("density oracle: projection dimension mismatch");
        const detail::VisibleFrame fr = detail::make_frame(family.P, family.w_f);
        const double eta = family.eta;
        if (eta < -1e-12) throw std::invalid_argument("density oracle: eta must be nonnegative");
        const double tol = 1e-9 * std::max(1.0, fr.rho);
        if (eta - fr.rho > tol)
            throw std::invalid_argument("empty direction family: eta exceeds ||P w_f||");

        const std::size_t k = family.P.k;
        detail::ArgmaxState best;
        auto scan = [&](const FeatureVector& w) {
            const BestBias bb = best_bias_for_direction(s, w, ell);
            best.consider(bb.den, bb.b, w);
        };

        if (k == 1) {
            if (std::abs(eta - fr.rho) > tol)
                throw std::invalid_argument("empty direction family: rank-1 image only matches eta = ||P w_f||");
            scan(fr.phat);
        } else {
            const auto [c, sn] = detail::plane_trig(eta / fr.rho);
            const std::size_t n = family.P.n;
            FeatureVector w(n);
            auto combine = [&](const std::vector<double>& axis_weights) {
                for (std::size_t i = 0; i < n; ++i) {
                    double v = 0.0;
                    for (std::size_t q = 0; q < axis_weights.size(); ++q) v += axis_weights[q] * fr.qhat[q][i];
                    w[i] = c * fr.phat[i] + sn * v;
                }
                scan(w);
            };
            if (k == 2) {
                combine({1.0});
                combine({-1.0});
            } else if (k == 3) {
                for (std::size_t j = 0; j < angular_steps; ++j) {
                    const double psi = 2.0 * std::numbers::pi * (static_cast<double>(j) / static_cast<double>(angular_steps));
                    combine({std::cos(psi), std::sin(psi)});
                }
            } else {
                for (std::size_t j = 0; j < angular_steps; ++j) combine(detail::sphere_stream_point(k - 1, j));
            }
        }
        return OracleResult{best.w, best.b, best.key};
    }
};

inline OracleResult density_oracle(const SampleSet& s, double ell, const DirectionFamily& family,
                                   std::size_t angular_steps = 4096) {
    return EnumerationOracle{}.find(s, ell, family, angular_steps);
}

// Fixed-direction baseline: scan biases ±i/(2c) for i = 1..⌈2rc⌉+1 along the
// visible quality direction. The stated guarantee uses the positive biases
// only; the negated ones are extra candidates and can only help the max.
inline DesignReport baseline_4rc(const SampleSet& s, const Projection& p, const QualityFunction& f,
                                 CostModel cm, double r) {
    s.require_nonempty();
    if (!(r > 0.0)) throw std::invalid_argument("baseline_4rc: r must be positive");
    if (p.n != s.n) throw std::invalid_argument("baseline_4rc: projection dimension mismatch");
    if (f.transform != Transform::identity)
        throw std::invalid_argument("baseline_4rc: gains are defined for the identity (linear) quality");
    const detail::VisibleFrame fr = detail::make_frame(p, f.w);
    const auto top = static_cast<std::size_t>(std::ceil(2.0 * r * cm.c)) + 1;

    DesignReport rep{ThresholdMechanism(fr.phat, 0.0), 0.0, {}, 0, 0.0};
    rep.candidates.reserve(2 * top);
    detail::ArgmaxState best;
    for (std::size_t i = 1; i <= top; ++i) {
        for (const double sign : {1.0, -1.0}) {
            const double b = sign * (static_cast<double>(i) / (2.0 * cm.c));
            const ThresholdMechanism g(fr.phat, b);
            const double gain = gain_closed_form(g, s, f, cm);
            rep.candidates.push_back(Candidate{g.w, b, gain});
            best.consider(gain, b, g.w);
        }
    }
    rep.chosen = ThresholdMechanism(best.w, best.b);
    rep.gain = best.key;
    return rep;
}

namespace detail {

// Correlation-grid driver specialized to rank-2 images. Both family members
// at every grid step are swept incrementally in one fixed plane:
// proj(t) = c_t * a + s_t * (±q), where a and q are the per-point components
// along phat and qhat. Each chunk re-sorts once and repairs order per step,
// so every step's window scan is exact; chunk boundaries are fixed so results
// do not depend on the worker count.
inline DesignReport algorithm1_plane(const SampleSet& s, const VisibleFrame& fr, const QualityFunction& f,
                                     CostModel cm, double eps_prime, std::size_t grid_count) {
    const std::size_t m = s.size();
    const double ell = cm.ell();
    const double inv_m = 1.0 / static_cast<double>(m);

    std::vector<double> a, q;
    project_components(s, fr.phat, a);
    project_components(s, fr.qhat[0], q);
    std::vector<double> qneg(m);
    for (std::size_t i = 0; i < m; ++i) qneg[i] = -q[i];

    auto tau_of = [&](std::size_t t) {
        if (t + 1 == grid_count) return 1.0;
        return std::min(static_cast<double>(t) * eps_prime, 1.0);
    };

    std::vector<Candidate> candidates(2 * grid_count);
    constexpr std::size_t kChunk = 65536;
    const std::size_t chunks = (grid_count + kChunk - 1) / kChunk;
    std::vector<ArgmaxState> chunk_best(chunks);

    struct StepOut {
        double b;
        std::uint32_t cnt;
        double sd1;
        double sd2;
    };

    parallel_chunks(chunks, [&](std::size_t ci) {
        const std::size_t t0 = ci * kChunk;
        const std::size_t t1 = std::min(grid_count, t0 + kChunk);
        std::vector<StepOut> plus(t1 - t0);
        PlaneSweep sweep;
        const std::size_t n = fr.phat.size();
        FeatureVector w(n);

        for (int branch = 0; branch < 2; ++branch) {
            const std::vector<double>& v = branch == 0 ? q : qneg;
            {
                const auto [c0, s0] = plane_trig(tau_of(t0));
                sweep.init(a, v, c0, s0, ell);
            }
            for (std::size_t t = t0; t < t1; ++t) {
                const auto [c, sn] = plane_trig(tau_of(t));
                if (t != t0) sweep.step(c, sn);
                const PlaneSweep::Best wb = sweep.best();
                const double sd1 = sweep.soft_sum(wb.lo, wb.hi + 1, wb.b);
                const double b2 = wb.b + 0.5 * ell;
                const auto [lo2, hi2] = sweep.window(b2);
                const double sd2 = sweep.soft_sum(lo2, hi2, b2);
                const StepOut out{wb.b, wb.count, sd1, sd2};
                if (branch == 0) {
                    plus[t - t0] = out;
                    continue;
                }
                // combine the stored +branch result with this one: denser
                // direction wins, ties prefer smaller |b| then lex smaller w
                const StepOut& po = plus[t - t0];
                int take_minus;
                if (out.cnt != po.cnt) {
                    take_minus = out.cnt > po.cnt;
                } else if (std::abs(out.b) != std::abs(po.b)) {
                    take_minus = std::abs(out.b) < std::abs(po.b);
                } else {
                    FeatureVector wm(n), wp(n);
                    for (std::size_t i = 0; i < n; ++i) {
                        wp[i] = c * fr.phat[i] + sn * fr.qhat[0][i];
                        wm[i] = c * fr.phat[i] + sn * -fr.qhat[0][i];
                    }
                    take_minus = vec::lex_less(wm, wp);
                }
                const StepOut& win = take_minus ? out : po;
                const double qsign = take_minus ? -1.0 : 1.0;
                for (std::size_t i = 0; i < n; ++i) w[i] = c * fr.phat[i] + sn * (qsign * fr.qhat[0][i]);
                const double wdotf = vec::dot(w, f.w);
                Candidate& c1 = candidates[2 * t];
                Candidate& c2 = candidates[2 * t + 1];
                c1 = Candidate{w, win.b, wdotf * (win.sd1 * inv_m)};
                c2 = Candidate{w, win.b + 0.5 * ell, wdotf * (win.sd2 * inv_m)};
                ArgmaxState& cb = chunk_best[ci];
                cb.consider(c1.gain, c1.b, c1.w);
                cb.consider(c2.gain, c2.b, c2.w);
            }
        }
    });

    ArgmaxState best;
    for (const ArgmaxState& cb : chunk_best)
        if (cb.has) best.consider(cb.key, cb.b, cb.w);
    return DesignReport{ThresholdMechanism(best.w, best.b), best.key, std::move(candidates), grid_count, eps_prime};
}

}  // namespace detail

// Correlation-grid approximation: steps eta over {0, eps', 2 eps', ..., 1}
// times ||P w_f||, asks the oracle for the densest (w, b) at each step, and
// keeps both that bias and its half-window shift as candidates; the winner
// maximizes (w·w_f) times the soft margin density. oracle = nullptr uses the
// built-in enumeration oracle, with a fused incremental path for rank-2
// images.
inline DesignReport algorithm1(const SampleSet& s, const Projection& p, const QualityFunction& f,
                               CostModel cm, double sigma, double r, double eps,
                               std::size_t angular_steps = 4096, const DensityOracle* oracle = nullptr) {
    s.require_nonempty();
    if (!(sigma > 0.0)) throw std::invalid_argument("algorithm1: sigma must be positive");
    if (!(r > 0.0)) throw std::invalid_argument("algorithm1: r must be positive");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("algorithm1: eps must lie in (0, 1)");
    if (angular_steps < 1) throw std::invalid_argument("algorithm1: angular_steps must be >= 1");
    if (p.n != s.n) throw std::invalid_argument("algorithm1: projection dimension mismatch");
    if (f.transform != Transform::identity)
        throw std::invalid_argument("algorithm1: gains are defined for the identity (linear) quality");
    if (p.k < 2)
        throw degenerate_error(
            "algorithm1 needs a rank >= 2 projection (the correlation grid is empty below the top "
            "step otherwise); use baseline_4rc for rank-1 images");

    const detail::VisibleFrame fr = detail::make_frame(p, f.w);
    const double eps2 = eps * eps;
    const double sr = (sigma * sigma) / (r * r);
    const double eps_prime = std::min(eps2 * eps2, eps2 * sr * sr);
    if (eps_prime < 1.0 / static_cast<double>(detail::kOracleCallCap)) {
        std::ostringstream msg;
        msg << "grid too fine: epsilon_prime " << eps_prime << " would need more than "
            << detail::kOracleCallCap << " oracle calls; raise eps or sigma";
        throw std::invalid_argument(msg.str());
    }
    const auto grid_count = static_cast<std::size_t>(std::floor(1.0 / eps_prime)) + 1;

    if (oracle == nullptr && p.k == 2) return detail::algorithm1_plane(s, fr, f, cm, eps_prime, grid_count);

    const EnumerationOracle fallback;
    const DensityOracle& orc = oracle ? *oracle : static_cast<const DensityOracle&>(fallback);
    const double ell = cm.ell();
    DirectionFamily family{p, f.w, 0.0};

    DesignReport rep{ThresholdMechanism(fr.phat, 0.0), 0.0, {}, grid_count, eps_prime};
    rep.candidates.reserve(2 * grid_count);
    detail::ArgmaxState best;
    for (std::size_t t = 0; t < grid_count; ++t) {
        const double tau = t + 1 == grid_count ? 1.0 : std::min(static_cast<double>(t) * eps_prime, 1.0);
        family.eta = tau * fr.rho;
        const OracleResult res = orc.find(s, ell, family, angular_steps);
        const double wdotf = vec::dot(res.w, f.w);
        for (const double b : {res.b, res.b + 0.5 * ell}) {
            const double gain = wdotf * soft_margin_density(s, res.w, b, ell);
            rep.candidates.push_back(Candidate{res.w, b, gain});
            best.consider(gain, b, res.w);
        }
    }
    rep.chosen = ThresholdMechanism(best.w, best.b);
    rep.gain = best.key;
    return rep;
}

// Exhaustive validator for low-rank images: a quasi-uniform direction grid
// (anchored so index 0 is exactly the visible quality direction and doubling
// the grid enumerates a superset) crossed with an even bias grid spanning
// [min proj - ell, max proj + ell]; the top extension matters when mass
// stacks on one projection value, where the best window hangs past the data.
// Gains use the closed form, so this is an independent check on the
// oracle-driven designs.
inline std::pair<ThresholdMechanism, double> bruteforce_opt(const SampleSet& s, const Projection& p,
                                                            const QualityFunction& f, CostModel cm,
                                                            std::size_t direction_grid, std::size_t bias_grid) {
    s.require_nonempty();
    if (p.k > 3) throw std::invalid_argument("bruteforce_opt: rank too high (supported up to 3)");
    if (direction_grid < 1 || bias_grid < 1)
        throw std::invalid_argument("bruteforce_opt: grids must have at least one cell");
    if (p.n != s.n) throw std::invalid_argument("bruteforce_opt: projection dimension mismatch");
    if (f.transform != Transform::identity)
        throw std::invalid_argument("bruteforce_opt: gains are defined for the identity (linear) quality");
    const detail::VisibleFrame fr = detail::make_frame(p, f.w);
    const double ell = cm.ell();
    const std::size_t m = s.size();

    std::vector<std::vector<double>> dirs_vis;
    dirs_vis.push_back(fr.phat_vis);
    if (p.k == 1) {
        if (direction_grid >= 2) dirs_vis.push_back({-fr.phat_vis[0]});
    } else if (p.k == 2) {
        const double theta_p = std::atan2(fr.phat_vis[1], fr.phat_vis[0]);
        for (std::size_t d = 1; d < direction_grid; ++d) {
            const double th = theta_p + 2.0 * std::numbers::pi * (static_cast<double>(d) / static_cast<double>(direction_grid));
            dirs_vis.push_back({std::cos(th), std::sin(th)});
        }
    } else {
        for (std::size_t d = 1; d < direction_grid; ++d) dirs_vis.push_back(detail::sphere_stream_point(3, d));
    }

    // per-point visible coordinates, reused across directions
    std::vector<std::vector<double>> comp(p.k);
    for (std::size_t j = 0; j < p.k; ++j) {
        FeatureVector row(p.row(j), p.row(j) + p.n);
        detail::project_components(s, row, comp[j]);
    }

    constexpr std::size_t kBlock = 32;
    const std::size_t blocks = (dirs_vis.size() + kBlock - 1) / kBlock;
    std::vector<detail::ArgmaxState> block_best(blocks);

    detail::parallel_chunks(blocks, [&](std::size_t bi) {
        std::vector<double> proj(m), prefix(m + 1);
        detail::MarginScanner scanner;
        detail::ArgmaxState& best = block_best[bi];
        const std::size_t d1 = std::min(dirs_vis.size(), (bi + 1) * kBlock);
        for (std::size_t d = bi * kBlock; d < d1; ++d) {
            const std::vector<double>& wv = dirs_vis[d];
            for (std::size_t i = 0; i < m; ++i) {
                double v = 0.0;
                for (std::size_t j = 0; j < p.k; ++j) v += wv[j] * comp[j][i];
                proj[i] = v;
            }
            scanner.load(proj.data(), m);
            const double* sp = scanner.data();
            prefix[0] = 0.0;
            for (std::size_t i = 0; i < m; ++i) prefix[i + 1] = prefix[i] + sp[i];
            const FeatureVector w = p.lift(wv);
            const double wdotf = vec::dot(w, f.w);
            const double lo_b = sp[0] - ell;
            const double hi_b = sp[m - 1] + ell;
            for (std::size_t j = 0; j <= bias_grid; ++j) {
                const double b = j == bias_grid
                                     ? hi_b
                                     : lo_b + (hi_b - lo_b) * (static_cast<double>(j) / static_cast<double>(bias_grid));
                const std::size_t lo = detail::window_lower(sp, m, b, ell);
                const std::size_t hi = detail::window_upper(sp, m, b);
                const double sden = (static_cast<double>(hi - lo) * b - (prefix[hi] - prefix[lo])) /
                                    static_cast<double>(m);
                best.consider(wdotf * sden, b, w);
            }
        }
    });

    detail::ArgmaxState best;
    for (const detail::ArgmaxState& bb : block_best)
        if (bb.has) best.consider(bb.key, bb.b, bb.w);
    return {ThresholdMechanism(best.w, best.b), best.key};
}

}  // namespace stratmech
