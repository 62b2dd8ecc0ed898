#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#if defined(__AVX512F__) && defined(__AVX512VL__)
#include <immintrin.h>
#define STRATMECH_AVX512 1
#endif

// Exact sliding-window machinery shared by the bias search, the density
// oracle, and the brute-force validator. Everything works on the closed
// window [b - ell, b] with one canonical membership test: p >= edge and
// p <= b, where edge = b - ell is rounded once. Window counts therefore
// agree with margin_density bit for bit.

namespace stratmech::detail {

struct WindowBest {
    double b = 0.0;        // right edge, always one of the projection values
    std::size_t count = 0;
    std::size_t lo = 0;    // first index inside the best window
    std::size_t hi = 0;    // last index inside (the end of b's duplicate run)
};

// Best closed window over a sorted projection array. The optimum is always
// attained with the right edge on a data value; duplicate right-edge values
// are handled by evaluating each run at its last element. Ties prefer the
// smaller |b|.
inline WindowBest best_window_sorted(const double* p, std::size_t m, double ell) {
    WindowBest best;
    std::size_t left = 0;
    for (std::size_t j = 0; j < m;) {
        const double b = p[j];
        std::size_t run_end = j;
        while (run_end + 1 < m && p[run_end + 1] == b) ++run_end;
        const double edge = b - ell;
        while (p[left] < edge) ++left;
        const std::size_t cnt = run_end - left + 1;
        if (cnt > best.count || (cnt == best.count && std::abs(b) < std::abs(best.b))) {
            best.b = b;
            best.count = cnt;
            best.lo = left;
            best.hi = run_end;
        }
        j = run_end + 1;
    }
    return best;
}

// First index at or past the window edge b - ell.
inline std::size_t window_lower(const double* p, std::size_t m, double b, double ell) {
    const double edge = b - ell;
    const double* it = std::partition_point(p, p + m, [&](double v) { return v < edge; });
    return static_cast<std::size_t>(it - p);
}

// One past the last index with p <= b.
inline std::size_t window_upper(const double* p, std::size_t m, double b) {
    const double* it = std::partition_point(p, p + m, [&](double v) { return v <= b; });
    return static_cast<std::size_t>(it - p);
}

// Sum of boundary distances (b - p) over indices [lo, hi).
inline double window_sum(const double* p, std::size_t lo, std::size_t hi, double b) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += b - p[i];
    return s;
}

inline void insertion_fix(double* p, std::size_t m) {
    for (std::size_t j = 1; j < m; ++j) {
        const double x = p[j];
        if (x < p[j - 1]) {
            std::size_t i = j;
            do {
                p[i] = p[i - 1];
                --i;
            } while (i > 0 && p[i - 1] > x);
            p[i] = x;
        }
    }
}

// Counting sort into reusable scratch; the histogram pass beats std::sort by
// roughly 5x at the 50k-point scale this library lives at. Equal keys keep no
// particular order, which is fine: every downstream quantity depends on the
// value multiset only.
class MarginScanner {
public:
    void load(const double* proj, std::size_t m) {
        sorted_.resize(m);
        if (m == 0) return;
        double lo = proj[0], hi = proj[0];
        for (std::size_t i = 1; i < m; ++i) {
            lo = std::min(lo, proj[i]);
            hi = std::max(hi, proj[i]);
        }
        if (!(hi > lo)) {
            std::copy(proj, proj + m, sorted_.begin());
            return;
        }
        std::size_t nb = 64;
        while (nb < m && nb < (1u << 16)) nb <<= 1;
        cnt_.assign(nb + 1, 0);
        const double scale = static_cast<double>(nb) / (hi - lo);
        auto bucket = [&](double v) {
            auto idx = static_cast<std::size_t>((v - lo) * scale);
            return idx >= nb ? nb - 1 : idx;
        };
        for (std::size_t i = 0; i < m; ++i) ++cnt_[bucket(proj[i]) + 1];
        for (std::size_t b = 1; b <= nb; ++b) cnt_[b] += cnt_[b - 1];
        for (std::size_t i = 0; i < m; ++i) sorted_[cnt_[bucket(proj[i])]++] = proj[i];
        insertion_fix(sorted_.data(), m);
    }

    const double* data() const { return sorted_.data(); }
    std::size_t size() const { return sorted_.size(); }

    WindowBest best(double ell) const { return best_window_sorted(sorted_.data(), sorted_.size(), ell); }

    // soft margin density of the window ending at b, over the full sample count
    double soft_density(double b, double ell) const {
        const std::size_t lo = window_lower(sorted_.data(), sorted_.size(), b, ell);
        const std::size_t hi = window_upper(sorted_.data(), sorted_.size(), b);
        return window_sum(sorted_.data(), lo, hi, b) / static_cast<double>(sorted_.size());
    }

private:
    std::vector<double> sorted_;
    std::vector<std::uint32_t> cnt_;
};

// Incremental sweep for a one-parameter family of directions in a fixed
// plane: proj_i(t) = c_t * u_i + s_t * v_i with (c_t, s_t) rotating
// monotonically. Between steps the sorted order changes by a handful of
// adjacent swaps, so each step recomputes values in the previous order and
// repairs with an insertion pass. The per-step window search prunes with
// exact rank bounds: ranks of the window edge at block boundaries give an
// upper bound on any count inside the block, blocks that cannot reach the
// running lower bound are skipped, and survivors are halved until only the
// near-optimal j remain to scan. Every kept or discarded decision uses exact
// ranks, so the result equals best_window_sorted on the same array.
class PlaneSweep {
public:
    struct Best {
        double b = 0.0;
        std::uint32_t count = 0;
        std::size_t lo = 0;
        std::size_t hi = 0;
    };

    void init(const std::vector<double>& u, const std::vector<double>& v, double c0, double s0, double ell) {
        m_ = u.size();
        ell_ = ell;
        const std::size_t span = m_ + kPad;
        // staggered offsets keep the three streams off shared page offsets
        arena_.assign(3 * span + 48, HUGE_VAL);
        u_ = arena_.data();
        v_ = arena_.data() + span + 8;
        p_ = arena_.data() + 2 * span + 24 + 1;
        std::vector<std::uint32_t> idx(m_);
        std::iota(idx.begin(), idx.end(), 0u);
        std::vector<double> pr(m_);
        // all projection arithmetic is the same fused form as the vector loop,
        // so every path produces identical bits
        for (std::size_t i = 0; i < m_; ++i) pr[i] = std::fma(c0, u[i], s0 * v[i]);
        std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
            return pr[a] < pr[b] || (pr[a] == pr[b] && a < b);
        });
        for (std::size_t i = 0; i < m_; ++i) {
            u_[i] = u[idx[i]];
            v_[i] = v[idx[i]];
            p_[i] = pr[idx[i]];
        }
        p_[-1] = -HUGE_VAL;
        viol_.resize(m_ + 16);
        warm_ = false;
    }

    // new direction: recompute every projection in the old order, collect the
    // descent positions, then reinsert each one; exact sorted order restored
    void step(double c, double s) {
        std::size_t i = 0;
        std::size_t nv = 0;
#if STRATMECH_AVX512
        const __m512d vc = _mm512_set1_pd(c), vs = _mm512_set1_pd(s);
        const __m256i lane = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
        __m512d prev = _mm512_set1_pd(-HUGE_VAL);
        for (; i + 8 <= m_; i += 8) {
            const __m512d x = _mm512_loadu_pd(u_ + i);
            const __m512d y = _mm512_loadu_pd(v_ + i);
            const __m512d val = _mm512_fmadd_pd(vc, x, _mm512_mul_pd(vs, y));
            _mm512_storeu_pd(p_ + i, val);
            const __m512d sh = _mm512_castsi512_pd(
                _mm512_alignr_epi64(_mm512_castpd_si512(val), _mm512_castpd_si512(prev), 7));
            const __mmask8 bad = _mm512_cmp_pd_mask(val, sh, _CMP_LT_OQ);
            const __m256i io = _mm256_add_epi32(lane, _mm256_set1_epi32(static_cast<int>(i)));
            _mm256_mask_compressstoreu_epi32(viol_.data() + nv, bad, io);
            nv += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(bad)));
            prev = val;
        }
#endif
        for (; i < m_; ++i) {
            p_[i] = std::fma(c, u_[i], s * v_[i]);
            if (p_[i] < p_[i - 1]) viol_[nv++] = static_cast<std::uint32_t>(i);
        }
        if (nv && viol_[0] == 0) {
            // lane 0 of the first vector compares against the sentinel
            std::copy(viol_.begin() + 1, viol_.begin() + nv, viol_.begin());
            --nv;
        }
        for (std::size_t x = 0; x < nv; ++x) {
            std::size_t k = viol_[x];
            if (!(p_[k] < p_[k - 1])) continue;  // already handled by a cascade
            fix_at(k);
            while (k + 1 < m_ && p_[k + 1] < p_[k]) {
                fix_at(k + 1);
                ++k;
            }
        }
    }

    Best best() {
        if (m_ == 0) return {};
        const std::size_t nb = (m_ + kBlk - 1) / kBlk;
        const bool had = warm_ && bnd_.size() == nb + 1;
        bnd_.resize(nb + 1, 0);
        for (std::size_t B = 0; B <= nb; ++B) {
            const std::size_t j = std::min(m_ - 1, B * kBlk);
            bnd_[B] = rank_at(j, had ? bnd_[B] : static_cast<std::uint32_t>(j / 2));
        }
        warm_ = true;
        std::uint32_t maxlb = 1;
        for (std::size_t B = 0; B < nb; ++B) {
            const auto jhi = static_cast<std::uint32_t>(std::min(m_ - 1, B * kBlk + (kBlk - 1)));
            maxlb = std::max(maxlb, jhi - bnd_[B + 1] + 1);
        }
        cands_.clear();
        for (std::size_t B = 0; B < nb; ++B) {
            const auto js = static_cast<std::uint32_t>(B * kBlk);
            const auto je = static_cast<std::uint32_t>(std::min(m_, B * kBlk + kBlk));
            if (je - 1 - bnd_[B] + 1 >= maxlb) cands_.push_back(Cand{js, je, bnd_[B], bnd_[B + 1]});
        }
        for (std::size_t width = kBlk; width > 8 && !cands_.empty() && cands_.size() <= kCap; width >>= 1) {
            split_.clear();
            for (const Cand& c : cands_) {
                if (c.je - c.js <= 4) {
                    split_.push_back(c);
                    maxlb = std::max(maxlb, c.je - 1 - c.rhi + 1);
                    continue;
                }
                const std::uint32_t mid = (c.js + c.je) >> 1;
                const std::uint32_t rm = rank_at(mid, (c.rlo + c.rhi) >> 1);
                split_.push_back(Cand{c.js, mid, c.rlo, rm});
                split_.push_back(Cand{mid, c.je, rm, c.rhi});
                maxlb = std::max({maxlb, mid - 1 - rm + 1, c.je - 1 - c.rhi + 1});
            }
            cands_.clear();
            for (const Cand& h : split_)
                if (h.je - 1 - h.rlo + 1 >= maxlb) cands_.push_back(h);
        }
        std::uint32_t maxc = 0;
        for (const Cand& c : cands_) {
            std::size_t l = c.rlo;
            for (std::size_t j = c.js; j < c.je; ++j) {
                const double edge = p_[j] - ell_;
                while (p_[l] < edge) ++l;
                maxc = std::max(maxc, static_cast<std::uint32_t>(j - l + 1));
            }
        }
        Best best;
        for (const Cand& c : cands_) {
            if (c.je - 1 - c.rlo + 1 < maxc) continue;
            std::size_t l = c.rlo;
            for (std::size_t j = c.js; j < c.je; ++j) {
                const double edge = p_[j] - ell_;
                while (p_[l] < edge) ++l;
                if (p_[j] != p_[j + 1] && j - l + 1 == maxc) {
                    const double b = p_[j];
                    if (best.count == 0 || std::abs(b) < std::abs(best.b)) best = Best{b, maxc, l, j};
                }
            }
        }
        return best;
    }

    // closed window [b - ell, b] for an arbitrary bias
    std::pair<std::size_t, std::size_t> window(double b) const {
        return {window_lower(p_, m_, b, ell_), window_upper(p_, m_, b)};
    }

    // sum of (b - p) over [lo, hi); striped accumulators with a fixed
    // reduction tree so the scalar and vector builds agree exactly
    double soft_sum(std::size_t lo, std::size_t hi, double b) const {
        double lanes[8] = {0, 0, 0, 0, 0, 0, 0, 0};
        std::size_t i = lo;
#if STRATMECH_AVX512
        const __m512d vb = _mm512_set1_pd(b);
        __m512d acc = _mm512_setzero_pd();
        for (; i + 8 <= hi; i += 8) acc = _mm512_add_pd(acc, _mm512_sub_pd(vb, _mm512_loadu_pd(p_ + i)));
        _mm512_storeu_pd(lanes, acc);
#else
        for (; i + 8 <= hi; i += 8)
            for (int t = 0; t < 8; ++t) lanes[t] += b - p_[i + t];
#endif
        double tail = 0.0;
        for (; i < hi; ++i) tail += b - p_[i];
        const double s10 = lanes[0] + lanes[4], s11 = lanes[1] + lanes[5];
        const double s12 = lanes[2] + lanes[6], s13 = lanes[3] + lanes[7];
        return ((s10 + s12) + (s11 + s13)) + tail;
    }

    const double* proj() const { return p_; }
    std::size_t size() const { return m_; }

private:
    struct Cand {
        std::uint32_t js, je;    // half-open j range
        std::uint32_t rlo, rhi;  // edge ranks at js and at the next block start
    };

    static constexpr std::size_t kBlk = 64;
    static constexpr std::size_t kPad = 80;
    static constexpr std::size_t kCap = 512;

    void fix_at(std::size_t k) {
        const double vp = p_[k], vu = u_[k], vv = v_[k];
        std::size_t i = k;
        do {
            p_[i] = p_[i - 1];
            u_[i] = u_[i - 1];
            v_[i] = v_[i - 1];
            --i;
        } while (i > 0 && p_[i - 1] > vp);
        p_[i] = vp;
        u_[i] = vu;
        v_[i] = vv;
    }

    std::uint32_t bisect(std::uint32_t lo, std::uint32_t hi, double key) const {
        while (lo < hi) {
            const std::uint32_t mid = (lo + hi) >> 1;
            if (p_[mid] < key) lo = mid + 1; else hi = mid;
        }
        return lo;
    }

    // exact rank of the window edge p[j] - ell within p[0..j]; the guess
    // (previous step's rank or an interpolation) only narrows the bracket
    std::uint32_t rank_at(std::size_t j, std::uint32_t guess) const {
        const double key = p_[j] - ell_;
        const auto jj = static_cast<std::uint32_t>(j);
        const std::uint32_t g = std::min(guess, jj);
        const std::uint32_t glo = g > 16 ? g - 16 : 0;
        const std::uint32_t ghi = std::min(jj, g + 16);
        const bool lo_ok = glo == 0 || p_[glo - 1] < key;
        const bool hi_ok = ghi == jj || !(p_[ghi] < key);
        if (lo_ok && hi_ok) return bisect(glo, ghi, key);
        return bisect(0, jj, key);
    }

    std::size_t m_ = 0;
    double ell_ = 0.0;
    std::vector<double> arena_;
    double *u_ = nullptr, *v_ = nullptr, *p_ = nullptr;
    std::vector<std::uint32_t> viol_, bnd_;
    std::vector<Cand> cands_, split_;
    bool warm_ = false;
};

}  // namespace stratmech::detail
