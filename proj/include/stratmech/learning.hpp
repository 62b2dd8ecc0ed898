#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stratmech/core.hpp"
#include "stratmech/detail/numfmt.hpp"
#include "stratmech/distributions.hpp"
#include "stratmech/metrics.hpp"
#include "stratmech/threshold_design.hpp"

namespace stratmech {

enum class DesignMethod { threshold_alg1, threshold_baseline };

inline const char* method_name(DesignMethod m) {
    return m == DesignMethod::threshold_alg1 ? "threshold_alg1" : "threshold_baseline";
}

struct SweepRow {
    std::size_t m = 0;
    std::size_t trial = 0;
    double empirical_gain = 0.0;
    double holdout_gain = 0.0;
    double gap = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // ordered by (m, trial)

    // median of gap per m group, in m order
    std::vector<std::pair<std::size_t, double>> median_gaps() const {
        std::vector<std::pair<std::size_t, double>> out;
        std::size_t i = 0;
        while (i < rows.size()) {
            std::size_t j = i;
            std::vector<double> g;
            while (j < rows.size() && rows[j].m == rows[i].m) g.push_back(rows[j++].gap);
            std::sort(g.begin(), g.end());
            const std::size_t h = g.size() / 2;
            const double med = g.size() % 2 ? g[h] : 0.5 * (g[h - 1] + g[h]);
            out.emplace_back(rows[i].m, med);
            i = j;
        }
        return out;
    }
};

struct SweepParams {
    std::vector<std::size_t> m_list;
    std::size_t trials = 10;
    std::size_t holdout_m = 0;  // 0: 10 x max(m_list)
    DesignMethod method = DesignMethod::threshold_alg1;
    double sigma = 0.0;
    double r = 1.0;
    double eps = 0.3;
    std::size_t angular_steps = 4096;
    std::uint64_t seed = 0;
};

// Sample-based design: the chosen algorithm sees the training set only.
inline DesignReport design_from_samples(const SampleSet& train, const Projection& p, const QualityFunction& f,
                                        CostModel cm, double sigma, double r, double eps,
                                        DesignMethod method = DesignMethod::threshold_alg1,
                                        std::size_t angular_steps = 4096) {
    if (method == DesignMethod::threshold_baseline) return baseline_4rc(train, p, f, cm, r);
    return algorithm1(train, p, f, cm, sigma, r, eps, angular_steps);
}

// Per-(m, trial) training sets and the shared holdout draw from seeds derived
// off the master, so the sweep is one pure function of its parameters and the
// row set never depends on execution order.
inline SweepResult convergence_sweep(const GeneratorSpec& spec, const SmoothingSpec& sm, const Projection& p,
                                     const QualityFunction& f, CostModel cm, const SweepParams& par) {
    if (par.m_list.empty()) throw std::invalid_argument("convergence_sweep: m_list is empty");
    for (std::size_t i = 1; i < par.m_list.size(); ++i)
        if (par.m_list[i] <= par.m_list[i - 1])
            throw std::invalid_argument("convergence_sweep: m_list must be strictly increasing");
    if (par.trials < 1) throw std::invalid_argument("convergence_sweep: trials must be >= 1");
    const std::size_t max_m = par.m_list.back();
    const std::size_t holdout_m = par.holdout_m ? par.holdout_m : 10 * max_m;
    if (holdout_m < 10 * max_m)
        throw std::invalid_argument("convergence_sweep: holdout must be at least 10 x max(m_list)");

    auto draw = [&](std::uint64_t stream, std::size_t m) {
        GeneratorSpec gs = spec;
        gs.seed = detail::derive_seed(par.seed, stream);
        SampleSet base = sample(gs, m);
        if (sm.sigma > 0.0) return smooth(base, sm, detail::derive_seed(gs.seed, 0x5eedull));
        return base;
    };

    const SampleSet holdout = draw(0, holdout_m);
    SweepResult out;
    for (std::size_t mi = 0; mi < par.m_list.size(); ++mi) {
        const std::size_t m = par.m_list[mi];
        for (std::size_t t = 0; t < par.trials; ++t) {
            const std::uint64_t stream = 1 + mi * par.trials + t;
            const SampleSet train = draw(stream, m);
            const DesignReport rep =
                design_from_samples(train, p, f, cm, par.sigma, par.r, par.eps, par.method, par.angular_steps);
            const double holdout_gain = gain(rep.chosen, holdout, f, cm).gain;
            out.rows.push_back(SweepRow{m, t, rep.gain, holdout_gain, std::abs(rep.gain - holdout_gain)});
        }
    }
    return out;
}

inline void write_sweep_csv(const SweepResult& res, std::ostream& out) {
    out << "m,trial,empirical_gain,holdout_gain,gap\n";
    for (const SweepRow& row : res.rows)
        out << row.m << ',' << row.trial << ',' << detail::format_double(row.empirical_gain) << ','
            << detail::format_double(row.holdout_gain) << ',' << detail::format_double(row.gap) << '\n';
}

inline void write_median_csv(const SweepResult& res, std::ostream& out) {
    out << "m,median_gap\n";
    for (const auto& [m, med] : res.median_gaps()) out << m << ',' << detail::format_double(med) << '\n';
}

// Least-squares slope of log10(median gap) against log10(m); zero gaps are
// floored at 1e-300 rather than dropped so a degenerate sweep fails loudly.
inline double loglog_slope(const std::vector<std::pair<std::size_t, double>>& medians) {
    if (medians.size() < 2) throw std::invalid_argument("loglog_slope: need at least two m groups");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double k = static_cast<double>(medians.size());
    for (const auto& [m, g] : medians) {
        const double x = std::log10(static_cast<double>(m));
        const double y = std::log10(std::max(g, 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

}  // namespace stratmech
