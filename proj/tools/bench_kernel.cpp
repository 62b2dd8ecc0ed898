// Micro-benchmark and self-check for the incremental plane sweep.
// Usage: bench_kernel [m] [steps] [ell] [tau0] [validate 0|1]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "stratmech/detail/margin_scan.hpp"
#include "stratmech/detail/rng.hpp"

using namespace stratmech;

int main(int argc, char** argv) {
    const std::size_t m = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 50000;
    const std::size_t steps = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 3000;
    const double ell = argc > 3 ? std::strtod(argv[3], nullptr) : 0.4;
    const double tau0 = argc > 4 ? std::strtod(argv[4], nullptr) : 0.05;
    const bool validate = argc > 5 && std::string(argv[5]) == "1";
    const double eps_prime = 4.000000000000003e-06;

    detail::Rng rng(42);
    std::vector<double> a(m), q(m);
    for (std::size_t i = 0; i < m; ++i) {
        const bool left = rng.unit() < 0.5;
        a[i] = (left ? -0.8 : 0.9) + 0.45 * rng.normal();
        q[i] = 0.6 * rng.normal();
        if (rng.unit() < 0.02) a[i] = 0.25;  // duplicate plateau
    }

    detail::PlaneSweep sweep;
    std::vector<double> ref;
    std::size_t bad = 0;
    double checksum = 0.0;
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t t = 0; t < steps; ++t) {
        const double tau = std::min(tau0 + static_cast<double>(t) * eps_prime, 1.0);
        const double c = tau;
        const double sn = std::sqrt((1.0 - c) * (1.0 + c));
        if (t == 0)
            sweep.init(a, q, c, sn, ell);
        else
            sweep.step(c, sn);
        const detail::PlaneSweep::Best wb = sweep.best();
        const double sd = sweep.soft_sum(wb.lo, wb.hi + 1, wb.b);
        checksum += wb.b + sd + static_cast<double>(wb.count);
        if (validate) {
            ref.resize(m);
            for (std::size_t i = 0; i < m; ++i) ref[i] = std::fma(c, a[i], sn * q[i]);
            std::sort(ref.begin(), ref.end());
            const double* sp = sweep.proj();
            for (std::size_t i = 0; i < m; ++i)
                if (sp[i] != ref[i]) { ++bad; break; }
            const detail::WindowBest rb = detail::best_window_sorted(ref.data(), m, ell);
            if (rb.b != wb.b || rb.count != wb.count || rb.lo != wb.lo || rb.hi != wb.hi) ++bad;
            const double rs = detail::window_sum(ref.data(), rb.lo, rb.hi + 1, rb.b);
            if (std::abs(rs - sd) > 1e-9 * std::max(1.0, std::abs(rs))) ++bad;
        }
    }
    const auto stop = std::chrono::steady_clock::now();
    const double us = std::chrono::duration<double, std::micro>(stop - start).count();
    std::printf("m=%zu steps=%zu ell=%.3f tau0=%.3f  %.2f us/step  checksum=%.6f%s\n", m, steps, ell, tau0,
                us / static_cast<double>(steps), checksum,
                validate ? (bad ? "  VALIDATION FAILED" : "  validation ok") : "");
    return bad ? 1 : 0;
}
