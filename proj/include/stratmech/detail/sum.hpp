#pragma once

#include <cmath>
#include <cstddef>

namespace stratmech::detail {

// Neumaier-compensated accumulator. Sample functionals must not depend on
// reduction order beyond 1e-12, which plain left-to-right sums cannot promise
// once partial sums are merged from chunks.
class Accumulator {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }

    void merge(const Accumulator& other) {
        add(other.sum_);
        add(other.comp_);
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace stratmech::detail
