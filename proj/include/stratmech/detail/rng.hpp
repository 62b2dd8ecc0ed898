#pragma once

#include <cmath>
#include <cstdint>

namespace stratmech::detail {

// splitmix64: tiny, seed-stable, passes BigCrush. One state word, so streams
// can be derived per point and drawn in any order (or in parallel) without
// changing the output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Decorrelates a per-item stream from the master seed. Hashing the stream id
// keeps neighbouring streams from overlapping state sequences.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (stream * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull);
    splitmix64(s);
    splitmix64(s);
    return s;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1)
    double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0, 1], safe as a log argument
    double unit_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    // Box-Muller; the spare half of each pair is kept so n draws cost n/2
    // transforms. Stream-stable: output depends only on the seed.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u = unit_pos();
        const double v = unit();
        const double radius = std::sqrt(-2.0 * std::log(u));
        const double angle = 6.283185307179586476925286766559 * v;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

constexpr const char* kSamplerName = "splitmix64/box-muller";

}  // namespace stratmech::detail
