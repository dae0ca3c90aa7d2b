#pragma once

#include <cstdint>
#include <random>

namespace czvar {

/// Seeded generator with a platform-independent mapping to doubles (the
/// standard distributions are implementation-defined, which would make
/// corpora differ between standard libraries).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : std::uint64_t(uniform() * double(n)); }
    double sign() { return (engine_() >> 63) ? -1.0 : 1.0; }
    std::uint64_t bits() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace czvar
