#pragma once
// Deterministic random source for the simulation. mt19937_64 output is
// pinned by the standard; the value mappings here are spelled out
// explicitly so seeded runs are bit-identical everywhere.

#include <cstdint>
#include <random>
#include <span>

namespace cpseq {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0);
    }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);

    // Standard normal via the Marsaglia polar method.
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Index drawn with probability proportional to weights[i] (all >= 0,
    // not all zero).
    std::size_t pick_weighted(std::span<const double> weights);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace cpseq
