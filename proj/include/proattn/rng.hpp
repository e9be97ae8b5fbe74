// Deterministic random number generation used by the simulation lab and tests.
// The generator and the normal-variate procedure are pinned bit-exactly so
// experiment outputs are reproducible across platforms and across languages
// that implement the same two algorithms.
#pragma once

#include <cmath>
#include <cstdint>

namespace proattn {

// SplitMix64 (Steele, Lea, Flood 2014). One 64-bit state word, full period.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1) with 53 random bits: (next_u64() >> 11) * 2^-53.
    double next_uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1]; shifts the lattice up one step so log() is safe.
    double next_uniform_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }
};

// Standard normal variates via Box-Muller. Each pair consumes exactly two
// generator outputs, in order: u1 = next_uniform_pos(), u2 = next_uniform().
// n0 = sqrt(-2 ln u1) cos(2 pi u2), n1 = sqrt(-2 ln u1) sin(2 pi u2).
// Callers that need single variates must still consume whole pairs; this
// keeps the stream position a pure function of the variate count.
struct GaussianSource {
    SplitMix64 gen;
    double spare = 0.0;
    bool have_spare = false;

    explicit GaussianSource(std::uint64_t seed) : gen(seed) {}

    double next() {
        if (have_spare) {
            have_spare = false;
            return spare;
        }
        const double u1 = gen.next_uniform_pos();
        const double u2 = gen.next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare = r * std::sin(a);
        have_spare = true;
        return r * std::cos(a);
    }
};

} // namespace proattn
