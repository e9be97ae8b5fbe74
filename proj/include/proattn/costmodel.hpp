// Analytic operation counts for the attention mechanisms and instrumented
// measurements to check them.
//
// Analytic model, in multiply-accumulates (MACs) for N tokens of width D and
// K refinement iterations:
//   vanilla: 2 N^2 D            (score product + context product)
//   pro:     (1 + 2K) N^2 D     (score product + per-iteration distances
//                                and reweighted update)
//   kde:     2 N^2 D            (kernel evaluations + aggregation)
//   rkde:    (2 + 3K) N^2 D + 2 K N^3
//
// Counter convention: instrumented counters accumulate the MACs of matrix
// products and per-pair distance evaluations, matching the analytic model's
// accounting. Softmax exponentials, elementwise weight evaluations, the
// Hadamard mask, row normalizations, and the initial A V product of the
// robust path are excluded; the per-step bookkeeping constant is therefore
// zero and counters grow in K with slope exactly 2 N^2 D.
#pragma once

#include <cstdint>
#include <string>

namespace proattn {

enum class Mechanism { Vanilla, Pro, Kde, Rkde };

std::string mechanism_name(Mechanism m);
Mechanism parse_mechanism(const std::string& name);

/// Analytic MAC count; K is ignored for the non-iterative mechanisms.
/// Throws std::invalid_argument on N or D of zero or counts that would
/// overflow.
std::int64_t op_count(Mechanism m, std::int64_t n, std::int64_t d, std::int64_t k);

struct MeasuredCounts {
    std::int64_t pro_macs = 0;
    std::int64_t vanilla_macs = 0;
};

/// Runs instrumented vanilla and robust attention on seed-derived Gaussian
/// inputs of the given shape and returns both counters.
MeasuredCounts measured_counts(std::size_t n, std::size_t d, std::size_t k,
                               std::uint64_t seed);

/// measured pro MACs / measured vanilla MACs. For N >= 32 this lands within
/// ten percent of the analytic ratio (1 + 2K) / 2.
double measured_ratio(std::size_t n, std::size_t d, std::size_t k, std::uint64_t seed);

} // namespace proattn
