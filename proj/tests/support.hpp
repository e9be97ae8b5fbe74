// Shared helpers for the test suites: deterministic random problem
// instances and the standard penalty roster.
#pragma once

#include "proattn/attention.hpp"
#include "proattn/estimator.hpp"
#include "proattn/penalty.hpp"
#include "proattn/rng.hpp"

#include <cstdint>
#include <vector>

namespace testsupport {

using namespace proattn;

// Gaussian values with softmax-normalized Gaussian score weights; the shape
// of a single attention row's estimation problem.
inline WeightedPoints random_instance(std::uint64_t seed, std::size_t n, std::size_t d) {
    GaussianSource gauss(seed);
    Matrix values(n, d);
    for (double& x : values.data) x = gauss.next();
    Matrix scores(1, n);
    for (double& x : scores.data) x = gauss.next();
    const Matrix soft = softmax_rows(scores);
    return WeightedPoints{values, soft.data};
}

inline std::vector<Penalty> all_penalties() {
    return {make_l2(), make_l1(), make_huber(1.0), make_mcp(4.0), make_huber_mcp(1.0, 4.0)};
}

inline Matrix random_matrix(GaussianSource& gauss, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& x : m.data) x = gauss.next();
    return m;
}

} // namespace testsupport
