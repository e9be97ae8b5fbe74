// Dense row-major matrix of doubles plus the handful of kernels the library
// needs. Entries are required to be finite; constructors and file readers
// enforce it so downstream numerics never see NaN or infinity.
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace proattn {

// Counts fused multiply-accumulate work done by the kernels that accept one.
// Accumulated per call from the executed loop bounds; callers pass nullptr
// when a product is excluded from an accounting by convention.
struct MacCounter {
    std::int64_t macs = 0;
};

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data; // row-major, rows * cols entries

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0);

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }
};

/// Builds a matrix from nested initializer data; throws on ragged rows.
Matrix matrix_from(const std::vector<std::vector<double>>& rows);

/// Throws std::invalid_argument if any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);

/// a * b. Throws std::invalid_argument on inner-dimension mismatch.
Matrix matmul(const Matrix& a, const Matrix& b, MacCounter* mc = nullptr);

/// a * b^T with a: m x d and b: n x d, giving m x n.
Matrix matmul_nt(const Matrix& a, const Matrix& b, MacCounter* mc = nullptr);

/// Elementwise sum; shapes must match.
Matrix add(const Matrix& a, const Matrix& b);

double max_abs_diff(const Matrix& a, const Matrix& b);

} // namespace proattn
