#include "proattn/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace proattn {

Matrix::Matrix(std::size_t r, std::size_t c, double fill)
    : rows(r), cols(c), data(r * c, fill) {}

Matrix matrix_from(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Matrix{};
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols)
            throw std::invalid_argument("matrix_from: ragged rows");
        for (std::size_t j = 0; j < m.cols; ++j) m.at(i, j) = rows[i][j];
    }
    return m;
}

void require_finite(const Matrix& m, const char* what) {
    for (double v : m.data)
        if (!std::isfinite(v))
            throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

Matrix matmul(const Matrix& a, const Matrix& b, MacCounter* mc) {
    if (a.cols != b.rows)
        throw std::invalid_argument("matmul: inner dimensions differ (" +
                                    std::to_string(a.cols) + " vs " + std::to_string(b.rows) + ")");
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ar = a.row(i);
        double* orow = out.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = ar[k];
            const double* br = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * br[j];
        }
    }
    if (mc) mc->macs += static_cast<std::int64_t>(a.rows) * a.cols * b.cols;
    return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b, MacCounter* mc) {
    if (a.cols != b.cols)
        throw std::invalid_argument("matmul_nt: inner dimensions differ (" +
                                    std::to_string(a.cols) + " vs " + std::to_string(b.cols) + ")");
    Matrix out(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ar = a.row(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* br = b.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) acc += ar[k] * br[k];
            out.at(i, j) = acc;
        }
    }
    if (mc) mc->macs += static_cast<std::int64_t>(a.rows) * b.rows * a.cols;
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw std::invalid_argument("add: shape mismatch");
    Matrix out(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] + b.data[i];
    return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw std::invalid_argument("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::fabs(a.data[i] - b.data[i]));
    return m;
}

} // namespace proattn
