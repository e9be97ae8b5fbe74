// Softmax attention and its robust reweighted variant.
//
// A row of softmax attention is a weighted mean of value vectors, i.e. the
// least-squares estimate under the attention weights. The robust variant
// keeps the attention matrix A fixed and runs the Newton-IRLS update in
// matrix form: distances between current estimates and values give
// elementwise weights W, and the next estimate is (W .* A) V with each row
// normalized by its total weight mass. With the pure quadratic penalty every
// step reproduces vanilla attention.
#pragma once

#include "proattn/matrix.hpp"
#include "proattn/penalty.hpp"

#include <cstddef>
#include <vector>

namespace proattn {

struct AttentionConfig {
    Penalty penalty;
    std::size_t steps = 3; // Newton-IRLS iterations K
    double eps = 1e-6;     // residual floor for the IRLS weights
    bool scaled = true;    // divide scores by sqrt(D) before softmax
};

void validate(const AttentionConfig& cfg);

/// Row-wise softmax with max-subtraction, safe for widely spread scores.
/// Rows sum to 1 within 1e-12.
Matrix softmax_rows(const Matrix& scores);

/// softmax(Q K^T / sqrt(D)) (or unscaled). When a counter is supplied it
/// accumulates the score product's multiply-accumulates; the scaling and the
/// softmax itself are not counted.
Matrix attention_matrix(const Matrix& q, const Matrix& k, bool scaled,
                        MacCounter* mc = nullptr);

/// attention_matrix(q, k) * v.
Matrix vanilla_attention(const Matrix& q, const Matrix& k, const Matrix& v, bool scaled,
                         MacCounter* mc = nullptr);

/// Euclidean distances: out(i, j) = ||z_i - v_j||. Counted as one
/// multiply-accumulate per coordinate per pair.
Matrix pairwise_distances(const Matrix& z, const Matrix& v, MacCounter* mc = nullptr);

/// Robust attention. Z starts at A V and is refined by cfg.steps reweighted
/// updates; rows whose weight mass vanishes are left unchanged. Row i of the
/// result matches the token-wise Newton-IRLS estimate run against row i of A.
///
/// Counter convention (shared with the cost model): the counter accumulates
/// the A construction plus each iteration's distance and update products.
/// The initial A V product is excluded so measured totals line up with the
/// analytic per-iteration accounting; see costmodel.hpp.
Matrix pro_attention(const Matrix& q, const Matrix& k, const Matrix& v,
                     const AttentionConfig& cfg, MacCounter* mc = nullptr);

// Per-head projection weights; head h maps d_model -> d_head via wq[h],
// wk[h], wv[h]. Concatenated head outputs go through wo
// (h * d_head rows).
struct MultiHeadParams {
    std::vector<Matrix> wq, wk, wv;
    Matrix wo;
};

void validate_multi_head(const MultiHeadParams& p, std::size_t d_model);

/// Runs pro_attention per head on the projected inputs, concatenates head
/// outputs along columns, and applies the output projection.
Matrix multi_head_pro_attention(const Matrix& x, const MultiHeadParams& p,
                                const AttentionConfig& cfg, MacCounter* mc = nullptr);

} // namespace proattn
