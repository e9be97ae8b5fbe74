// Minimal post-norm encoder block wired around the robust attention layer:
//   y1 = LN1(x + MultiHeadAttention(x))
//   y2 = LN2(y1 + FFN(y1)),  FFN(t) = relu(t W1 + b1) W2 + b2.
// Parameters are loaded from files and never trained here.
#pragma once

#include "proattn/attention.hpp"
#include "proattn/matrix.hpp"

#include <string>
#include <vector>

namespace proattn {

struct BlockParams {
    std::size_t d_model = 0;
    std::size_t d_ff = 0;
    double ln_eps = 1e-5;
    MultiHeadParams attn;
    Matrix w1, w2;              // d_model x d_ff, d_ff x d_model
    std::vector<double> b1, b2; // d_ff, d_model
    std::vector<double> ln1_g, ln1_b, ln2_g, ln2_b; // d_model each
};

void validate(const BlockParams& p);

/// Per-row standardization with population variance, then the affine map
/// gain .* x + bias. ln_eps stabilizes constant rows.
Matrix layer_norm(const Matrix& x, const std::vector<double>& gain,
                  const std::vector<double>& bias, double ln_eps);

/// Full block forward pass; x is n_tokens x d_model.
Matrix encoder_block(const Matrix& x, const BlockParams& p, const AttentionConfig& cfg);

/// Loads parameters from a directory holding block.json plus matrix files
/// wq_h{i}.mat / wk_h{i}.mat / wv_h{i}.mat (i = 0..h-1), wo.mat, w1.mat,
/// b1.mat, w2.mat, b2.mat, ln1_g.mat, ln1_b.mat, ln2_g.mat, ln2_b.mat.
/// Vectors are stored as 1 x d matrices. Missing or malformed files raise
/// IoError naming the file.
BlockParams load_block_params(const std::string& dir);

} // namespace proattn
