#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "proattn/block.hpp"
#include "proattn/rng.hpp"

#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

using namespace proattn;
using testsupport::random_matrix;

namespace {

std::vector<double> constant_vec(std::size_t n, double x) {
    return std::vector<double>(n, x);
}

Matrix scaled_random(GaussianSource& gauss, std::size_t rows, std::size_t cols,
                     double scale) {
    Matrix m = random_matrix(gauss, rows, cols);
    for (double& v : m.data) v *= scale;
    return m;
}

// A fully seeded parameter bundle: two heads over d_model 8, ffn width 16,
// gains near one and small biases. Score projections are kept small so the
// attention stays spread out, and value projections map unit-scale tokens
// into a cluster tighter than the damping radius; both are what a trained
// block would look like after normalization layers.
BlockParams build_params(std::uint64_t seed) {
    GaussianSource gauss(seed);
    BlockParams p;
    p.d_model = 8;
    p.d_ff = 16;
    p.ln_eps = 1e-5;
    for (int h = 0; h < 2; ++h) {
        p.attn.wq.push_back(scaled_random(gauss, 8, 4, 0.1));
        p.attn.wk.push_back(scaled_random(gauss, 8, 4, 0.1));
        p.attn.wv.push_back(scaled_random(gauss, 8, 4, 0.3));
    }
    p.attn.wo = scaled_random(gauss, 8, 8, 0.5);
    p.w1 = scaled_random(gauss, 8, 16, 0.5);
    p.w2 = scaled_random(gauss, 16, 8, 0.5);
    p.b1 = constant_vec(16, 0.0);
    p.b2 = constant_vec(8, 0.0);
    for (std::size_t j = 0; j < 16; ++j) p.b1[j] = 0.1 * gauss.next();
    for (std::size_t j = 0; j < 8; ++j) p.b2[j] = 0.1 * gauss.next();
    p.ln1_g = constant_vec(8, 1.0);
    p.ln1_b = constant_vec(8, 0.0);
    p.ln2_g = constant_vec(8, 1.0);
    p.ln2_b = constant_vec(8, 0.0);
    for (std::size_t j = 0; j < 8; ++j) {
        p.ln1_g[j] += 0.05 * gauss.next();
        p.ln2_g[j] += 0.05 * gauss.next();
        p.ln1_b[j] = 0.05 * gauss.next();
        p.ln2_b[j] = 0.05 * gauss.next();
    }
    return p;
}

double frobenius_tail(const Matrix& a, const Matrix& b) {
    // Frobenius distance over every row but the first.
    double acc = 0.0;
    for (std::size_t i = 1; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) {
            const double d = a.at(i, j) - b.at(i, j);
            acc += d * d;
        }
    return std::sqrt(acc);
}

} // namespace

TEST_CASE("layer norm: constant rows collapse to the bias") {
    const Matrix x = matrix_from({{2.0, 2.0, 2.0, 2.0, 2.0}});
    const Matrix out = layer_norm(x, constant_vec(5, 1.0), constant_vec(5, 0.0), 1e-5);
    for (double v : out.data) CHECK(v == 0.0);

    const Matrix biased = layer_norm(x, constant_vec(5, 3.0), constant_vec(5, -0.5), 1e-5);
    for (double v : biased.data) CHECK(v == -0.5);
}

TEST_CASE("layer norm: an already standardized row passes through") {
    const Matrix x = matrix_from({{1.0, -1.0}});
    const Matrix out = layer_norm(x, constant_vec(2, 1.0), constant_vec(2, 0.0), 1e-12);
    CHECK(std::fabs(out.at(0, 0) - 1.0) <= 1e-9);
    CHECK(std::fabs(out.at(0, 1) + 1.0) <= 1e-9);
}

TEST_CASE("layer norm: output moments are standardized") {
    GaussianSource gauss(9);
    const Matrix x = random_matrix(gauss, 1, 16);
    const Matrix out = layer_norm(x, constant_vec(16, 1.0), constant_vec(16, 0.0), 1e-9);
    double mean = 0.0;
    for (double v : out.data) mean += v;
    mean /= 16.0;
    CHECK(std::fabs(mean) <= 1e-12);
    double var = 0.0;
    for (double v : out.data) var += (v - mean) * (v - mean);
    var /= 16.0;
    CHECK(std::fabs(var - 1.0) <= 1e-6);
}

TEST_CASE("layer norm: shape and eps validation") {
    const Matrix x = matrix_from({{1.0, 2.0}});
    CHECK_THROWS_AS(layer_norm(x, constant_vec(3, 1.0), constant_vec(2, 0.0), 1e-5),
                    std::invalid_argument);
    CHECK_THROWS_AS(layer_norm(x, constant_vec(2, 1.0), constant_vec(2, 0.0), 0.0),
                    std::invalid_argument);
}

TEST_CASE("quadratic-penalty block equals the zero-step block") {
    const BlockParams p = build_params(100);
    GaussianSource gauss(101);
    const Matrix x = random_matrix(gauss, 6, 8);
    const Matrix refined = encoder_block(x, p, {make_l2(), 3, 1e-6, true});
    const Matrix plain = encoder_block(x, p, {make_l2(), 0, 1e-6, true});
    CHECK(max_abs_diff(refined, plain) <= 1e-10);
}

TEST_CASE("zero ffn with plain norms reduces to two normalization layers") {
    BlockParams p = build_params(7);
    for (double& v : p.w1.data) v = 0.0;
    for (double& v : p.w2.data) v = 0.0;
    p.b1 = constant_vec(16, 0.0);
    p.b2 = constant_vec(8, 0.0);
    GaussianSource gauss(8);
    const Matrix x = random_matrix(gauss, 5, 8);
    const AttentionConfig cfg{make_mcp(4.0), 3, 1e-6, true};
    const Matrix out = encoder_block(x, p, cfg);

    const Matrix attended = multi_head_pro_attention(x, p.attn, cfg);
    const Matrix y1 = layer_norm(add(x, attended), p.ln1_g, p.ln1_b, p.ln_eps);
    const Matrix expected = layer_norm(y1, p.ln2_g, p.ln2_b, p.ln_eps);
    CHECK(max_abs_diff(out, expected) == 0.0);
}

TEST_CASE("forward pass is deterministic across runs and thread counts") {
    const BlockParams p = build_params(12);
    GaussianSource gauss(13);
    const Matrix x = random_matrix(gauss, 8, 8);
    const AttentionConfig cfg{make_huber_mcp(1.0, 4.0), 3, 1e-6, true};
    const Matrix first = encoder_block(x, p, cfg);
    CHECK(max_abs_diff(encoder_block(x, p, cfg), first) == 0.0);
    setenv("PROTATTN_THREADS", "1", 1);
    const Matrix serial = encoder_block(x, p, cfg);
    setenv("PROTATTN_THREADS", "7", 1);
    const Matrix wide = encoder_block(x, p, cfg);
    unsetenv("PROTATTN_THREADS");
    CHECK(max_abs_diff(serial, first) == 0.0);
    CHECK(max_abs_diff(wide, first) == 0.0);
}

TEST_CASE("saturating penalty damps a planted perturbation's influence") {
    // Perturb one token by magnitude 10 and measure how much the OTHER
    // tokens' outputs move. The saturating penalty should transmit less of
    // the shock than the quadratic one, seed by seed and in the median.
    std::vector<double> mcp_influence, l2_influence;
    std::size_t wins = 0;
    for (std::uint64_t seed = 17; seed < 37; ++seed) {
        const BlockParams p = build_params(seed);
        GaussianSource gauss(seed * 31 + 1);
        const Matrix x = random_matrix(gauss, 8, 8);
        Matrix bumped = x;
        Vector dir(8);
        double norm = 0.0;
        for (double& v : dir) {
            v = gauss.next();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (std::size_t j = 0; j < 8; ++j) bumped.at(0, j) += 10.0 * dir[j] / norm;

        const AttentionConfig mcp{make_mcp(4.0), 3, 1e-6, true};
        const AttentionConfig l2{make_l2(), 3, 1e-6, true};
        const double dm = frobenius_tail(encoder_block(x, p, mcp),
                                         encoder_block(bumped, p, mcp));
        const double dl = frobenius_tail(encoder_block(x, p, l2),
                                         encoder_block(bumped, p, l2));
        mcp_influence.push_back(dm);
        l2_influence.push_back(dl);
        if (dm < dl) ++wins;
    }
    std::sort(mcp_influence.begin(), mcp_influence.end());
    std::sort(l2_influence.begin(), l2_influence.end());
    const double mcp_median =
        0.5 * (mcp_influence[9] + mcp_influence[10]);
    const double l2_median = 0.5 * (l2_influence[9] + l2_influence[10]);
    CHECK(mcp_median < l2_median);
    CHECK(wins >= 14);
}

TEST_CASE("parameter validation rejects inconsistent bundles") {
    BlockParams p = build_params(3);
    GaussianSource gauss(4);
    const Matrix x = random_matrix(gauss, 4, 8);
    const AttentionConfig cfg{make_l2(), 1, 1e-6, true};
    CHECK_NOTHROW(encoder_block(x, p, cfg));

    BlockParams bad = p;
    bad.w1 = Matrix(8, 15);
    CHECK_THROWS_AS(encoder_block(x, bad, cfg), std::invalid_argument);
    bad = p;
    bad.b2 = constant_vec(7, 0.0);
    CHECK_THROWS_AS(encoder_block(x, bad, cfg), std::invalid_argument);
    bad = p;
    bad.ln_eps = -1.0;
    CHECK_THROWS_AS(encoder_block(x, bad, cfg), std::invalid_argument);
    bad = p;
    bad.attn.wo = Matrix(8, 7);
    CHECK_THROWS_AS(encoder_block(x, bad, cfg), std::invalid_argument);
    const Matrix narrow(4, 7);
    CHECK_THROWS_AS(encoder_block(narrow, p, cfg), std::invalid_argument);
}
