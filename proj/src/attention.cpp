#include "proattn/attention.hpp"

#include "proattn/threads.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace proattn {

void validate(const AttentionConfig& cfg) {
    validate(cfg.penalty);
    if (!(cfg.eps > 0.0))
        throw std::invalid_argument("attention config: eps must be > 0");
}

Matrix softmax_rows(const Matrix& scores) {
    require_finite(scores, "softmax_rows");
    Matrix out(scores.rows, scores.cols);
    parallel_for(scores.rows, [&](std::size_t i) {
        const double* s = scores.row(i);
        double* o = out.row(i);
        double m = s[0];
        for (std::size_t j = 1; j < scores.cols; ++j) m = std::max(m, s[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < scores.cols; ++j) {
            o[j] = std::exp(s[j] - m);
            sum += o[j];
        }
        for (std::size_t j = 0; j < scores.cols; ++j) o[j] /= sum;
    });
    return out;
}

Matrix attention_matrix(const Matrix& q, const Matrix& k, bool scaled, MacCounter* mc) {
    if (q.cols != k.cols)
        throw std::invalid_argument("attention_matrix: query/key width mismatch (" +
                                    std::to_string(q.cols) + " vs " + std::to_string(k.cols) +
                                    ")");
    Matrix scores = matmul_nt(q, k, mc);
    if (scaled) {
        const double inv = 1.0 / std::sqrt(static_cast<double>(q.cols));
        for (double& v : scores.data) v *= inv;
    }
    return softmax_rows(scores);
}

Matrix vanilla_attention(const Matrix& q, const Matrix& k, const Matrix& v, bool scaled,
                         MacCounter* mc) {
    if (k.rows != v.rows)
        throw std::invalid_argument("vanilla_attention: key/value count mismatch");
    return matmul(attention_matrix(q, k, scaled, mc), v, mc);
}

Matrix pairwise_distances(const Matrix& z, const Matrix& v, MacCounter* mc) {
    if (z.cols != v.cols)
        throw std::invalid_argument("pairwise_distances: dimension mismatch");
    Matrix out(z.rows, v.rows);
    parallel_for(z.rows, [&](std::size_t i) {
        const double* zi = z.row(i);
        double* o = out.row(i);
        for (std::size_t j = 0; j < v.rows; ++j) {
            const double* vj = v.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < z.cols; ++k) {
                const double d = zi[k] - vj[k];
                acc += d * d;
            }
            o[j] = std::sqrt(acc);
        }
    });
    if (mc) mc->macs += static_cast<std::int64_t>(z.rows) * v.rows * z.cols;
    return out;
}

Matrix pro_attention(const Matrix& q, const Matrix& k, const Matrix& v,
                     const AttentionConfig& cfg, MacCounter* mc) {
    validate(cfg);
    if (k.rows != v.rows)
        throw std::invalid_argument("pro_attention: key/value count mismatch");
    const Matrix a = attention_matrix(q, k, cfg.scaled, mc);
    // Initialization A V is excluded from the counter by convention; the
    // counter models one score product plus two products per iteration.
    Matrix z = matmul(a, v, nullptr);
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        const Matrix dist = pairwise_distances(z, v, mc);
        Matrix masked(a.rows, a.cols);
        parallel_for(a.rows, [&](std::size_t i) {
            const double* ar = a.row(i);
            const double* dr = dist.row(i);
            double* m = masked.row(i);
            for (std::size_t j = 0; j < a.cols; ++j)
                m[j] = ar[j] * irls_weight(cfg.penalty, dr[j], cfg.eps);
        });
        const Matrix num = matmul(masked, v, mc);
        parallel_for(z.rows, [&](std::size_t i) {
            const double* m = masked.row(i);
            double den = 0.0;
            for (std::size_t j = 0; j < masked.cols; ++j) den += m[j];
            if (den == 0.0) return; // every weight saturated: keep the row
            const double* n = num.row(i);
            double* zr = z.row(i);
            for (std::size_t c = 0; c < z.cols; ++c) zr[c] = n[c] / den;
        });
    }
    return z;
}

void validate_multi_head(const MultiHeadParams& p, std::size_t d_model) {
    const std::size_t h = p.wq.size();
    if (h == 0) throw std::invalid_argument("multi-head params: no heads");
    if (p.wk.size() != h || p.wv.size() != h)
        throw std::invalid_argument("multi-head params: per-head list lengths differ");
    const std::size_t d_head = p.wq[0].cols;
    if (d_head == 0) throw std::invalid_argument("multi-head params: zero head width");
    for (std::size_t i = 0; i < h; ++i) {
        for (const Matrix* w : {&p.wq[i], &p.wk[i], &p.wv[i]}) {
            if (w->rows != d_model)
                throw std::invalid_argument("multi-head params: projection rows != d_model");
            if (w->cols != d_head)
                throw std::invalid_argument("multi-head params: head widths differ");
            require_finite(*w, "multi-head params");
        }
    }
    if (p.wo.rows != h * d_head)
        throw std::invalid_argument("multi-head params: wo rows != heads * d_head");
    require_finite(p.wo, "multi-head params");
}

Matrix multi_head_pro_attention(const Matrix& x, const MultiHeadParams& p,
                                const AttentionConfig& cfg, MacCounter* mc) {
    validate_multi_head(p, x.cols);
    const std::size_t h = p.wq.size();
    const std::size_t d_head = p.wq[0].cols;
    Matrix concat(x.rows, h * d_head);
    for (std::size_t head = 0; head < h; ++head) {
        const Matrix qh = matmul(x, p.wq[head], mc);
        const Matrix kh = matmul(x, p.wk[head], mc);
        const Matrix vh = matmul(x, p.wv[head], mc);
        const Matrix zh = pro_attention(qh, kh, vh, cfg, mc);
        for (std::size_t i = 0; i < x.rows; ++i)
            for (std::size_t j = 0; j < d_head; ++j)
                concat.at(i, head * d_head + j) = zh.at(i, j);
    }
    return matmul(concat, p.wo, mc);
}

} // namespace proattn
