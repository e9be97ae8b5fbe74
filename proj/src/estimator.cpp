#include "proattn/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace proattn {

namespace {

// Shared reduction core: out = sum_j c_j v_j / sum_j c_j. Both wls_estimate
// and newton_irls_step run through this loop so they accumulate in the same
// order; when the weights are a constant w, every term scales exactly and
// the two results agree bit for bit.
bool weighted_mean(const Matrix& v, const std::vector<double>& coeff, Vector& out) {
    const std::size_t n = v.rows, d = v.cols;
    out.assign(d, 0.0);
    double den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double c = coeff[j];
        den += c;
        const double* row = v.row(j);
        for (std::size_t k = 0; k < d; ++k) out[k] += c * row[k];
    }
    if (den == 0.0) return false;
    for (std::size_t k = 0; k < d; ++k) out[k] /= den;
    return true;
}

double residual_norm(const double* v, const Vector& z) {
    double acc = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        const double r = v[k] - z[k];
        acc += r * r;
    }
    return std::sqrt(acc);
}

void require_z(const WeightedPoints& pts, const Vector& z, const char* who) {
    if (z.size() != pts.values.cols)
        throw std::invalid_argument(std::string(who) + ": estimate dimension mismatch");
}

std::vector<double> step_coefficients(const Penalty& p, const WeightedPoints& pts,
                                      const Vector& z, double eps,
                                      std::vector<double>* weights_out) {
    const std::size_t n = pts.values.rows;
    std::vector<double> coeff(n);
    if (weights_out) weights_out->resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double w = irls_weight(p, residual_norm(pts.values.row(j), z), eps);
        if (weights_out) (*weights_out)[j] = w;
        coeff[j] = pts.weights[j] * w;
    }
    return coeff;
}

} // namespace

void validate(const WeightedPoints& pts) {
    if (pts.values.rows == 0 || pts.values.cols == 0)
        throw std::invalid_argument("weighted points: empty value set");
    if (pts.weights.size() != pts.values.rows)
        throw std::invalid_argument("weighted points: weight count != value count");
    require_finite(pts.values, "weighted points");
    bool any_positive = false;
    for (double a : pts.weights) {
        if (!std::isfinite(a) || a < 0.0)
            throw std::invalid_argument("weighted points: weights must be finite and >= 0");
        if (a > 0.0) any_positive = true;
    }
    if (!any_positive)
        throw std::invalid_argument("weighted points: all weights are zero");
}

Vector wls_estimate(const WeightedPoints& pts) {
    validate(pts);
    Vector out;
    if (!weighted_mean(pts.values, pts.weights, out))
        throw std::invalid_argument("wls_estimate: weights sum to zero");
    return out;
}

double robust_loss(const Penalty& p, const WeightedPoints& pts, const Vector& z) {
    require_z(pts, z, "robust_loss");
    double acc = 0.0;
    for (std::size_t j = 0; j < pts.values.rows; ++j)
        acc += pts.weights[j] * rho(p, residual_norm(pts.values.row(j), z));
    return acc;
}

namespace {

double quadratic_part(const WeightedPoints& pts, const std::vector<double>& coeff,
                      const Vector& z) {
    double acc = 0.0;
    for (std::size_t j = 0; j < pts.values.rows; ++j) {
        const double r = residual_norm(pts.values.row(j), z);
        acc += coeff[j] * (r * r);
    }
    return acc;
}

} // namespace

double upper_bound_loss(const Penalty& p, const WeightedPoints& pts, const Vector& z,
                        const Vector& anchor, double eps) {
    require_z(pts, z, "upper_bound_loss");
    require_z(pts, anchor, "upper_bound_loss");
    const std::vector<double> coeff = step_coefficients(p, pts, anchor, eps, nullptr);
    // C is recovered by subtraction rather than from closed-form offsets, so
    // the bound matches the true loss at the anchor by construction.
    const double c = robust_loss(p, pts, anchor) - quadratic_part(pts, coeff, anchor);
    return quadratic_part(pts, coeff, z) + c;
}

Vector newton_irls_step(const Penalty& p, const WeightedPoints& pts, const Vector& z,
                        double eps) {
    require_z(pts, z, "newton_irls_step");
    const std::vector<double> coeff = step_coefficients(p, pts, z, eps, nullptr);
    Vector out;
    if (!weighted_mean(pts.values, coeff, out)) return z; // all saturated: stay put
    return out;
}

IrlsTrace newton_irls(const Penalty& p, const WeightedPoints& pts, std::size_t steps,
                      double eps, std::optional<Vector> init, bool record_weights) {
    validate(pts);
    validate(p);
    IrlsTrace trace;
    if (record_weights) trace.per_step_weights.emplace();
    Vector z;
    if (init) {
        require_z(pts, *init, "newton_irls");
        z = std::move(*init);
    } else {
        z = wls_estimate(pts);
    }
    trace.iterates.push_back(z);
    trace.losses.push_back(robust_loss(p, pts, z));
    for (std::size_t k = 0; k < steps; ++k) {
        std::vector<double> w;
        const std::vector<double> coeff =
            step_coefficients(p, pts, z, eps, record_weights ? &w : nullptr);
        if (record_weights) trace.per_step_weights->push_back(std::move(w));
        Vector next;
        if (!weighted_mean(pts.values, coeff, next)) next = z;
        z = std::move(next);
        trace.iterates.push_back(z);
        trace.losses.push_back(robust_loss(p, pts, z));
    }
    return trace;
}

Vector gd_step(const Penalty& p, const WeightedPoints& pts, const Vector& z, double eta,
               double eps) {
    require_z(pts, z, "gd_step");
    const std::size_t n = pts.values.rows, d = pts.values.cols;
    const std::vector<double> coeff = step_coefficients(p, pts, z, eps, nullptr);
    Vector grad(d, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double* row = pts.values.row(j);
        for (std::size_t k = 0; k < d; ++k) grad[k] += coeff[j] * 2.0 * (z[k] - row[k]);
    }
    Vector out(d);
    for (std::size_t k = 0; k < d; ++k) out[k] = z[k] - eta * grad[k];
    return out;
}

IrlsTrace gd_descent(const Penalty& p, const WeightedPoints& pts, std::size_t steps,
                     double eta, double eps) {
    validate(pts);
    validate(p);
    IrlsTrace trace;
    Vector z = wls_estimate(pts);
    trace.iterates.push_back(z);
    trace.losses.push_back(robust_loss(p, pts, z));
    for (std::size_t k = 0; k < steps; ++k) {
        z = gd_step(p, pts, z, eta, eps);
        trace.iterates.push_back(z);
        trace.losses.push_back(robust_loss(p, pts, z));
    }
    return trace;
}

Vector geometric_median_oracle(const WeightedPoints& pts, double tol, std::size_t max_iter) {
    validate(pts);
    if (!(tol > 0.0)) throw std::invalid_argument("geometric_median_oracle: tol must be > 0");
    const std::size_t n = pts.values.rows, d = pts.values.cols;
    // Plain Weiszfeld update with inverse-distance coefficients. The tiny
    // residual floor only guards the exact-hit case; once an iterate lands on
    // the optimal vertex the dominant coefficient pins it there and the
    // movement criterion fires.
    constexpr double kFloor = 1e-30;
    Vector z = wls_estimate(pts);
    for (std::size_t it = 0; it < max_iter; ++it) {
        Vector next(d, 0.0);
        double den = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double* row = pts.values.row(j);
            const double r = residual_norm(row, z);
            const double c = pts.weights[j] / (r > kFloor ? r : kFloor);
            den += c;
            for (std::size_t k = 0; k < d; ++k) next[k] += c * row[k];
        }
        for (std::size_t k = 0; k < d; ++k) next[k] /= den;
        double move = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double dx = next[k] - z[k];
            move += dx * dx;
        }
        z = std::move(next);
        if (std::sqrt(move) < tol) return z;
    }
    std::ostringstream msg;
    msg << "geometric_median_oracle: no convergence after " << max_iter
        << " iterations; last iterate (";
    for (std::size_t k = 0; k < z.size(); ++k) msg << (k ? ", " : "") << z[k];
    msg << ")";
    throw std::runtime_error(msg.str());
}

double worst_ascent(const IrlsTrace& trace) {
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < trace.losses.size(); ++k) {
        const double scale = std::max(1.0, trace.losses[k]);
        worst = std::max(worst, (trace.losses[k + 1] - trace.losses[k]) / scale);
    }
    return worst;
}

} // namespace proattn
