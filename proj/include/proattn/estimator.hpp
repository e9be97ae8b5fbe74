// Robust token estimation. A token's context vector is recast as the solution
// of a weighted robust regression over the value vectors: minimize
//
//   L(z) = sum_j a_j rho(||v_j - z||)
//
// where a_j are nonnegative attention weights. The minimizer is approached by
// Newton-IRLS: at each iterate, replace rho by its quadratic upper bound that
// touches at the current residuals, then jump to that bound's closed-form
// minimizer (a reweighted mean). Each step provably does not increase L.
#pragma once

#include "proattn/matrix.hpp"
#include "proattn/penalty.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace proattn {

using Vector = std::vector<double>;

// N weighted value vectors. values holds one vector per row; weights are
// nonnegative with at least one strictly positive entry.
struct WeightedPoints {
    Matrix values;               // N x D
    std::vector<double> weights; // N
};

/// Throws std::invalid_argument when shapes, finiteness, or weight-sign
/// requirements are not met.
void validate(const WeightedPoints& pts);

// One run of an iterative estimator: iterates[0] is the initializer and
// losses[k] is the robust loss at iterates[k]. per_step_weights, when
// recorded, holds the IRLS weight vector used to move from iterate k to k+1.
struct IrlsTrace {
    std::vector<Vector> iterates;
    std::vector<double> losses;
    std::optional<std::vector<std::vector<double>>> per_step_weights;

    const Vector& final() const { return iterates.back(); }
};

/// Weighted least-squares estimate: sum_j a_j v_j / sum_j a_j.
Vector wls_estimate(const WeightedPoints& pts);

/// L(z) = sum_j a_j rho(||v_j - z||). Residuals enter rho unclamped.
double robust_loss(const Penalty& p, const WeightedPoints& pts, const Vector& z);

/// Quadratic upper bound anchored at `anchor`, evaluated at z:
///   U(z) = sum_j a_j w_j ||v_j - z||^2 + C,
/// with w_j the IRLS weights at the anchor residuals and C chosen by
/// subtraction so that U(anchor) equals robust_loss(p, pts, anchor) exactly.
double upper_bound_loss(const Penalty& p, const WeightedPoints& pts, const Vector& z,
                        const Vector& anchor, double eps);

/// One Newton-IRLS step from z: the reweighted mean
///   sum_j a_j w_j v_j / sum_j a_j w_j.
/// If every product a_j w_j is zero the step returns z unchanged.
Vector newton_irls_step(const Penalty& p, const WeightedPoints& pts, const Vector& z,
                        double eps);

/// Runs `steps` Newton-IRLS steps and records the full trace (steps+1
/// iterates and losses). Starts from `init` when given, otherwise from the
/// weighted-mean initializer.
IrlsTrace newton_irls(const Penalty& p, const WeightedPoints& pts, std::size_t steps,
                      double eps, std::optional<Vector> init = std::nullopt,
                      bool record_weights = false);

/// One explicit gradient step on the current quadratic bound:
///   z - eta * sum_j a_j w_j * 2 (z - v_j).
/// With eta = 1 / (2 sum_j a_j w_j) this reproduces newton_irls_step.
Vector gd_step(const Penalty& p, const WeightedPoints& pts, const Vector& z, double eta,
               double eps);

/// Gradient-descent analogue of newton_irls with a fixed step size.
IrlsTrace gd_descent(const Penalty& p, const WeightedPoints& pts, std::size_t steps,
                     double eta, double eps);

/// Weiszfeld fixed-point iteration for the weighted l1 objective
/// sum_j a_j ||v_j - z||. Independent of the Newton-IRLS code path; used as
/// a reference in tests. Starts at the weighted mean, stops when an update
/// moves less than tol, throws std::runtime_error (reporting the last
/// iterate) if max_iter updates do not converge.
Vector geometric_median_oracle(const WeightedPoints& pts, double tol, std::size_t max_iter);

/// Largest loss increase over consecutive trace entries, each measured
/// relative to max(1, loss_k); descent holds when this is <= the slack.
double worst_ascent(const IrlsTrace& trace);

} // namespace proattn
