// Simulation lab: synthetic experiments exercising the robust estimator.
//
//  * mixture sampling: clean Gaussian cluster plus a displaced outlier
//    cluster, sampled from the pinned deterministic generator;
//  * outlier sweep: estimator error against the clean-sample mean across
//    penalties and seeds;
//  * trajectory: a fixed 3-token instance whose iterates are easy to follow
//    by hand;
//  * descent curves: mean robust loss per iteration over a batch of random
//    attention problems, optionally with a fixed-step gradient baseline.
#pragma once

#include "proattn/estimator.hpp"
#include "proattn/matrix.hpp"
#include "proattn/penalty.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace proattn {

// Mixture of a clean cluster and an outlier cluster. The outlier count is
// derived from the contamination fraction: round(frac / (1 - frac) * n_clean),
// so frac is the outliers' share of the full sample. Dimensions follow the
// mean vectors. Standard deviations at or below 1e-12 place points exactly
// at the mean.
struct MixtureSpec {
    std::size_t n_clean = 100;
    double outlier_frac = 0.45;
    Vector clean_mean = {0.0, 0.0};
    double clean_std = 1.0;
    Vector outlier_mean = {8.0, 8.0};
    double outlier_std = 0.5;
};

void validate(const MixtureSpec& spec);

std::size_t outlier_count(const MixtureSpec& spec);

// points holds the clean block (rows 0..n_clean-1) followed by the outlier
// block; clean_sample_mean is the empirical mean of the clean block and is
// the ground truth that estimator errors are measured against.
struct MixtureSample {
    Matrix points;
    std::size_t n_clean = 0;
    Vector clean_sample_mean;
};

/// Draws the mixture from a single SplitMix64/Box-Muller stream seeded with
/// `seed`: points in block order, coordinates in order, two generator words
/// per normal pair. Bit-exact across platforms and runs.
MixtureSample sample_mixture(const MixtureSpec& spec, std::uint64_t seed);

struct OutlierReport {
    MixtureSpec spec;
    std::size_t steps = 0;
    double eps = 0.0;
    std::vector<std::uint64_t> seeds;
    std::vector<Penalty> penalties;
    std::vector<std::vector<double>> errors; // [penalty][seed]
    std::vector<double> median_errors;       // per penalty
};

/// For each seed and penalty: sample the mixture, run Newton-IRLS with
/// uniform weights, and record the distance from the final iterate to the
/// clean-sample mean.
OutlierReport outlier_experiment(const MixtureSpec& spec,
                                 const std::vector<Penalty>& penalties,
                                 std::size_t steps, double eps,
                                 const std::vector<std::uint64_t>& seeds);

// The fixed trajectory instance: three 2-D value vectors with three weight
// rows, one uniform and two single-support.
Matrix trajectory_values();
std::vector<Vector> trajectory_weight_rows();

/// Runs Newton-IRLS (weights recorded) from the normalized weighted-mean
/// initializer for each trajectory weight row.
std::vector<IrlsTrace> trajectory_experiment(const Penalty& penalty, std::size_t steps,
                                             double eps);

struct DescentReport {
    std::size_t batches = 0, heads = 0, tokens = 0, dim = 0, steps = 0;
    double eps = 0.0;
    std::uint64_t seed = 0;
    std::vector<Penalty> penalties;
    std::vector<std::vector<double>> newton_mean_loss; // [penalty][step 0..steps]
    bool has_gd = false;
    double gd_eta = 0.0;
    std::vector<std::vector<double>> gd_mean_loss; // filled when has_gd
};

/// Builds batches*heads random attention problems (Gaussian Q, K, V of shape
/// tokens x dim, scores scaled), runs every token's estimation for each
/// penalty, and averages the loss trace across all tokens.
DescentReport descent_curves(const std::vector<Penalty>& penalties, std::size_t batches,
                             std::size_t heads, std::size_t tokens, std::size_t dim,
                             std::size_t steps, double eps, std::uint64_t seed,
                             bool include_gd, double gd_eta);

/// Mean squared residual around the weighted least-squares estimate:
/// (1/N) sum_j ||v_j - z*||^2 with z* = wls_estimate(values, weights).
double residual_diagnostics(const Matrix& values, const Vector& weights);

// CSV/JSON serialization. CSV files start with "# key=value" metadata lines
// followed by a header row; floats are shortest round-trip decimals.
std::string outlier_csv(const OutlierReport& report);
std::string outlier_json(const OutlierReport& report);
std::string descent_csv(const DescentReport& report);
std::string descent_json(const DescentReport& report);
std::string trajectory_csv(const std::vector<IrlsTrace>& traces, const Penalty& penalty,
                           double eps);
std::string trajectory_json(const std::vector<IrlsTrace>& traces, const Penalty& penalty,
                            double eps);

} // namespace proattn
