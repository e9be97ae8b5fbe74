#include "proattn/simlab.hpp"

#include "proattn/attention.hpp"
#include "proattn/io.hpp"
#include "proattn/rng.hpp"
#include "proattn/threads.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace proattn {

namespace {

double distance(const Vector& a, const Vector& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double median_of(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    if (n == 0) throw std::invalid_argument("median of empty set");
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

} // namespace

void validate(const MixtureSpec& spec) {
    if (spec.n_clean == 0)
        throw std::invalid_argument("mixture spec: n_clean must be >= 1");
    if (!(spec.outlier_frac >= 0.0) || !(spec.outlier_frac < 1.0))
        throw std::invalid_argument("mixture spec: outlier_frac must be in [0, 1)");
    if (spec.clean_mean.empty() || spec.clean_mean.size() != spec.outlier_mean.size())
        throw std::invalid_argument("mixture spec: mean dimensions differ");
    if (!(spec.clean_std >= 0.0) || !(spec.outlier_std >= 0.0))
        throw std::invalid_argument("mixture spec: stds must be >= 0");
    for (double v : spec.clean_mean)
        if (!std::isfinite(v)) throw std::invalid_argument("mixture spec: non-finite mean");
    for (double v : spec.outlier_mean)
        if (!std::isfinite(v)) throw std::invalid_argument("mixture spec: non-finite mean");
}

std::size_t outlier_count(const MixtureSpec& spec) {
    validate(spec);
    const double raw =
        spec.outlier_frac / (1.0 - spec.outlier_frac) * static_cast<double>(spec.n_clean);
    return static_cast<std::size_t>(std::llround(raw));
}

MixtureSample sample_mixture(const MixtureSpec& spec, std::uint64_t seed) {
    validate(spec);
    const std::size_t n_out = outlier_count(spec);
    const std::size_t dim = spec.clean_mean.size();
    MixtureSample sample;
    sample.n_clean = spec.n_clean;
    sample.points = Matrix(spec.n_clean + n_out, dim);

    GaussianSource gauss(seed);
    auto emit_block = [&](std::size_t first, std::size_t count, const Vector& mean,
                          double std_dev) {
        const double s = std_dev <= 1e-12 ? 0.0 : std_dev; // exact placement floor
        for (std::size_t i = 0; i < count; ++i)
            for (std::size_t d = 0; d < dim; ++d)
                sample.points.at(first + i, d) = mean[d] + s * gauss.next();
    };
    emit_block(0, spec.n_clean, spec.clean_mean, spec.clean_std);
    emit_block(spec.n_clean, n_out, spec.outlier_mean, spec.outlier_std);

    sample.clean_sample_mean.assign(dim, 0.0);
    for (std::size_t i = 0; i < spec.n_clean; ++i)
        for (std::size_t d = 0; d < dim; ++d)
            sample.clean_sample_mean[d] += sample.points.at(i, d);
    for (std::size_t d = 0; d < dim; ++d)
        sample.clean_sample_mean[d] /= static_cast<double>(spec.n_clean);
    return sample;
}

OutlierReport outlier_experiment(const MixtureSpec& spec,
                                 const std::vector<Penalty>& penalties,
                                 std::size_t steps, double eps,
                                 const std::vector<std::uint64_t>& seeds) {
    if (penalties.empty()) throw std::invalid_argument("outlier_experiment: no penalties");
    if (seeds.empty()) throw std::invalid_argument("outlier_experiment: no seeds");
    for (const Penalty& p : penalties) validate(p);
    OutlierReport report;
    report.spec = spec;
    report.steps = steps;
    report.eps = eps;
    report.seeds = seeds;
    report.penalties = penalties;
    report.errors.assign(penalties.size(), std::vector<double>(seeds.size(), 0.0));

    // Samples are drawn up front (one stream per seed) so the parallel sweep
    // below cannot perturb generator state or ordering.
    std::vector<MixtureSample> samples;
    samples.reserve(seeds.size());
    for (std::uint64_t seed : seeds) samples.push_back(sample_mixture(spec, seed));

    parallel_for(seeds.size(), [&](std::size_t s) {
        const MixtureSample& sample = samples[s];
        WeightedPoints pts{sample.points,
                           std::vector<double>(sample.points.rows, 1.0)};
        for (std::size_t p = 0; p < penalties.size(); ++p) {
            const IrlsTrace trace = newton_irls(penalties[p], pts, steps, eps);
            report.errors[p][s] = distance(trace.final(), sample.clean_sample_mean);
        }
    });

    report.median_errors.reserve(penalties.size());
    for (const auto& errs : report.errors)
        report.median_errors.push_back(median_of(errs));
    return report;
}

Matrix trajectory_values() {
    return matrix_from({{1.0, 2.0}, {7.0, 25.0}, {25.0, 37.0}});
}

std::vector<Vector> trajectory_weight_rows() {
    return {{1.0, 1.0, 1.0}, {2.0, 0.0, 0.0}, {0.0, 0.0, 2.0}};
}

std::vector<IrlsTrace> trajectory_experiment(const Penalty& penalty, std::size_t steps,
                                             double eps) {
    const Matrix values = trajectory_values();
    std::vector<IrlsTrace> traces;
    for (const Vector& weights : trajectory_weight_rows())
        traces.push_back(newton_irls(penalty, WeightedPoints{values, weights}, steps, eps,
                                     std::nullopt, /*record_weights=*/true));
    return traces;
}

DescentReport descent_curves(const std::vector<Penalty>& penalties, std::size_t batches,
                             std::size_t heads, std::size_t tokens, std::size_t dim,
                             std::size_t steps, double eps, std::uint64_t seed,
                             bool include_gd, double gd_eta) {
    if (penalties.empty()) throw std::invalid_argument("descent_curves: no penalties");
    if (batches == 0 || heads == 0 || tokens == 0 || dim == 0)
        throw std::invalid_argument("descent_curves: all shape parameters must be >= 1");
    for (const Penalty& p : penalties) validate(p);

    DescentReport report;
    report.batches = batches;
    report.heads = heads;
    report.tokens = tokens;
    report.dim = dim;
    report.steps = steps;
    report.eps = eps;
    report.seed = seed;
    report.penalties = penalties;
    report.has_gd = include_gd;
    report.gd_eta = include_gd ? gd_eta : 0.0;

    // All problem data comes from one stream, consumed serially in
    // (batch, head) order with Q, K, V row-major inside each problem.
    const std::size_t problems = batches * heads;
    GaussianSource gauss(seed);
    std::vector<Matrix> a_mats, v_mats;
    a_mats.reserve(problems);
    v_mats.reserve(problems);
    for (std::size_t pb = 0; pb < problems; ++pb) {
        Matrix q(tokens, dim), k(tokens, dim), v(tokens, dim);
        for (double& x : q.data) x = gauss.next();
        for (double& x : k.data) x = gauss.next();
        for (double& x : v.data) x = gauss.next();
        a_mats.push_back(attention_matrix(q, k, /*scaled=*/true));
        v_mats.push_back(std::move(v));
    }

    const std::size_t n_curves = penalties.size();
    std::vector<std::vector<double>> newton_sum(n_curves,
                                                std::vector<double>(steps + 1, 0.0));
    std::vector<std::vector<double>> gd_sum(include_gd ? n_curves : 0,
                                            std::vector<double>(steps + 1, 0.0));
    // Per-problem partial sums, reduced serially afterwards so totals do not
    // depend on the parallel split.
    std::vector<std::vector<std::vector<double>>> newton_part(
        problems, std::vector<std::vector<double>>(n_curves,
                                                   std::vector<double>(steps + 1, 0.0)));
    auto gd_part = newton_part; // same shape; unused when include_gd is false

    parallel_for(problems, [&](std::size_t pb) {
        const Matrix& a = a_mats[pb];
        const Matrix& v = v_mats[pb];
        for (std::size_t i = 0; i < tokens; ++i) {
            WeightedPoints pts{v, std::vector<double>(a.row(i), a.row(i) + tokens)};
            for (std::size_t p = 0; p < n_curves; ++p) {
                const IrlsTrace tr = newton_irls(penalties[p], pts, steps, eps);
                for (std::size_t k = 0; k <= steps; ++k)
                    newton_part[pb][p][k] += tr.losses[k];
                if (include_gd) {
                    const IrlsTrace gt = gd_descent(penalties[p], pts, steps, gd_eta, eps);
                    for (std::size_t k = 0; k <= steps; ++k)
                        gd_part[pb][p][k] += gt.losses[k];
                }
            }
        }
    });
    for (std::size_t pb = 0; pb < problems; ++pb)
        for (std::size_t p = 0; p < n_curves; ++p)
            for (std::size_t k = 0; k <= steps; ++k) {
                newton_sum[p][k] += newton_part[pb][p][k];
                if (include_gd) gd_sum[p][k] += gd_part[pb][p][k];
            }

    const double denom = static_cast<double>(problems * tokens);
    report.newton_mean_loss.assign(n_curves, std::vector<double>(steps + 1, 0.0));
    if (include_gd)
        report.gd_mean_loss.assign(n_curves, std::vector<double>(steps + 1, 0.0));
    for (std::size_t p = 0; p < n_curves; ++p)
        for (std::size_t k = 0; k <= steps; ++k) {
            report.newton_mean_loss[p][k] = newton_sum[p][k] / denom;
            if (include_gd) report.gd_mean_loss[p][k] = gd_sum[p][k] / denom;
        }
    return report;
}

double residual_diagnostics(const Matrix& values, const Vector& weights) {
    WeightedPoints pts{values, weights};
    const Vector z = wls_estimate(pts);
    double acc = 0.0;
    for (std::size_t j = 0; j < values.rows; ++j) {
        double r2 = 0.0;
        for (std::size_t d = 0; d < values.cols; ++d) {
            const double diff = values.at(j, d) - z[d];
            r2 += diff * diff;
        }
        acc += r2;
    }
    return acc / static_cast<double>(values.rows);
}

namespace {

std::string penalty_label(const Penalty& p) { return kind_name(p.kind); }

void meta_line(std::string& out, const std::string& key, const std::string& value) {
    out += "# ";
    out += key;
    out += '=';
    out += value;
    out += '\n';
}

nlohmann::json penalty_to_meta(const Penalty& p) {
    nlohmann::json j;
    j["kind"] = kind_name(p.kind);
    if (p.kind == PenaltyKind::Huber || p.kind == PenaltyKind::HuberMCP)
        j["delta"] = p.delta;
    if (p.kind == PenaltyKind::MCP || p.kind == PenaltyKind::HuberMCP)
        j["gamma"] = p.gamma;
    return j;
}

nlohmann::json trace_to_json(const IrlsTrace& trace) {
    nlohmann::json j;
    j["iterates"] = trace.iterates;
    j["losses"] = trace.losses;
    if (trace.per_step_weights) j["per_step_weights"] = *trace.per_step_weights;
    return j;
}

} // namespace

std::string outlier_csv(const OutlierReport& report) {
    std::string out;
    meta_line(out, "experiment", "outliers");
    meta_line(out, "n_clean", std::to_string(report.spec.n_clean));
    meta_line(out, "n_outlier", std::to_string(outlier_count(report.spec)));
    meta_line(out, "outlier_frac", format_double(report.spec.outlier_frac));
    meta_line(out, "clean_std", format_double(report.spec.clean_std));
    meta_line(out, "outlier_std", format_double(report.spec.outlier_std));
    meta_line(out, "steps", std::to_string(report.steps));
    meta_line(out, "eps", format_double(report.eps));
    out += "penalty,seed,error\n";
    for (std::size_t p = 0; p < report.penalties.size(); ++p)
        for (std::size_t s = 0; s < report.seeds.size(); ++s) {
            out += penalty_label(report.penalties[p]);
            out += ',';
            out += std::to_string(report.seeds[s]);
            out += ',';
            out += format_double(report.errors[p][s]);
            out += '\n';
        }
    return out;
}

std::string outlier_json(const OutlierReport& report) {
    nlohmann::json j;
    j["experiment"] = "outliers";
    j["n_clean"] = report.spec.n_clean;
    j["n_outlier"] = outlier_count(report.spec);
    j["outlier_frac"] = report.spec.outlier_frac;
    j["clean_mean"] = report.spec.clean_mean;
    j["clean_std"] = report.spec.clean_std;
    j["outlier_mean"] = report.spec.outlier_mean;
    j["outlier_std"] = report.spec.outlier_std;
    j["steps"] = report.steps;
    j["eps"] = report.eps;
    j["seeds"] = report.seeds;
    j["penalties"] = nlohmann::json::array();
    for (std::size_t p = 0; p < report.penalties.size(); ++p) {
        nlohmann::json entry;
        entry["penalty"] = penalty_to_meta(report.penalties[p]);
        entry["errors"] = report.errors[p];
        entry["median_error"] = report.median_errors[p];
        j["penalties"].push_back(entry);
    }
    return j.dump(2) + "\n";
}

std::string descent_csv(const DescentReport& report) {
    std::string out;
    meta_line(out, "experiment", "descent");
    meta_line(out, "batches", std::to_string(report.batches));
    meta_line(out, "heads", std::to_string(report.heads));
    meta_line(out, "tokens", std::to_string(report.tokens));
    meta_line(out, "dim", std::to_string(report.dim));
    meta_line(out, "steps", std::to_string(report.steps));
    meta_line(out, "eps", format_double(report.eps));
    meta_line(out, "seed", std::to_string(report.seed));
    if (report.has_gd) meta_line(out, "gd_eta", format_double(report.gd_eta));
    out += "method,penalty,step,mean_loss\n";
    auto emit = [&](const char* method, const std::vector<std::vector<double>>& curves) {
        for (std::size_t p = 0; p < report.penalties.size(); ++p)
            for (std::size_t k = 0; k < curves[p].size(); ++k) {
                out += method;
                out += ',';
                out += penalty_label(report.penalties[p]);
                out += ',';
                out += std::to_string(k);
                out += ',';
                out += format_double(curves[p][k]);
                out += '\n';
            }
    };
    emit("newton", report.newton_mean_loss);
    if (report.has_gd) emit("gd", report.gd_mean_loss);
    return out;
}

std::string descent_json(const DescentReport& report) {
    nlohmann::json j;
    j["experiment"] = "descent";
    j["batches"] = report.batches;
    j["heads"] = report.heads;
    j["tokens"] = report.tokens;
    j["dim"] = report.dim;
    j["steps"] = report.steps;
    j["eps"] = report.eps;
    j["seed"] = report.seed;
    j["curves"] = nlohmann::json::array();
    for (std::size_t p = 0; p < report.penalties.size(); ++p) {
        nlohmann::json entry;
        entry["penalty"] = penalty_to_meta(report.penalties[p]);
        entry["newton_mean_loss"] = report.newton_mean_loss[p];
        if (report.has_gd) {
            entry["gd_eta"] = report.gd_eta;
            entry["gd_mean_loss"] = report.gd_mean_loss[p];
        }
        j["curves"].push_back(entry);
    }
    return j.dump(2) + "\n";
}

std::string trajectory_csv(const std::vector<IrlsTrace>& traces, const Penalty& penalty,
                           double eps) {
    std::string out;
    meta_line(out, "experiment", "trajectory");
    meta_line(out, "penalty", penalty_label(penalty));
    meta_line(out, "eps", format_double(eps));
    out += "row,step,loss,coord_0,coord_1\n";
    for (std::size_t row = 0; row < traces.size(); ++row)
        for (std::size_t k = 0; k < traces[row].iterates.size(); ++k) {
            out += std::to_string(row);
            out += ',';
            out += std::to_string(k);
            out += ',';
            out += format_double(traces[row].losses[k]);
            for (double c : traces[row].iterates[k]) {
                out += ',';
                out += format_double(c);
            }
            out += '\n';
        }
    return out;
}

std::string trajectory_json(const std::vector<IrlsTrace>& traces, const Penalty& penalty,
                            double eps) {
    nlohmann::json j;
    j["experiment"] = "trajectory";
    j["penalty"] = penalty_to_meta(penalty);
    j["eps"] = eps;
    j["values"] = nlohmann::json::array();
    const Matrix values = trajectory_values();
    for (std::size_t i = 0; i < values.rows; ++i)
        j["values"].push_back(std::vector<double>(values.row(i), values.row(i) + values.cols));
    j["weight_rows"] = trajectory_weight_rows();
    j["traces"] = nlohmann::json::array();
    for (const IrlsTrace& tr : traces) j["traces"].push_back(trace_to_json(tr));
    return j.dump(2) + "\n";
}

} // namespace proattn
