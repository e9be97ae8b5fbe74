// Command-line front end. Subcommands cover the library surface: file-based
// attention runs, estimator traces, the simulation experiments, the encoder
// block, and analytic cost queries. Exit codes: 0 success, 2 input error,
// 3 internal invariant violation.
#include <CLI11.hpp>

#include "proattn/attention.hpp"
#include "proattn/block.hpp"
#include "proattn/config.hpp"
#include "proattn/costmodel.hpp"
#include "proattn/estimator.hpp"
#include "proattn/io.hpp"
#include "proattn/matrix.hpp"
#include "proattn/penalty.hpp"
#include "proattn/simlab.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace proattn;

namespace {

// Flags shared by every subcommand (CLI11 fallthrough lets them appear
// before or after the subcommand name).
struct Flags {
    std::uint64_t seed = 0;
    double eps = 1e-6;
    std::size_t steps = 3;
    std::string penalty = "l2";
    double delta = 1.0;
    double gamma = 4.0;
    std::string out;
};

Penalty penalty_from_flags(const Flags& g) {
    Penalty p;
    p.kind = parse_kind(g.penalty);
    p.delta = g.delta;
    p.gamma = g.gamma;
    validate(p);
    return p;
}

// The flag-driven five-penalty sweep used when an experiment is run without
// an explicit --penalty.
std::vector<Penalty> penalty_sweep(const Flags& g) {
    return {make_l2(), make_l1(), make_huber(g.delta), make_mcp(g.gamma),
            make_huber_mcp(g.delta, g.gamma)};
}

// A config file, when given, wins over the individual flags.
AttentionConfig config_for(const Flags& g, const std::string& config_path) {
    if (!config_path.empty()) return load_attention_config(config_path);
    AttentionConfig cfg;
    cfg.penalty = penalty_from_flags(g);
    cfg.steps = g.steps;
    cfg.eps = g.eps;
    validate(cfg);
    return cfg;
}

void require_out(const Flags& g, const char* sub) {
    if (g.out.empty())
        throw std::invalid_argument(std::string(sub) + ": --out is required");
}

struct AttendArgs {
    std::string q, k, v, attention, config;
};

int run_attend(const Flags& g, const AttendArgs& a) {
    require_out(g, "attend");
    const AttentionConfig cfg = config_for(g, a.config);
    Matrix result;
    std::size_t n_tokens = 0;
    std::size_t width = 0;
    if (!a.attention.empty()) {
        if (!a.q.empty() || !a.k.empty())
            throw std::invalid_argument("attend: --attention-matrix replaces --q/--k");
        const Matrix aw = read_matrix(a.attention);
        const Matrix v = read_matrix(a.v);
        if (aw.cols != v.rows)
            throw std::invalid_argument(a.attention + ": has " + std::to_string(aw.cols) +
                                        " weight columns but " + a.v + " has " +
                                        std::to_string(v.rows) + " value rows");
        // Precomputed weights drive the token-wise estimator row by row, so
        // single-support rows reproduce their value vector exactly and the
        // quadratic penalty reproduces the weighted mean bit for bit.
        result = Matrix(aw.rows, v.cols);
        for (std::size_t i = 0; i < aw.rows; ++i) {
            WeightedPoints pts;
            pts.values = v;
            pts.weights.assign(aw.row(i), aw.row(i) + aw.cols);
            try {
                const IrlsTrace trace = newton_irls(cfg.penalty, pts, cfg.steps, cfg.eps);
                const Vector& z = trace.final();
                for (std::size_t c = 0; c < v.cols; ++c) result.at(i, c) = z[c];
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument(a.attention + ": row " + std::to_string(i + 1) +
                                            ": " + e.what());
            }
        }
        n_tokens = aw.rows;
        width = v.cols;
    } else {
        if (a.q.empty() || a.k.empty())
            throw std::invalid_argument("attend: need --q and --k (or --attention-matrix)");
        const Matrix q = read_matrix(a.q);
        const Matrix k = read_matrix(a.k);
        const Matrix v = read_matrix(a.v);
        if (q.cols != k.cols)
            throw std::invalid_argument(a.q + ": width " + std::to_string(q.cols) +
                                        " does not match " + a.k + " width " +
                                        std::to_string(k.cols));
        if (k.rows != v.rows)
            throw std::invalid_argument(a.k + ": " + std::to_string(k.rows) +
                                        " rows but " + a.v + " has " +
                                        std::to_string(v.rows));
        result = pro_attention(q, k, v, cfg);
        n_tokens = q.rows;
        width = v.cols;
    }
    write_matrix(g.out, result);
    std::fprintf(stderr, "attend: N=%zu D=%zu K=%zu analytic_macs=%lld\n", n_tokens,
                 width, cfg.steps,
                 static_cast<long long>(op_count(Mechanism::Pro,
                                                 static_cast<std::int64_t>(n_tokens),
                                                 static_cast<std::int64_t>(width),
                                                 static_cast<std::int64_t>(cfg.steps))));
    return 0;
}

struct EstimateArgs {
    std::string points, weights;
};

int run_estimate(const Flags& g, const EstimateArgs& a) {
    require_out(g, "estimate");
    const Matrix values = read_matrix(a.points);
    Vector w(values.rows, 1.0);
    if (!a.weights.empty()) {
        const Matrix wm = read_matrix(a.weights);
        if (wm.rows != 1 && wm.cols != 1)
            throw std::invalid_argument(a.weights + ": weights must be one row or one column");
        if (wm.data.size() != values.rows)
            throw std::invalid_argument(a.weights + ": " + std::to_string(wm.data.size()) +
                                        " weights for " + std::to_string(values.rows) +
                                        " points in " + a.points);
        w = wm.data;
    }
    const Penalty pen = penalty_from_flags(g);
    const IrlsTrace trace = newton_irls(pen, WeightedPoints{values, w}, g.steps, g.eps);
    const double ascent = worst_ascent(trace);
    if (ascent > 1e-9) {
        std::fprintf(stderr, "estimate: loss increased along the trace (worst ascent %g)\n",
                     ascent);
        return 3;
    }
    std::string csv;
    csv += "# penalty=" + kind_name(pen.kind) + "\n";
    if (pen.kind == PenaltyKind::Huber || pen.kind == PenaltyKind::HuberMCP)
        csv += "# delta=" + format_double(pen.delta) + "\n";
    if (pen.kind == PenaltyKind::MCP || pen.kind == PenaltyKind::HuberMCP)
        csv += "# gamma=" + format_double(pen.gamma) + "\n";
    csv += "# steps=" + std::to_string(g.steps) + "\n";
    csv += "# eps=" + format_double(g.eps) + "\n";
    csv += "step,loss";
    for (std::size_t c = 0; c < values.cols; ++c)
        csv += ",coord_" + std::to_string(c);
    csv += '\n';
    for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
        csv += std::to_string(k);
        csv += ',';
        csv += format_double(trace.losses[k]);
        for (double c : trace.iterates[k]) {
            csv += ',';
            csv += format_double(c);
        }
        csv += '\n';
    }
    atomic_write_text(g.out, csv);
    std::fprintf(stderr, "estimate: %zu points, %zu steps -> %s\n", values.rows, g.steps,
                 g.out.c_str());
    return 0;
}

struct SimulateArgs {
    std::string kind;
    double ratio = 0.45;
    std::size_t n_clean = 100;
    std::size_t num_seeds = 50;
    std::size_t batches = 8;
    std::size_t heads = 4;
    std::size_t tokens = 64;
    std::size_t dim = 8;
    bool gd = false;
    double gd_eta = 0.05;
};

int run_simulate(const Flags& g, const SimulateArgs& a, bool steps_set, bool penalty_set) {
    require_out(g, "simulate");
    std::error_code ec;
    fs::create_directories(g.out, ec);
    if (ec)
        throw std::invalid_argument(g.out + ": cannot create output directory: " +
                                    ec.message());
    const fs::path dir(g.out);

    if (a.kind == "outliers") {
        MixtureSpec spec;
        spec.n_clean = a.n_clean;
        spec.outlier_frac = a.ratio;
        const std::size_t steps = steps_set ? g.steps : 10;
        const std::vector<Penalty> penalties =
            penalty_set ? std::vector<Penalty>{penalty_from_flags(g)} : penalty_sweep(g);
        std::vector<std::uint64_t> seeds(a.num_seeds);
        for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = g.seed + i;
        const OutlierReport report = outlier_experiment(spec, penalties, steps, g.eps, seeds);
        atomic_write_text((dir / "outliers.csv").string(), outlier_csv(report));
        atomic_write_text((dir / "outliers.json").string(), outlier_json(report));
        std::fprintf(stderr,
                     "simulate outliers: %zu penalties, %zu seeds, %zu clean + %zu outliers"
                     " -> %s/outliers.{csv,json}\n",
                     penalties.size(), seeds.size(), spec.n_clean, outlier_count(spec),
                     g.out.c_str());
    } else if (a.kind == "trajectory") {
        const std::size_t steps = steps_set ? g.steps : 3;
        const Penalty pen = penalty_set ? penalty_from_flags(g) : make_l1();
        const std::vector<IrlsTrace> traces = trajectory_experiment(pen, steps, g.eps);
        atomic_write_text((dir / "trajectory.csv").string(),
                          trajectory_csv(traces, pen, g.eps));
        atomic_write_text((dir / "trajectory.json").string(),
                          trajectory_json(traces, pen, g.eps));
        std::fprintf(stderr, "simulate trajectory: %zu rows, %zu steps -> %s/trajectory.{csv,json}\n",
                     traces.size(), steps, g.out.c_str());
    } else { // descent
        const std::size_t steps = steps_set ? g.steps : 8;
        const std::vector<Penalty> penalties =
            penalty_set ? std::vector<Penalty>{penalty_from_flags(g)}
                        : std::vector<Penalty>{make_mcp(g.gamma)};
        const DescentReport report =
            descent_curves(penalties, a.batches, a.heads, a.tokens, a.dim, steps, g.eps,
                           g.seed, a.gd, a.gd_eta);
        atomic_write_text((dir / "descent.csv").string(), descent_csv(report));
        atomic_write_text((dir / "descent.json").string(), descent_json(report));
        std::fprintf(stderr,
                     "simulate descent: %zu penalties, %zux%zu problems of %zux%zu"
                     " -> %s/descent.{csv,json}\n",
                     penalties.size(), a.batches, a.heads, a.tokens, a.dim, g.out.c_str());
    }
    return 0;
}

struct BlockArgs {
    std::string x, params, config;
};

int run_block(const Flags& g, const BlockArgs& a) {
    require_out(g, "block");
    const Matrix x = read_matrix(a.x);
    const BlockParams params = load_block_params(a.params);
    const AttentionConfig cfg = config_for(g, a.config);
    const Matrix y = encoder_block(x, params, cfg);
    write_matrix(g.out, y);
    std::fprintf(stderr, "block: %zu tokens, d_model=%zu, heads=%zu, K=%zu -> %s\n",
                 x.rows, params.d_model, params.attn.wq.size(), cfg.steps, g.out.c_str());
    return 0;
}

struct CostArgs {
    std::string mechanism;
    std::int64_t n = 0;
    std::int64_t d = 0;
    std::int64_t k = 0;
    bool csv = false;
};

int run_cost(const Flags& g, const CostArgs& a) {
    const Mechanism m = parse_mechanism(a.mechanism);
    const std::int64_t ops = op_count(m, a.n, a.d, a.k);
    if (a.csv) {
        // Instrumented counters exist for the two implemented mechanisms.
        std::string measured;
        if (m == Mechanism::Pro || m == Mechanism::Vanilla) {
            const MeasuredCounts c =
                measured_counts(static_cast<std::size_t>(a.n),
                                static_cast<std::size_t>(a.d),
                                static_cast<std::size_t>(a.k), g.seed);
            measured = std::to_string(m == Mechanism::Pro ? c.pro_macs : c.vanilla_macs);
        }
        std::printf("mechanism,N,D,K,analytic_ops,measured_macs\n");
        std::printf("%s,%lld,%lld,%lld,%lld,%s\n", a.mechanism.c_str(),
                    static_cast<long long>(a.n), static_cast<long long>(a.d),
                    static_cast<long long>(a.k), static_cast<long long>(ops),
                    measured.c_str());
    } else {
        std::printf("%lld\n", static_cast<long long>(ops));
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust weighted-least-squares attention toolkit"};
    app.fallthrough();
    app.require_subcommand(1);

    Flags g;
    app.add_option("--seed", g.seed, "base RNG seed")->capture_default_str();
    app.add_option("--eps", g.eps, "residual floor for the reweighting")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--steps", g.steps, "refinement iterations K")->capture_default_str();
    app.add_option("--penalty", g.penalty, "penalty kind")
        ->capture_default_str()
        ->check(CLI::IsMember({"l2", "l1", "huber", "mcp", "huber_mcp"}));
    app.add_option("--delta", g.delta, "quadratic-to-linear knee (huber, huber_mcp)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--gamma", g.gamma, "saturation threshold (mcp, huber_mcp)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "output file (output directory for simulate)");

    AttendArgs at;
    CLI::App* attend = app.add_subcommand(
        "attend", "robust attention over matrix files; prints shape and analytic cost");
    attend->add_option("--q", at.q, "query matrix file");
    attend->add_option("--k", at.k, "key matrix file");
    attend->add_option("--v", at.v, "value matrix file")->required();
    attend->add_option("--attention-matrix", at.attention,
                       "precomputed attention weights; rows drive the token-wise estimator");
    attend->add_option("--config", at.config,
                       "attention config JSON; overrides the penalty/steps/eps flags");

    EstimateArgs es;
    CLI::App* estimate = app.add_subcommand(
        "estimate", "robust location estimate; writes the full trace as CSV");
    estimate->add_option("--points", es.points, "value matrix file, one point per row")
        ->required();
    estimate->add_option("--weights", es.weights,
                         "optional weight file (one row or one column)");

    SimulateArgs si;
    CLI::App* simulate =
        app.add_subcommand("simulate", "run an experiment and write CSV + JSON reports");
    simulate->add_option("kind", si.kind, "experiment kind")
        ->required()
        ->check(CLI::IsMember({"outliers", "trajectory", "descent"}));
    simulate->add_option("--ratio", si.ratio, "outlier fraction of the total")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 0.999));
    simulate->add_option("--n-clean", si.n_clean, "clean points per sample")
        ->capture_default_str();
    simulate->add_option("--num-seeds", si.num_seeds, "seeds, starting at --seed")
        ->capture_default_str();
    simulate->add_option("--batches", si.batches, "descent: batch count")
        ->capture_default_str();
    simulate->add_option("--heads", si.heads, "descent: head count")->capture_default_str();
    simulate->add_option("--tokens", si.tokens, "descent: tokens per problem")
        ->capture_default_str();
    simulate->add_option("--dim", si.dim, "descent: value width")->capture_default_str();
    simulate->add_flag("--gd", si.gd, "descent: include the gradient-descent baseline");
    simulate->add_option("--gd-eta", si.gd_eta, "descent: baseline step size")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    BlockArgs bl;
    CLI::App* block = app.add_subcommand("block", "run the encoder block over a matrix file");
    block->add_option("--x", bl.x, "input matrix file, one token per row")->required();
    block->add_option("--params", bl.params, "parameter directory")->required();
    block->add_option("--config", bl.config,
                      "attention config JSON; overrides the penalty/steps/eps flags");

    CostArgs co;
    CLI::App* cost = app.add_subcommand("cost", "analytic operation count for a mechanism");
    cost->add_option("mechanism", co.mechanism, "vanilla | pro | kde | rkde")->required();
    cost->add_option("N", co.n, "token count")->required();
    cost->add_option("D", co.d, "value width")->required();
    cost->add_option("K", co.k, "refinement iterations");
    cost->add_flag("--csv", co.csv, "emit a CSV row with the instrumented counter");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // help and friends
        app.exit(e);
        return 2;
    }

    try {
        const bool steps_set = app.count("--steps") > 0;
        const bool penalty_set = app.count("--penalty") > 0;
        if (attend->parsed()) return run_attend(g, at);
        if (estimate->parsed()) return run_estimate(g, es);
        if (simulate->parsed()) return run_simulate(g, si, steps_set, penalty_set);
        if (block->parsed()) return run_block(g, bl);
        if (cost->parsed()) return run_cost(g, co);
    } catch (const IoError& e) {
        std::fprintf(stderr, "proattn: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "proattn: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "proattn: internal error: %s\n", e.what());
        return 3;
    }
    return 2;
}
