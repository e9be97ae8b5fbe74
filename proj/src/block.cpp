#include "proattn/block.hpp"

#include "proattn/io.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <stdexcept>

namespace proattn {

namespace {

void require_vec(const std::vector<double>& v, std::size_t n, const char* name) {
    if (v.size() != n)
        throw std::invalid_argument(std::string("block params: ") + name +
                                    " has wrong length");
    for (double x : v)
        if (!std::isfinite(x))
            throw std::invalid_argument(std::string("block params: ") + name +
                                        " has non-finite entry");
}

} // namespace

void validate(const BlockParams& p) {
    if (p.d_model == 0 || p.d_ff == 0)
        throw std::invalid_argument("block params: d_model and d_ff must be >= 1");
    validate_multi_head(p.attn, p.d_model);
    if (p.attn.wo.cols != p.d_model)
        throw std::invalid_argument("block params: wo cols != d_model");
    if (p.w1.rows != p.d_model || p.w1.cols != p.d_ff)
        throw std::invalid_argument("block params: w1 must be d_model x d_ff");
    if (p.w2.rows != p.d_ff || p.w2.cols != p.d_model)
        throw std::invalid_argument("block params: w2 must be d_ff x d_model");
    require_finite(p.w1, "block params w1");
    require_finite(p.w2, "block params w2");
    require_vec(p.b1, p.d_ff, "b1");
    require_vec(p.b2, p.d_model, "b2");
    require_vec(p.ln1_g, p.d_model, "ln1_g");
    require_vec(p.ln1_b, p.d_model, "ln1_b");
    require_vec(p.ln2_g, p.d_model, "ln2_g");
    require_vec(p.ln2_b, p.d_model, "ln2_b");
    if (!(p.ln_eps > 0.0))
        throw std::invalid_argument("block params: ln_eps must be > 0");
}

Matrix layer_norm(const Matrix& x, const std::vector<double>& gain,
                  const std::vector<double>& bias, double ln_eps) {
    if (gain.size() != x.cols || bias.size() != x.cols)
        throw std::invalid_argument("layer_norm: gain/bias length != row width");
    if (!(ln_eps > 0.0)) throw std::invalid_argument("layer_norm: ln_eps must be > 0");
    Matrix out(x.rows, x.cols);
    const double inv_d = 1.0 / static_cast<double>(x.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* r = x.row(i);
        double mean = 0.0;
        for (std::size_t j = 0; j < x.cols; ++j) mean += r[j];
        mean *= inv_d;
        double var = 0.0;
        for (std::size_t j = 0; j < x.cols; ++j) {
            const double d = r[j] - mean;
            var += d * d;
        }
        var *= inv_d;
        const double inv_sd = 1.0 / std::sqrt(var + ln_eps);
        double* o = out.row(i);
        for (std::size_t j = 0; j < x.cols; ++j)
            o[j] = gain[j] * ((r[j] - mean) * inv_sd) + bias[j];
    }
    return out;
}

namespace {

Matrix ffn(const Matrix& x, const BlockParams& p) {
    Matrix hidden = matmul(x, p.w1);
    for (std::size_t i = 0; i < hidden.rows; ++i) {
        double* h = hidden.row(i);
        for (std::size_t j = 0; j < hidden.cols; ++j) {
            h[j] += p.b1[j];
            if (h[j] < 0.0) h[j] = 0.0;
        }
    }
    Matrix out = matmul(hidden, p.w2);
    for (std::size_t i = 0; i < out.rows; ++i) {
        double* o = out.row(i);
        for (std::size_t j = 0; j < out.cols; ++j) o[j] += p.b2[j];
    }
    return out;
}

} // namespace

Matrix encoder_block(const Matrix& x, const BlockParams& p, const AttentionConfig& cfg) {
    validate(p);
    validate(cfg);
    if (x.cols != p.d_model)
        throw std::invalid_argument("encoder_block: input width != d_model");
    require_finite(x, "encoder_block input");
    const Matrix attended = multi_head_pro_attention(x, p.attn, cfg);
    const Matrix y1 = layer_norm(add(x, attended), p.ln1_g, p.ln1_b, p.ln_eps);
    const Matrix y2 = layer_norm(add(y1, ffn(y1, p)), p.ln2_g, p.ln2_b, p.ln_eps);
    return y2;
}

namespace {

Matrix load_mat(const std::string& dir, const std::string& name) {
    return read_matrix((std::filesystem::path(dir) / name).string());
}

std::vector<double> load_vec(const std::string& dir, const std::string& name) {
    const Matrix m = load_mat(dir, name);
    if (m.rows != 1)
        throw IoError((std::filesystem::path(dir) / name).string() +
                      ": expected a 1-row matrix");
    return m.data;
}

} // namespace

BlockParams load_block_params(const std::string& dir) {
    namespace fs = std::filesystem;
    const std::string meta_path = (fs::path(dir) / "block.json").string();
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_text(meta_path));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(meta_path + ": " + e.what());
    }
    if (!meta.is_object()) throw IoError(meta_path + ": top level must be an object");
    for (const auto& [key, value] : meta.items()) {
        (void)value;
        if (key != "h" && key != "d_model" && key != "d_ff" && key != "ln_eps")
            throw IoError(meta_path + ": unknown key \"" + key + "\"");
    }
    BlockParams p;
    std::size_t heads = 0;
    try {
        heads = meta.at("h").get<std::size_t>();
        p.d_model = meta.at("d_model").get<std::size_t>();
        p.d_ff = meta.at("d_ff").get<std::size_t>();
        p.ln_eps = meta.value("ln_eps", 1e-5);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(meta_path + ": " + e.what());
    }
    if (heads == 0) throw IoError(meta_path + ": h must be >= 1");
    for (std::size_t i = 0; i < heads; ++i) {
        const std::string suffix = "_h" + std::to_string(i) + ".mat";
        p.attn.wq.push_back(load_mat(dir, "wq" + suffix));
        p.attn.wk.push_back(load_mat(dir, "wk" + suffix));
        p.attn.wv.push_back(load_mat(dir, "wv" + suffix));
    }
    p.attn.wo = load_mat(dir, "wo.mat");
    p.w1 = load_mat(dir, "w1.mat");
    p.b1 = load_vec(dir, "b1.mat");
    p.w2 = load_mat(dir, "w2.mat");
    p.b2 = load_vec(dir, "b2.mat");
    p.ln1_g = load_vec(dir, "ln1_g.mat");
    p.ln1_b = load_vec(dir, "ln1_b.mat");
    p.ln2_g = load_vec(dir, "ln2_g.mat");
    p.ln2_b = load_vec(dir, "ln2_b.mat");
    validate(p);
    return p;
}

} // namespace proattn
