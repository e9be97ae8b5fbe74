#include "proattn/config.hpp"

#include "proattn/io.hpp"

#include <json.hpp>

#include <cmath>
#include <stdexcept>

namespace proattn {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& origin, const std::string& what) {
    throw std::invalid_argument(origin + ": " + what);
}

double number_field(const json& j, const std::string& origin, const char* key) {
    const json& v = j.at(key);
    if (!v.is_number()) bad(origin, std::string("\"") + key + "\" must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) bad(origin, std::string("\"") + key + "\" must be finite");
    return d;
}

Penalty parse_penalty(const json& j, const std::string& origin) {
    if (!j.is_object()) bad(origin, "\"penalty\" must be an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "kind" && key != "delta" && key != "gamma")
            bad(origin, "unknown penalty key \"" + key + "\"");
    }
    Penalty p;
    if (!j.contains("kind") || !j.at("kind").is_string())
        bad(origin, "penalty needs a string \"kind\"");
    p.kind = parse_kind(j.at("kind").get<std::string>());
    if (j.contains("delta")) p.delta = number_field(j, origin, "delta");
    if (j.contains("gamma")) p.gamma = number_field(j, origin, "gamma");
    validate(p);
    return p;
}

} // namespace

AttentionConfig parse_attention_config(const std::string& json_text,
                                       const std::string& origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        bad(origin, e.what());
    }
    if (!doc.is_object()) bad(origin, "top level must be an object");
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (key != "penalty" && key != "steps" && key != "eps" && key != "scaled")
            bad(origin, "unknown key \"" + key + "\"");
    }
    AttentionConfig cfg;
    if (doc.contains("penalty")) cfg.penalty = parse_penalty(doc.at("penalty"), origin);
    if (doc.contains("steps")) {
        const json& s = doc.at("steps");
        if (!s.is_number_unsigned())
            bad(origin, "\"steps\" must be a nonnegative integer");
        cfg.steps = s.get<std::size_t>();
    }
    if (doc.contains("eps")) {
        cfg.eps = number_field(doc, origin, "eps");
        if (!(cfg.eps > 0.0)) bad(origin, "\"eps\" must be > 0");
    }
    if (doc.contains("scaled")) {
        const json& s = doc.at("scaled");
        if (!s.is_boolean()) bad(origin, "\"scaled\" must be a boolean");
        cfg.scaled = s.get<bool>();
    }
    validate(cfg);
    return cfg;
}

AttentionConfig load_attention_config(const std::string& path) {
    return parse_attention_config(read_text(path), path);
}

std::string attention_config_json(const AttentionConfig& cfg) {
    json p;
    p["kind"] = kind_name(cfg.penalty.kind);
    if (cfg.penalty.kind == PenaltyKind::Huber || cfg.penalty.kind == PenaltyKind::HuberMCP)
        p["delta"] = cfg.penalty.delta;
    if (cfg.penalty.kind == PenaltyKind::MCP || cfg.penalty.kind == PenaltyKind::HuberMCP)
        p["gamma"] = cfg.penalty.gamma;
    json doc;
    doc["penalty"] = p;
    doc["steps"] = cfg.steps;
    doc["eps"] = cfg.eps;
    doc["scaled"] = cfg.scaled;
    return doc.dump(2) + "\n";
}

} // namespace proattn
