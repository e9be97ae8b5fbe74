#include "proattn/penalty.hpp"

#include <stdexcept>

namespace proattn {

Penalty make_l2() { return Penalty{PenaltyKind::L2, 1.0, 4.0}; }
Penalty make_l1() { return Penalty{PenaltyKind::L1, 1.0, 4.0}; }

Penalty make_huber(double delta) {
    Penalty p{PenaltyKind::Huber, delta, 4.0};
    validate(p);
    return p;
}

Penalty make_mcp(double gamma) {
    Penalty p{PenaltyKind::MCP, 1.0, gamma};
    validate(p);
    return p;
}

Penalty make_huber_mcp(double delta, double gamma) {
    Penalty p{PenaltyKind::HuberMCP, delta, gamma};
    validate(p);
    return p;
}

void validate(const Penalty& p) {
    const bool uses_delta = p.kind == PenaltyKind::Huber || p.kind == PenaltyKind::HuberMCP;
    const bool uses_gamma = p.kind == PenaltyKind::MCP || p.kind == PenaltyKind::HuberMCP;
    if (uses_delta && !(p.delta > 0.0))
        throw std::invalid_argument("penalty: delta must be > 0");
    if (uses_gamma && !(p.gamma > 0.0))
        throw std::invalid_argument("penalty: gamma must be > 0");
    if (p.kind == PenaltyKind::HuberMCP && !(p.delta < p.gamma))
        throw std::invalid_argument("penalty: huber_mcp requires delta < gamma");
}

double rho(const Penalty& p, double z) {
    switch (p.kind) {
    case PenaltyKind::L2:
        return 0.5 * z * z;
    case PenaltyKind::L1:
        return z;
    case PenaltyKind::Huber:
        if (z < p.delta) return 0.5 * z * z;
        return p.delta * (z - 0.5 * p.delta);
    case PenaltyKind::MCP:
        if (z < p.gamma) return z - z * z / (2.0 * p.gamma);
        return 0.5 * p.gamma;
    case PenaltyKind::HuberMCP:
        if (z < p.delta) return 0.5 * z * z;
        if (z < p.gamma) {
            const double t = z - p.delta;
            return p.delta * (z - 0.5 * p.delta - t * t / (2.0 * (p.gamma - p.delta)));
        }
        return 0.5 * p.delta * p.gamma;
    }
    throw std::logic_error("penalty: unknown kind");
}

double rho_prime(const Penalty& p, double z) {
    switch (p.kind) {
    case PenaltyKind::L2:
        return z;
    case PenaltyKind::L1:
        return 1.0;
    case PenaltyKind::Huber:
        return z < p.delta ? z : p.delta;
    case PenaltyKind::MCP:
        return z < p.gamma ? 1.0 - z / p.gamma : 0.0;
    case PenaltyKind::HuberMCP:
        if (z < p.delta) return z;
        if (z < p.gamma) return p.delta * (p.gamma - z) / (p.gamma - p.delta);
        return 0.0;
    }
    throw std::logic_error("penalty: unknown kind");
}

double irls_weight(const Penalty& p, double r, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("irls_weight: eps must be > 0");
    // Single evaluation path shared with rho_prime so the weight/derivative
    // identity is exact, not merely approximate. r/(2r) divides to exactly
    // 0.5, so the L2 and small-residual Huber cases come out bit-exact.
    const double r_safe = r > eps ? r : eps;
    return rho_prime(p, r_safe) / (2.0 * r_safe);
}

std::string kind_name(PenaltyKind k) {
    switch (k) {
    case PenaltyKind::L2: return "l2";
    case PenaltyKind::L1: return "l1";
    case PenaltyKind::Huber: return "huber";
    case PenaltyKind::MCP: return "mcp";
    case PenaltyKind::HuberMCP: return "huber_mcp";
    }
    throw std::logic_error("penalty: unknown kind");
}

PenaltyKind parse_kind(const std::string& name) {
    if (name == "l2") return PenaltyKind::L2;
    if (name == "l1") return PenaltyKind::L1;
    if (name == "huber") return PenaltyKind::Huber;
    if (name == "mcp") return PenaltyKind::MCP;
    if (name == "huber_mcp") return PenaltyKind::HuberMCP;
    throw std::invalid_argument("penalty: unknown kind \"" + name + "\"");
}

} // namespace proattn
