// Robust penalty functions rho applied to residual magnitudes, their first
// derivatives, and the induced IRLS weights w(r) = rho'(r) / (2 r).
//
// Every rho here is nondecreasing on [0, inf) with rho(0) = 0, and w(r) is
// nonincreasing, which is what makes the reweighted least-squares update a
// descent step. Derivatives at kink points use the right-sided branch.
#pragma once

#include <string>

namespace proattn {

enum class PenaltyKind { L2, L1, Huber, MCP, HuberMCP };

// A penalty kind plus its thresholds. delta is the quadratic-to-linear knee
// (Huber, HuberMCP); gamma is the saturation point past which the penalty is
// flat and the weight is exactly zero (MCP, HuberMCP). Unused thresholds are
// ignored but kept at their defaults so configs can round-trip.
struct Penalty {
    PenaltyKind kind = PenaltyKind::L2;
    double delta = 1.0;
    double gamma = 4.0;
};

Penalty make_l2();
Penalty make_l1();
Penalty make_huber(double delta);
Penalty make_mcp(double gamma);
Penalty make_huber_mcp(double delta, double gamma);

// Throws std::invalid_argument unless thresholds are positive and, for
// HuberMCP, delta < gamma.
void validate(const Penalty& p);

/// Penalty value at residual magnitude z >= 0.
double rho(const Penalty& p, double z);

/// First derivative of rho at z; right-sided at branch points.
double rho_prime(const Penalty& p, double z);

/// IRLS weight rho'(r_safe) / (2 r_safe) with r_safe = max(r, eps).
/// The eps floor keeps the weight finite when the iterate sits on a data
/// point; it must be positive. For L2 this is exactly 1/2 at every r, for
/// Huber exactly 1/2 on r <= delta, and for MCP/HuberMCP exactly 0 on
/// r >= gamma.
double irls_weight(const Penalty& p, double r, double eps);

/// Lowercase wire name: "l2", "l1", "huber", "mcp", "huber_mcp".
std::string kind_name(PenaltyKind k);

/// Inverse of kind_name; throws std::invalid_argument on unknown names.
PenaltyKind parse_kind(const std::string& name);

} // namespace proattn
