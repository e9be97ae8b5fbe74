#include "proattn/costmodel.hpp"

#include "proattn/attention.hpp"
#include "proattn/rng.hpp"

#include <limits>
#include <stdexcept>

namespace proattn {

std::string mechanism_name(Mechanism m) {
    switch (m) {
    case Mechanism::Vanilla: return "vanilla";
    case Mechanism::Pro: return "pro";
    case Mechanism::Kde: return "kde";
    case Mechanism::Rkde: return "rkde";
    }
    throw std::logic_error("mechanism_name: unknown mechanism");
}

Mechanism parse_mechanism(const std::string& name) {
    if (name == "vanilla") return Mechanism::Vanilla;
    if (name == "pro") return Mechanism::Pro;
    if (name == "kde") return Mechanism::Kde;
    if (name == "rkde") return Mechanism::Rkde;
    throw std::invalid_argument("unknown mechanism \"" + name + "\"");
}

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    if (a != 0 && b > std::numeric_limits<std::int64_t>::max() / a)
        throw std::invalid_argument("op_count: overflow");
    return a * b;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    if (a > std::numeric_limits<std::int64_t>::max() - b)
        throw std::invalid_argument("op_count: overflow");
    return a + b;
}

} // namespace

std::int64_t op_count(Mechanism m, std::int64_t n, std::int64_t d, std::int64_t k) {
    if (n < 1 || d < 1 || k < 0)
        throw std::invalid_argument("op_count: need n >= 1, d >= 1, k >= 0");
    const std::int64_t n2d = checked_mul(checked_mul(n, n), d);
    switch (m) {
    case Mechanism::Vanilla:
    case Mechanism::Kde:
        return checked_mul(2, n2d);
    case Mechanism::Pro:
        return checked_mul(1 + 2 * k, n2d);
    case Mechanism::Rkde:
        return checked_add(checked_mul(2 + 3 * k, n2d),
                           checked_mul(checked_mul(2, k), checked_mul(checked_mul(n, n), n)));
    }
    throw std::logic_error("op_count: unknown mechanism");
}

MeasuredCounts measured_counts(std::size_t n, std::size_t d, std::size_t k,
                               std::uint64_t seed) {
    if (n == 0 || d == 0)
        throw std::invalid_argument("measured_counts: need n >= 1 and d >= 1");
    GaussianSource gauss(seed);
    Matrix q(n, d), key(n, d), v(n, d);
    for (double& x : q.data) x = gauss.next();
    for (double& x : key.data) x = gauss.next();
    for (double& x : v.data) x = gauss.next();

    AttentionConfig cfg;
    cfg.penalty = make_mcp(4.0);
    cfg.steps = k;

    MeasuredCounts out;
    MacCounter pro_mc;
    (void)pro_attention(q, key, v, cfg, &pro_mc);
    out.pro_macs = pro_mc.macs;

    MacCounter van_mc;
    (void)vanilla_attention(q, key, v, cfg.scaled, &van_mc);
    out.vanilla_macs = van_mc.macs;
    return out;
}

double measured_ratio(std::size_t n, std::size_t d, std::size_t k, std::uint64_t seed) {
    const MeasuredCounts c = measured_counts(n, d, k, seed);
    return static_cast<double>(c.pro_macs) / static_cast<double>(c.vanilla_macs);
}

} // namespace proattn
