#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "proattn/costmodel.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

using namespace proattn;

TEST_CASE("mechanism names round-trip and unknown names are rejected") {
    const std::vector<Mechanism> all = {Mechanism::Vanilla, Mechanism::Pro,
                                        Mechanism::Kde, Mechanism::Rkde};
    for (Mechanism m : all) CHECK(parse_mechanism(mechanism_name(m)) == m);
    CHECK(mechanism_name(Mechanism::Pro) == "pro");
    CHECK(mechanism_name(Mechanism::Vanilla) == "vanilla");
    CHECK_THROWS_AS((void)parse_mechanism("Pro"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_mechanism(""), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_mechanism("softmax"), std::invalid_argument);
}

TEST_CASE("analytic counts at pinned shapes") {
    // pro: (1 + 2K) N^2 D, so (1 + 6) * 4096 * 8.
    CHECK(op_count(Mechanism::Pro, 64, 8, 3) == 229376);
    // Smallest vanilla instance: 2 * 1 * 1. K must be ignored.
    CHECK(op_count(Mechanism::Vanilla, 1, 1, 0) == 2);
    CHECK(op_count(Mechanism::Vanilla, 1, 1, 9) == 2);
    CHECK(op_count(Mechanism::Kde, 1, 1, 5) == 2);
    // rkde: (2 + 3K) N^2 D + 2 K N^3 = 5*32 + 2*64.
    CHECK(op_count(Mechanism::Rkde, 4, 2, 1) == 288);
    // K = 0 collapses pro to the score product alone and rkde to 2 N^2 D.
    CHECK(op_count(Mechanism::Pro, 64, 8, 0) == 32768);
    CHECK(op_count(Mechanism::Rkde, 64, 8, 0) == op_count(Mechanism::Vanilla, 64, 8, 0));
}

TEST_CASE("pro minus vanilla equals (2K - 1) N^2 D across a shape grid") {
    const std::vector<std::int64_t> ns = {1, 2, 5, 16, 64, 257};
    const std::vector<std::int64_t> ds = {1, 3, 8, 32};
    const std::vector<std::int64_t> ks = {0, 1, 3, 8, 17};
    for (std::int64_t n : ns)
        for (std::int64_t d : ds)
            for (std::int64_t k : ks) {
                const std::int64_t n2d = n * n * d;
                CHECK(op_count(Mechanism::Pro, n, d, k) -
                          op_count(Mechanism::Vanilla, n, d, k) ==
                      (2 * k - 1) * n2d);
                // Slope in K is 2 N^2 D for pro, independent of K.
                CHECK(op_count(Mechanism::Pro, n, d, k + 1) -
                          op_count(Mechanism::Pro, n, d, k) ==
                      2 * n2d);
            }
}

TEST_CASE("degenerate shapes and overflowing counts are rejected") {
    CHECK_THROWS_AS((void)op_count(Mechanism::Pro, 0, 8, 3), std::invalid_argument);
    CHECK_THROWS_AS((void)op_count(Mechanism::Pro, 8, 0, 3), std::invalid_argument);
    CHECK_THROWS_AS((void)op_count(Mechanism::Pro, 8, 8, -1), std::invalid_argument);
    // 2^21 cubed is 2^63, one past the widest representable count.
    const std::int64_t big = std::int64_t{1} << 21;
    CHECK_THROWS_AS((void)op_count(Mechanism::Vanilla, big, big, 0), std::invalid_argument);
    CHECK_THROWS_AS((void)op_count(Mechanism::Rkde, big, 1, 1), std::invalid_argument);
    // Near-limit shapes that do fit must not throw.
    CHECK(op_count(Mechanism::Vanilla, 1 << 20, 1 << 20, 0) ==
          (std::int64_t{1} << 61));
}

TEST_CASE("instrumented counters match the analytic model exactly") {
    struct Shape {
        std::size_t n, d, k;
    };
    const std::vector<Shape> shapes = {
        {64, 8, 3}, {64, 8, 0}, {32, 4, 1}, {7, 3, 5}, {1, 1, 2},
    };
    for (const Shape& s : shapes) {
        const MeasuredCounts c = measured_counts(s.n, s.d, s.k, 42);
        CHECK(c.pro_macs == op_count(Mechanism::Pro, static_cast<std::int64_t>(s.n),
                                     static_cast<std::int64_t>(s.d),
                                     static_cast<std::int64_t>(s.k)));
        CHECK(c.vanilla_macs ==
              op_count(Mechanism::Vanilla, static_cast<std::int64_t>(s.n),
                       static_cast<std::int64_t>(s.d), static_cast<std::int64_t>(s.k)));
    }
}

TEST_CASE("counter growth per refinement step is exactly 2 N^2 D") {
    const MeasuredCounts k1 = measured_counts(64, 8, 1, 0);
    const MeasuredCounts k2 = measured_counts(64, 8, 2, 0);
    CHECK(k2.pro_macs - k1.pro_macs == 65536); // 2 * 64^2 * 8
    CHECK(k2.vanilla_macs == k1.vanilla_macs);
    // Counts depend on shape only, never on the sampled inputs.
    const MeasuredCounts other_seed = measured_counts(64, 8, 1, 987654321);
    CHECK(other_seed.pro_macs == k1.pro_macs);
    CHECK(other_seed.vanilla_macs == k1.vanilla_macs);
}

TEST_CASE("measured cost ratio lands on (1 + 2K) / 2") {
    const double r = measured_ratio(64, 8, 3, 0);
    CHECK(std::abs(r - 3.5) / 3.5 <= 0.10);
    CHECK(r == 3.5); // both counters are exact, so the ratio is too
    CHECK(measured_ratio(64, 8, 0, 0) == 0.5);
    CHECK(measured_ratio(48, 16, 2, 7) == 2.5);
    CHECK_THROWS_AS((void)measured_counts(0, 8, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS((void)measured_counts(8, 0, 1, 0), std::invalid_argument);
}
