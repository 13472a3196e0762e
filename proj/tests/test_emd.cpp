#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "redlab/emd.hpp"
#include "support/generators.hpp"
#include "support/lp_oracle.hpp"

using redlab::AbsoluteGround;
using redlab::Signature;
using redlab::UnitGround;
using Labels = Signature<std::string>;
using Numbers = Signature<double>;

namespace {

double oracle_unit(const Labels& p, const Labels& q) {
    std::vector<std::vector<double>> dist(p.size(),
                                          std::vector<double>(q.size()));
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j)
            dist[i][j] = p.clusters[i] == q.clusters[j] ? 0.0 : 1.0;
    return lp_oracle::emd_reference(p.weights, q.weights, dist);
}

double oracle_abs(const Numbers& p, const Numbers& q) {
    std::vector<std::vector<double>> dist(p.size(),
                                          std::vector<double>(q.size()));
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j)
            dist[i][j] = std::abs(p.clusters[i] - q.clusters[j]);
    return lp_oracle::emd_reference(p.weights, q.weights, dist);
}

} // namespace

TEST_CASE("emd: identical signatures cost nothing") {
    Labels p({"a", "b"}, {0.5, 0.5});
    CHECK(redlab::emd(p, p, UnitGround{}).value == 0.0);
    CHECK(redlab::emd_unit_ground(p, p) == 0.0);
}

TEST_CASE("emd: disjoint unit-ground signatures cost 1") {
    Labels p({"a", "b"}, {0.3, 0.7});
    Labels q({"c", "d"}, {0.6, 0.4});
    CHECK(redlab::emd(p, q, UnitGround{}).value == Catch::Approx(1.0));
    CHECK(redlab::emd_unit_ground(p, q) == Catch::Approx(1.0));
}

TEST_CASE("emd: two-router example lands on 0.06") {
    // One side routes 0.46/0.48/0.02 over three targets and leaves 0.04
    // unassigned; the other covers the first two targets fully. Only the
    // private tail plus the unassigned remainder has to move.
    Labels p({"C", "D", "F"}, {0.46, 0.48, 0.02});
    Labels q({"C", "D"}, {0.5, 0.5});
    const double d = redlab::emd_unit_ground(p, q);
    CHECK(d == Catch::Approx(0.06).margin(1e-12));

    // Cross-check with the LP on the explicit formulation: the missing 0.04
    // is a private cluster no other side shares.
    Labels p_pad({"C", "D", "F", "__rest"}, {0.46, 0.48, 0.02, 0.04});
    CHECK(oracle_unit(p_pad, q) == Catch::Approx(0.06).margin(1e-9));
    CHECK(redlab::emd(p_pad, q, UnitGround{}).value ==
          Catch::Approx(0.06).margin(1e-12));
}

TEST_CASE("emd: sub-normalized totals beyond tolerance throw above 1") {
    Labels p({"a"}, {1.2});
    Labels q({"a"}, {1.0});
    CHECK_THROWS_AS(redlab::emd_unit_ground(p, q), redlab::ConfigError);
}

TEST_CASE("emd: near-1 totals renormalize instead of throwing") {
    Labels p({"a", "b"}, {0.5, 0.5 + 5e-7});
    Labels q({"a", "b"}, {0.5, 0.5});
    CHECK(redlab::emd_unit_ground(p, q) == Catch::Approx(0.0).margin(1e-6));
}

TEST_CASE("emd_1d: point masses move their distance apart") {
    Numbers p({0.0}, {1.0});
    Numbers q({4.0}, {1.0});
    CHECK(redlab::emd_1d(p, q) == Catch::Approx(4.0));
    CHECK(redlab::emd(p, q, AbsoluteGround{}).value == Catch::Approx(4.0));
}

TEST_CASE("emd_1d: equal signatures cost nothing") {
    Numbers p({1.0, 2.0, 3.0}, {0.2, 0.3, 0.5});
    CHECK(redlab::emd_1d(p, p) == 0.0);
}

TEST_CASE("emd_1d: split mass example") {
    Numbers p({0.0, 1.0}, {0.5, 0.5});
    Numbers q({1.0}, {1.0});
    // Half the mass travels distance 1.
    CHECK(redlab::emd_1d(p, q) == Catch::Approx(0.5));
    CHECK(redlab::emd(p, q, AbsoluteGround{}).value == Catch::Approx(0.5));
}

TEST_CASE("emd: rejects zero-weight and malformed signatures") {
    Labels zero({"a"}, {0.0});
    Labels ok({"a"}, {1.0});
    CHECK_THROWS(redlab::emd(zero, ok, UnitGround{}));
    CHECK_THROWS(redlab::emd(ok, zero, UnitGround{}));
    Labels dup({"a", "a"}, {0.5, 0.5});
    CHECK_THROWS(redlab::emd(dup, ok, UnitGround{}));
    Labels negative({"a", "b"}, {1.5, -0.5});
    CHECK_THROWS(redlab::emd(negative, ok, UnitGround{}));
    Labels empty;
    CHECK_THROWS(redlab::emd(empty, ok, UnitGround{}));
}

TEST_CASE("emd: flow terms reproduce the reported value") {
    Labels p({"a", "b", "c"}, {0.2, 0.5, 0.3});
    Labels q({"b", "d"}, {0.6, 0.4});
    const auto r = redlab::emd(p, q, UnitGround{});
    double recomputed = 0.0;
    double moved = 0.0;
    for (const auto& e : r.flow.entries) {
        const double d = p.clusters[e.from] == q.clusters[e.to] ? 0.0 : 1.0;
        recomputed += e.amount * d;
        moved += e.amount;
    }
    CHECK(moved == Catch::Approx(r.flow.total_moved));
    CHECK(recomputed / moved == Catch::Approx(r.value));
}

TEST_CASE("emd: unit-ground fast path matches the general solver") {
    redlab::Rng rng(0x5eedf00d);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = testgen::random_label_signature(rng, 8, 6);
        const auto q = testgen::random_label_signature(rng, 8, 6);
        const double fast = redlab::emd_unit_ground(p, q);
        const double slow = redlab::emd(p, q, UnitGround{}).value;
        INFO("trial " << trial);
        CHECK(std::abs(fast - slow) < 1e-9);
    }
}

TEST_CASE("emd: 1-d fast path matches the general solver") {
    redlab::Rng rng(0xabcdef12);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = testgen::random_numeric_signature(rng, 6, true);
        const auto q = testgen::random_numeric_signature(rng, 6, true);
        const double fast = redlab::emd_1d(p, q);
        const double slow = redlab::emd(p, q, AbsoluteGround{}).value;
        INFO("trial " << trial);
        CHECK(std::abs(fast - slow) < 1e-9);
    }
}

TEST_CASE("emd: agrees with an independent LP solver") {
    redlab::Rng rng(0x12345678);
    for (int trial = 0; trial < 60; ++trial) {
        const auto p = testgen::random_label_signature(rng, 7, 5);
        const auto q = testgen::random_label_signature(rng, 7, 5);
        const double mine = redlab::emd(p, q, UnitGround{}).value;
        const double ref = oracle_unit(p, q);
        INFO("trial " << trial);
        CHECK(mine == Catch::Approx(ref).margin(1e-7));
    }
    for (int trial = 0; trial < 60; ++trial) {
        const auto p = testgen::random_numeric_signature(rng, 5, true);
        const auto q = testgen::random_numeric_signature(rng, 5, true);
        const double mine = redlab::emd(p, q, AbsoluteGround{}).value;
        const double ref = oracle_abs(p, q);
        INFO("trial " << trial);
        CHECK(mine == Catch::Approx(ref).margin(1e-7));
    }
}

TEST_CASE("emd: unequal totals move only the smaller mass") {
    // Supply 2, demand 1: only 1 unit moves, and the solver picks the
    // cheapest unit to move.
    Numbers p({0.0, 10.0}, {1.0, 1.0});
    Numbers q({0.5}, {1.0});
    const auto r = redlab::emd(p, q, AbsoluteGround{});
    CHECK(r.flow.total_moved == Catch::Approx(1.0));
    CHECK(r.value == Catch::Approx(0.5));
}

TEST_CASE("emd: metric properties hold on unit ground") {
    redlab::Rng rng(0x77777777);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = testgen::random_label_signature(rng, 6, 4);
        const auto b = testgen::random_label_signature(rng, 6, 4);
        const auto c = testgen::random_label_signature(rng, 6, 4);
        const double ab = redlab::emd_unit_ground(a, b);
        const double ba = redlab::emd_unit_ground(b, a);
        const double ac = redlab::emd_unit_ground(a, c);
        const double cb = redlab::emd_unit_ground(c, b);
        INFO("trial " << trial);
        CHECK(std::abs(ab - ba) < 1e-12);       // symmetry
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0 + 1e-12);               // unit ground bounds
        CHECK(ab <= ac + cb + 1e-9);            // triangle inequality
    }
}
