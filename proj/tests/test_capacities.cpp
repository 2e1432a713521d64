#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symcap/capacities.hpp"
#include "symcap/errors.hpp"

#include <cmath>
#include <numbers>

using namespace symcap;
using std::numbers::pi;

namespace {

void check_identities(const CapacityReport& r) {
    REQUIRE(r.A_min.has_value());
    CHECK(r.systolic_ratio == *r.A_min * *r.A_min / (2 * r.volume));
    CHECK(r.viterbo_rhs == std::sqrt(2 * r.volume));
    CHECK(r.status == "non-certified");
}

}  // namespace

TEST_CASE("ellipsoid oracle") {
    const auto e = ellipsoid_oracle(1, 2, 5);
    CHECK(e.spectrum == std::vector<double>{1, 2, 2, 3, 3});
    CHECK(e.A_min == 1);
    CHECK(e.volume == 1);
    CHECK(e.gromov == 1);
    CHECK(e.cylindrical == 1);
    CHECK(e.ech1 == 1);

    const auto b = ellipsoid_oracle(pi, pi, 1);
    CHECK(b.A_min == pi);
    CHECK(b.volume == doctest::Approx(pi * pi / 2));

    CHECK(ellipsoid_oracle(2, 1, 3).A_min == ellipsoid_oracle(1, 2, 3).A_min);
    CHECK(ellipsoid_oracle(2, 1, 7).spectrum == ellipsoid_oracle(1, 2, 7).spectrum);
    CHECK_THROWS_AS(ellipsoid_oracle(0, 1, 3), InputError);
    CHECK_THROWS_AS(ellipsoid_oracle(1, 1, 0), InputError);
}

TEST_CASE("viterbo check") {
    const auto ball = viterbo_check(pi, pi * pi / 2);
    CHECK(ball.holds);
    CHECK(std::abs(ball.margin) < 1e-15);
    const auto ell = viterbo_check(1, 1);
    CHECK(ell.holds);
    CHECK(ell.margin == doctest::Approx(std::sqrt(2.0) - 1));
    const auto bad = viterbo_check(2, 1);
    CHECK(!bad.holds);
    CHECK(bad.margin == doctest::Approx(std::sqrt(2.0) - 2));
    CHECK_THROWS_AS(viterbo_check(1, 0), InputError);
}

TEST_CASE("A_min of E(1, sqrt 2) and the ball") {
    const auto r = a_min_pipeline(StarShapedDomain::ellipsoid(1, std::sqrt(2.0)));
    check_identities(r);
    CHECK(*r.A_min == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.systolic_ratio == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-6));
    REQUIRE(r.A_hopf.has_value());
    CHECK(*r.A_hopf == 1.0);
    CHECK(r.bounds_exact);
    CHECK(r.cZ_upper == 1.0);
    CHECK(r.ball_lower == 1.0);

    CapacityBudget small;
    small.initial_seeds = 16;
    const auto b = a_min_pipeline(StarShapedDomain::ball(pi), small);
    check_identities(b);
    CHECK(b.systolic_ratio == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("A_min of E(1, b) stays 1") {
    CapacityBudget budget;
    budget.initial_seeds = 16;
    for (double b : {1.2, 1.5, 2.0}) {
        const auto r = a_min_pipeline(StarShapedDomain::ellipsoid(1, b), budget);
        REQUIRE(r.A_min.has_value());
        CHECK(*r.A_min == doctest::Approx(ellipsoid_oracle(1, b, 1).A_min).epsilon(1e-6));
    }
}

TEST_CASE("near-ball radial domain") {
    CapacityBudget budget;
    budget.initial_seeds = 16;
    budget.volume_samples = 200000;
    const double eps = 0.01;
    const auto r = a_min_pipeline(StarShapedDomain::parse("radial:0.01"), budget);
    check_identities(r);
    CHECK(r.systolic_ratio <= 1 + 10 * eps);
    CHECK(!r.A_hopf.has_value());
    CHECK(!r.bounds_exact);
    CHECK(r.ball_lower <= r.cZ_upper);
    CHECK(*r.A_min >= r.ball_lower - 1e-6);
    CHECK(std::abs(r.volume - r.volume_monte_carlo) <= 5 * r.volume_std_error);
}

TEST_CASE("tiny budget is inconclusive, not an error") {
    CapacityBudget budget;
    budget.initial_seeds = 2;
    budget.max_seeds = 2;
    budget.max_period = 0.3;
    const auto r = a_min_pipeline(StarShapedDomain::ellipsoid(1, 2), budget);
    CHECK(r.status == "inconclusive");
    CHECK(!r.A_min.has_value());
    const auto j = to_json(r);
    CHECK(j["status"] == "inconclusive");
    CHECK(j["A_min"].is_null());
    budget.initial_seeds = 4;
    CHECK_THROWS_AS(a_min_pipeline(StarShapedDomain::ellipsoid(1, 2), budget), InputError);
}

TEST_CASE("report json") {
    CapacityBudget budget;
    budget.initial_seeds = 16;
    const auto r = a_min_pipeline(StarShapedDomain::ellipsoid(1, 2), budget);
    const auto j = to_json(r);
    for (const char* key : {"status", "A_min", "A_Hopf", "volume", "viterbo_lhs", "viterbo_rhs", "systolic_ratio"})
        CHECK(j.contains(key));
    CHECK(j["A_min"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(to_json(a_min_pipeline(StarShapedDomain::ellipsoid(1, 2), budget)).dump() == j.dump());
}
