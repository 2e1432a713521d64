#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symcap/disk_maps.hpp"
#include "symcap/domain.hpp"
#include "symcap/errors.hpp"
#include "symcap/reeb.hpp"
#include "symcap/section.hpp"

#include <cmath>
#include <numbers>

using namespace symcap;
using std::numbers::pi;

TEST_CASE("section points lie on the boundary and invert the model coordinates") {
    const auto dom = StarShapedDomain::parse("radial:0.05");
    for (double r : {0.1, 0.5, 0.9})
        for (double th : {0.0, 1.0, 4.0}) {
            const Point4 p = section_point(dom, r, th);
            CHECK(std::abs(dom.value(p) - 1.0) < 1e-12);
            const auto m = model_coordinates(p);
            CHECK(m[0] == doctest::Approx(r).epsilon(1e-12));
            CHECK(m[1] == doctest::Approx(th).epsilon(1e-12));
            CHECK(m[2] == doctest::Approx(0.0));
        }
}

TEST_CASE("round sphere: degree-1 return map is the identity") {
    const auto d = section_return_map(StarShapedDomain::ball(pi), 9, 16);
    CHECK(d.boundary_action == doctest::Approx(pi).epsilon(1e-9));
    CHECK(d.binding_rotation == doctest::Approx(1.0).epsilon(1e-6));
    for (int i = 0; i < d.n_r; ++i)
        for (int j = 0; j < d.n_theta; ++j) {
            const auto k = d.idx(i, j);
            CHECK(std::abs(d.ret_r[k] - d.r_at(i)) < 1e-9);
            CHECK(std::abs(d.theta_lift[k] - d.theta_at(j)) < 1e-9);
            CHECK(std::abs(d.sigma[k] - pi) < 1e-9);
        }
}

TEST_CASE("round sphere: shifting the identity lift to degree 0") {
    const auto d = section_return_map(StarShapedDomain::ball(pi), 9, 16);
    const auto lift = lift_from_section(d);
    const auto lam = section_primitive(d);
    const auto s1 = action_of_lift(lift, lam);
    CHECK(std::abs(s1.sigma[0]) < 1e-9);
    const auto s0 = action_of_lift(degree_shift(lift, 1), lam);
    CHECK(s0.sigma[0] == doctest::Approx(pi).epsilon(1e-9));
    CHECK(degree_shift(lift, 1).Theta[d.idx(3, 2)] == doctest::Approx(d.theta_at(2) + 2 * pi).epsilon(1e-9));
}

TEST_CASE("slightly stretched ellipsoid rotates rigidly") {
    const double bp = 1.05;
    const auto dom = StarShapedDomain::ellipsoid(pi, pi * bp);
    const auto d = section_return_map(dom, 9, 16);
    // linearized flow along z2 = 0 turns the normal z2 plane by a1/a2
    CHECK(d.binding_rotation == doctest::Approx(1 / bp).epsilon(1e-6));
    for (int i = 0; i < d.n_r; ++i)
        for (int j = 0; j < d.n_theta; ++j) {
            const auto k = d.idx(i, j);
            CHECK(std::abs(d.theta_lift[k] - d.theta_at(j) - 2 * pi * (bp - 1)) < 1e-9);
            CHECK(std::abs(d.sigma[k] - pi * bp) < 1e-9);
        }

    // the center is the only fixed point; its action plus the binding action is
    // the action of the closed orbit through the center
    const auto lift = lift_from_section(d);
    const auto lam = section_primitive(d);
    const auto fp = fixed_points_with_actions(lift, lam);
    REQUIRE(fp.points.size() == 1);
    CHECK(fp.points[0].r < 1e-6);
    OrbitSearchOptions opt;
    opt.seeds = 16;
    const auto orbits = find_closed_orbits(dom, opt);
    bool matched = false;
    for (const auto& o : orbits.orbits)
        if (std::abs(o.action - (fp.points[0].sigma + d.boundary_action)) < 1e-5) matched = true;
    CHECK(matched);
}

TEST_CASE("near-ball return map preserves the section area form") {
    const auto d = section_return_map(StarShapedDomain::parse("radial:0.01"), 17, 32);
    const auto lift = lift_from_section(d);
    const auto lam = section_primitive(d);
    CHECK(area_defect(lift, lam) < 1e-4);
    CHECK(lam.area() == doctest::Approx(d.boundary_action).epsilon(1e-6));
    const auto sig = action_of_lift(lift, lam);
    CHECK(sig.residual < 1e-5);
    // first return time is positive and close to the ball's
    for (double s : d.sigma) {
        CHECK(s > 0);
        CHECK(std::abs(s - pi) < 0.05);
    }
}

TEST_CASE("section needs the binding circle to be an orbit") {
    nlohmann::json spec = {{"type", "radial"}, {"epsilon", 0.1}, {"coeffs", {{1.0, 1, 0, 1, 0}}}};
    const auto dom = StarShapedDomain::from_json(spec);
    CHECK_THROWS_AS(section_return_map(dom, 5, 8), HypothesisError);
    CHECK_THROWS_AS(section_return_map(StarShapedDomain::ball(pi), 2, 8), InputError);
}
