#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symcap/demo_maps.hpp"
#include "symcap/disk_maps.hpp"
#include "symcap/errors.hpp"
#include "symcap/genfun.hpp"

#include <cmath>
#include <numbers>

using namespace symcap;
using std::numbers::pi;

namespace {

StripMap translation(const PolarGrid& g, double c) {
    StripMap m;
    m.grid = g;
    m.monotone = true;
    for (int i = 0; i < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j) {
            m.R.push_back(g.r_at(i));
            m.Theta.push_back(g.theta_at(j) + c);
        }
    return m;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double w = 0;
    for (std::size_t k = 0; k < a.size(); ++k) w = std::max(w, std::abs(a[k] - b[k]));
    return w;
}

}  // namespace

TEST_CASE("area density of the standard disk") {
    const PolarGrid g{33, 64};
    const auto F = AreaDensity::standard_disk(g, 1.0);
    CHECK(F.F_at(0.5, 1.0) == doctest::Approx(0.5));
    CHECK(F.A_at(0.5, 2.0) == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(F.B_at(0.5, pi) == doctest::Approx(0.5 * pi).epsilon(1e-12));
    CHECK(F.degenerate_row(0));
    CHECK(!F.degenerate_row(1));
    const auto Fp = AreaDensity::from_primitive(g, PrimitiveOneForm::standard(1.0));
    CHECK(max_diff(F.F(), Fp.F()) < 1e-10);
    CHECK(max_diff(F.A(), Fp.A()) < 1e-10);
}

TEST_CASE("lift_to_strip of rotations and degree shifts") {
    const PolarGrid g{17, 32};
    const auto rot = flow_from_hamiltonian(make_rotation_hamiltonian(1.0, 0.8), g);
    const auto S = lift_to_strip(rot);
    const auto T = translation(g, 0.8);
    CHECK(max_diff(S.R, T.R) < 1e-10);
    CHECK(max_diff(S.Theta, T.Theta) < 1e-10);
    CHECK(S.monotone);
    const auto S2 = lift_to_strip(degree_shift(rot, 2));
    CHECK(max_diff(S2.Theta, translation(g, 0.8 + 4 * pi).Theta) < 1e-10);
}

TEST_CASE("translation generating function") {
    const PolarGrid g{65, 128};
    const auto F = AreaDensity::standard_disk(g, 1.0);
    for (double c : {0.5, 2 * pi}) {
        const auto W = genfun_from_stripmap(translation(g, c), F);
        double err = 0;
        for (int i = 0; i < g.n_r; ++i)
            for (int j = 0; j < g.n_theta; ++j) {
                const double r = g.r_at(i);
                err = std::max(err, std::abs(W.W[g.idx(i, j)] - c * (1 - r * r) / 2));
            }
        CHECK(err < 1e-9);
        const auto back = stripmap_from_genfun(W, F);
        CHECK(max_diff(back.R, translation(g, c).R) < 1e-9);
        CHECK(max_diff(back.Theta, translation(g, c).Theta) < 1e-9);

        const auto rep = check_genfun_conditions(W, F);
        CHECK(rep.all());
        CHECK(rep.fit_c1 == doctest::Approx(c / 2).epsilon(1e-8));
        CHECK(rep.fit_c2 == doctest::Approx(-c).epsilon(1e-8));
        CHECK(rep.fit_c3 == doctest::Approx(c).epsilon(1e-8));
        CHECK(band_defect(translation(g, c), 3) < 1e-14);
    }
    const auto W = genfun_from_stripmap(translation(g, 2 * pi), F);
    CHECK(W.W[g.idx(0, 5)] == doctest::Approx(pi).epsilon(1e-9));
}

TEST_CASE("identity and zero generating function") {
    const PolarGrid g{17, 32};
    const auto F = AreaDensity::standard_disk(g, 1.0);
    const auto W = genfun_from_stripmap(translation(g, 0.0), F);
    for (double v : W.W) CHECK(std::abs(v) < 1e-14);
    GenFunW zero{g, std::vector<double>(g.size(), 0.0)};
    const auto id = stripmap_from_genfun(zero, F);
    CHECK(max_diff(id.R, translation(g, 0).R) < 1e-12);
    CHECK(max_diff(id.Theta, translation(g, 0).Theta) < 1e-12);
    CHECK(check_genfun_conditions(zero, F).all());
}

TEST_CASE("condition (2) violation is located") {
    const PolarGrid g{65, 128};
    const auto F = AreaDensity::standard_disk(g, 1.0);
    const double r0 = 0.5, t0 = pi, s = 0.1, amp = 2.0;
    GenFunW W{g, std::vector<double>(g.size())};
    for (int i = 0; i < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j) {
            const double dr = g.r_at(i) - r0, dt = g.theta_at(j) - t0;
            W.W[g.idx(i, j)] = amp * dr * std::sin(dt) * std::exp(-(dr * dr + 1 - std::cos(dt)) / (s * s));
        }
    const auto rep = check_genfun_conditions(W, F);
    CHECK(!rep.c2.pass);
    CHECK(rep.c2.i == 32);
    CHECK(rep.c2.j == 64);
    CHECK(rep.first_failure().find("condition (2)") != std::string::npos);
    CHECK_THROWS_AS(stripmap_from_genfun(W, F), HypothesisError);
}

TEST_CASE("demo map round trips and fixed points") {
    const PolarGrid g{97, 256};
    const auto F = AreaDensity::standard_disk(g, 1.0);
    const auto H = demo_twist_hamiltonian(0);
    const auto lift = flow_from_hamiltonian(H, g, 1.0, FlowOptions{128});
    const auto S = lift_to_strip(lift);
    CHECK(S.monotone);
    CHECK(strip_area_defect(S, F) < 1e-4);
    double curl = 0;
    const auto W = genfun_from_stripmap(S, F, {}, &curl);
    const auto S2 = stripmap_from_genfun(W, F);
    CHECK(max_diff(S2.R, S.R) < 1e-6);
    CHECK(max_diff(S2.Theta, S.Theta) < 1e-6);
    CHECK(max_diff(genfun_from_stripmap(S2, F).W, W.W) < 1e-6);

    const auto crit = critical_points(W);
    const auto fix = strip_fixed_points(S);
    REQUIRE(crit.size() == fix.size());
    REQUIRE(!crit.empty());
    const auto lam = PrimitiveOneForm::standard(1.0);
    for (const auto& c : crit) {
        bool found = false;
        for (const auto& f : fix)
            if (std::abs(f.r - c.r) < 1e-4 && std::abs(std::remainder(f.theta - c.theta, 2 * pi)) < 1e-4) found = true;
        CHECK(found);
        const auto p = flow_point(*H, c.r * std::cos(c.theta), c.r * std::sin(c.theta), 0, 1, 512, &lam);
        CHECK(std::abs(p.action - c.value) < 1e-5);
    }

    // strip action agrees with the disk action
    const auto sigma = action_of_lift(lift, lam).sigma;
    const auto Sig = strip_action(S, F);
    double e = 0;
    for (int i = 1; i + 1 < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j) e = std::max(e, std::abs(Sig[g.idx(i, j)] - sigma[g.idx(i, j)]));
    CHECK(e < 1e-5);
}

TEST_CASE("pipeline on a translation returns the autonomous Hamiltonian") {
    const PolarGrid g{33, 64};
    const auto F = AreaDensity::standard_disk(g, 1.0);
    const double c = 0.7;
    PipelineOptions opt;
    opt.n_steps = 8;
    const auto res = positive_hamiltonian_pipeline(translation(g, c), F, opt);
    REQUIRE(res.n_t == 9);
    double err = 0;
    for (int k = 0; k < res.n_t; ++k)
        for (int i = 0; i < g.n_r; ++i)
            for (int j = 0; j < g.n_theta; ++j) {
                const double r = g.r_at(i);
                err = std::max(err, std::abs(res.H[(k * g.n_r + i) * g.n_theta + j] - c * (1 - r * r) / 2));
            }
    CHECK(err < 1e-8);
    CHECK(res.min_interior > 0);
    CHECK(res.max_identity_error < 1e-8);
    CHECK(res.inner_rotation == doctest::Approx(c));
    CHECK(res.outer_rotation == doctest::Approx(c));
}

TEST_CASE("pipeline on a known positive Hamiltonian") {
    const PolarGrid g{65, 128};
    const auto F = AreaDensity::standard_disk(g, 1.0);
    const auto S = lift_to_strip(flow_from_hamiltonian(demo_twist_hamiltonian(0), g, 1.0, FlowOptions{128}));
    PipelineOptions opt;
    opt.n_steps = 16;
    const auto res = positive_hamiltonian_pipeline(S, F, opt);
    CHECK(res.min_interior >= -1e-8);
    CHECK(res.max_identity_error <= 1e-5);
    for (const auto& p : res.fixed_points) CHECK(p.H_mismatch <= 1e-5);
}

TEST_CASE("pipeline rejects negative fixed-point actions") {
    const PolarGrid g{33, 64};
    const auto F = AreaDensity::standard_disk(g, 1.0);
    const auto S = lift_to_strip(flow_from_hamiltonian(demo_negative_hamiltonian(), g));
    CHECK_THROWS_AS(positive_hamiltonian_pipeline(S, F), HypothesisError);
}

TEST_CASE("band defect sees a missing rotation band") {
    const PolarGrid g{33, 64};
    const auto F = AreaDensity::standard_disk(g, 1.0);
    // reaches into the outer band
    const auto H = make_sum_hamiltonian(make_rotation_hamiltonian(1.0, 0.5),
                                        make_annular_perturbation(1.0, 0.5, 0.995, {{0.02, 3, 0.0, 0}}));
    const auto S = lift_to_strip(flow_from_hamiltonian(H, g));
    CHECK(band_defect(S, 3) > 1e-6);
    CHECK_THROWS_AS(positive_hamiltonian_pipeline(S, F), HypothesisError);
    // a generic map moves the origin and has no strip lift
    CHECK_THROWS_AS(lift_to_strip(flow_from_hamiltonian(make_random_hamiltonian(1.0, 7, 0.05), g)), HypothesisError);
}
