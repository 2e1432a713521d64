// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any fails.
#include "symcap/capacities.hpp"
#include "symcap/construction.hpp"
#include "symcap/demo_maps.hpp"
#include "symcap/disk_maps.hpp"
#include "symcap/domain.hpp"
#include "symcap/genfun.hpp"
#include "symcap/io.hpp"
#include "symcap/reeb.hpp"
#include "symcap/rng.hpp"
#include "symcap/section.hpp"
#include "symcap/sp2.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace symcap;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }
private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// Artifacts of the first pass, compared byte for byte in the determinism check.
struct Artifacts {
    std::string orbits_csv, section_csv, pipeline_json, certificate_json, capacity_json;
};

std::string orbits_artifact() {
    OrbitSearchOptions opt;
    opt.seeds = 64;
    return io::orbits_csv(find_closed_orbits(StarShapedDomain::ellipsoid(1, std::sqrt(2.0)), opt).orbits);
}

Outcome criterion1(Artifacts& art) {
    Timer t;
    OrbitSearchOptions opt;
    opt.seeds = 64;
    const auto res = find_closed_orbits(StarShapedDomain::ellipsoid(1, std::sqrt(2.0)), opt);
    const double secs = t.seconds();
    art.orbits_csv = io::orbits_csv(res.orbits);
    std::vector<double> actions;
    for (const auto& o : res.orbits) actions.push_back(o.action);
    std::sort(actions.begin(), actions.end());
    bool ok = actions.size() == 2 && secs < 60;
    double err = 0;
    if (actions.size() == 2) {
        err = std::max(std::abs(actions[0] - 1.0), std::abs(actions[1] - std::sqrt(2.0)));
        ok = ok && err <= 1e-6;
    }
    return {ok, std::to_string(actions.size()) + " orbits, action error " + sci(err) + ", " + sci(secs) + " s"};
}

Outcome criterion2() {
    const double b = 1.618;
    const auto res = find_closed_orbits(StarShapedDomain::ellipsoid(1, b));
    if (res.orbits.size() != 2) return {false, std::to_string(res.orbits.size()) + " orbits found"};
    auto orbits = res.orbits;
    std::sort(orbits.begin(), orbits.end(), [](const ReebOrbit& x, const ReebOrbit& y) { return x.action < y.action; });
    const double e1 = std::abs(orbits[0].rotation_number - (1 + 1 / b));
    const double e2 = std::abs(orbits[1].rotation_number - (1 + b));
    const bool ok = orbits[0].cz_index == 3 && orbits[1].cz_index == 5 && e1 <= 1e-4 && e2 <= 1e-4;
    return {ok, "cz " + std::to_string(orbits[0].cz_index) + "," + std::to_string(orbits[1].cz_index) +
                    ", rotation errors " + sci(e1) + ", " + sci(e2)};
}

// Entries a + b cos 2 pi t + c sin 2 pi t; positive arcs use M M^T + 0.1 I.
SymGenerator random_generator(std::uint64_t seed, bool positive) {
    CounterRng rng(seed);
    std::array<double, 18> c{};
    for (auto& v : c) v = rng.uniform(-1.0, 1.0);
    return [c, positive](double t) {
        auto e = [&](int k) { return c[3 * k] + c[3 * k + 1] * std::cos(2 * pi * t) + c[3 * k + 2] * std::sin(2 * pi * t); };
        if (!positive) return std::array<double, 3>{2 * e(0), 2 * e(1), 2 * e(2)};
        const double m11 = e(3), m12 = e(4), m21 = e(5), m22 = e(0);
        return std::array<double, 3>{m11 * m11 + m12 * m12 + 0.1, m11 * m21 + m12 * m22, m21 * m21 + m22 * m22 + 0.1};
    };
}

Outcome criterion3() {
    double worst = 0;
    for (std::uint64_t s = 1; s <= 100; ++s) {
        const auto arc = arc_from_generator(random_generator(s, false), 400);
        const double a = rotation_number_of_arc(arc, RotationMethod::eigenvalue_lift);
        const double b = rotation_number_of_arc(arc, RotationMethod::winding_limit, 1 << 21);
        worst = std::max(worst, std::abs(a - b));
    }
    int positive = 0;
    double min_rho = 1e300;
    for (std::uint64_t s = 1001; s <= 1100; ++s) {
        const auto p = positive_path_check(arc_from_generator(random_generator(s, true), 400));
        if (p.rho > 0) ++positive;
        min_rho = std::min(min_rho, p.rho);
    }
    return {worst <= 1e-6 && positive == 100,
            "method gap " + sci(worst) + ", " + std::to_string(positive) + "/100 positive arcs with rho > 0 (min " +
                sci(min_rho) + ")"};
}

Outcome criterion4() {
    // 33x64 leaves the concatenation's residual at 1.2e-5 for one pair
    const PolarGrid g{65, 128};
    const auto lam = PrimitiveOneForm::standard(1.0);
    const FlowOptions fo{64};
    double e1 = 0, e2 = 0, e3 = 0, ec = 0;
    auto interior = [&](const std::function<double(std::size_t, int, int)>& f) {
        double w = 0;
        for (int i = 1; i + 1 < g.n_r; ++i)
            for (int j = 0; j < g.n_theta; ++j) w = std::max(w, std::abs(f(g.idx(i, j), i, j)));
        return w;
    };
    for (std::uint64_t s = 1; s <= 20; ++s) {
        const auto H1 = make_random_hamiltonian(1.0, 2 * s, 0.02), H2 = make_random_hamiltonian(1.0, 2 * s + 1, 0.02);
        const auto phi = flow_from_hamiltonian(H1, g, 1.0, fo);
        const auto psi = flow_from_hamiltonian(H2, g, 1.0, fo);
        // the concatenation runs at twice the speed: default step count
        const auto both = flow_from_hamiltonian(make_concatenated_hamiltonian(H1, H2), g);
        const auto inv = flow_from_hamiltonian(make_reversed_hamiltonian(H1), g);
        const auto lamu = lam.with_exact(make_random_exact_term(1.0, 100 + s, 0.1));
        // action_of_lift enforces the 1e-5 residual check on every lift
        const auto sp = action_of_lift(phi, lam).sigma, spu = action_of_lift(phi, lamu).sigma;
        const auto sc = action_of_lift(both, lam).sigma, si = action_of_lift(inv, lam).sigma;
        e1 = std::max(e1, interior([&](std::size_t k, int i, int j) {
            return spu[k] - sp[k] - (lamu.u_polar(phi.R[k], phi.Theta[k]) - lamu.u_polar(g.r_at(i), g.theta_at(j)));
        }));
        e2 = std::max(e2, interior([&](std::size_t k, int, int) {
            const auto q = flow_point(*H2, phi.R[k] * std::cos(phi.Theta[k]), phi.R[k] * std::sin(phi.Theta[k]), 0, 1,
                                      64, &lam);
            return sc[k] - q.action - sp[k];
        }));
        e3 = std::max(e3, interior([&](std::size_t k, int, int) {
            const auto q = flow_point(*H1, inv.R[k] * std::cos(inv.Theta[k]), inv.R[k] * std::sin(inv.Theta[k]), 0, 1,
                                      64, &lam);
            return si[k] + q.action;
        }));
        ec = std::max(ec, std::abs(calabi(both, lam) - calabi(phi, lam) - calabi(psi, lam)));
    }
    return {e1 <= 1e-5 && e2 <= 1e-5 && e3 <= 1e-5 && ec <= 1e-4,
            "primitive " + sci(e1) + ", composition " + sci(e2) + ", inverse " + sci(e3) + ", Calabi " + sci(ec)};
}

Outcome criterion5() {
    const PolarGrid g{129, 256};
    const auto F = AreaDensity::standard_disk(g, 1.0);
    const auto lam = PrimitiveOneForm::standard(1.0);
    double map_rt = 0, w_rt = 0, w_sigma = 0;
    int set_mismatch = 0;
    std::size_t points = 0;
    for (std::uint64_t s = 1; s <= 20; ++s) {
        const auto H = demo_twist_hamiltonian(s);
        const auto S = lift_to_strip(flow_from_hamiltonian(H, g, 1.0, FlowOptions{128}));
        const auto W = genfun_from_stripmap(S, F);
        const auto S2 = stripmap_from_genfun(W, F);
        for (std::size_t k = 0; k < g.size(); ++k)
            map_rt = std::max({map_rt, std::abs(S2.R[k] - S.R[k]), std::abs(S2.Theta[k] - S.Theta[k])});
        const auto W2 = genfun_from_stripmap(S2, F);
        for (std::size_t k = 0; k < g.size(); ++k) w_rt = std::max(w_rt, std::abs(W2.W[k] - W.W[k]));

        const auto crit = critical_points(W);
        const auto fix = strip_fixed_points(S);
        auto near = [](const StripPoint& a, const StripPoint& b) {
            return std::abs(a.r - b.r) < 1e-4 && std::abs(std::remainder(a.theta - b.theta, 2 * pi)) < 1e-4;
        };
        for (const auto& c : crit)
            if (std::none_of(fix.begin(), fix.end(), [&](const StripPoint& f) { return near(c, f); })) ++set_mismatch;
        for (const auto& f : fix)
            if (std::none_of(crit.begin(), crit.end(), [&](const StripPoint& c) { return near(c, f); })) ++set_mismatch;
        for (const auto& c : crit) {
            const auto p = flow_point(*H, c.r * std::cos(c.theta), c.r * std::sin(c.theta), 0, 1, 512, &lam);
            w_sigma = std::max(w_sigma, std::abs(p.action - c.value));
        }
        points += crit.size();
    }
    return {map_rt <= 1e-6 && w_rt <= 1e-6 && set_mismatch == 0 && w_sigma <= 1e-5,
            "map round trip " + sci(map_rt) + ", W round trip " + sci(w_rt) + ", " + std::to_string(points) +
                " critical points, set mismatches " + std::to_string(set_mismatch) + ", |W - Sigma| " + sci(w_sigma)};
}

Outcome criterion6() {
    Timer t;
    const PolarGrid g{128, 512};
    const auto F = AreaDensity::standard_disk(g, 1.0);
    const auto S = lift_to_strip(flow_from_hamiltonian(demo_twist_hamiltonian(0), g, 1.0, FlowOptions{128}));
    PipelineOptions opt;
    opt.n_steps = 64;
    const auto res = positive_hamiltonian_pipeline(S, F, opt);
    const double secs = t.seconds();
    double mismatch = 0, min_action = 1e300;
    for (const auto& p : res.fixed_points) {
        mismatch = std::max(mismatch, p.H_mismatch);
        min_action = std::min(min_action, p.W);
    }
    return {res.min_interior >= -1e-8 && mismatch <= 1e-5 && !res.fixed_points.empty() && min_action > 0 && secs < 120,
            "min_interior " + sci(res.min_interior) + ", max |H_t - W| at critical points " + sci(mismatch) + ", " +
                std::to_string(res.fixed_points.size()) + " fixed points (min action " + sci(min_action) + "), " +
                sci(secs) + " s"};
}

Point4 box_point(CounterRng& rng, double s) {
    return {rng.uniform(-s, s), rng.uniform(-s, s), rng.uniform(-s, s), rng.uniform(-s, s)};
}

Outcome criterion7(Artifacts& art) {
    int ball_bad = 0, ell_bad = 0;
    {
        const auto d = DomainAaH::quadratic(pi, 1.0);
        CounterRng rng(0xA11);
        for (int n = 0; n < 100000; ++n) {
            const Point4 p = box_point(rng, 1.0);
            if (d.contains(p) != (norm2(p) <= 1.0)) ++ball_bad;
        }
    }
    const double a = 1.0, C = 2.0;
    {
        const auto d = DomainAaH::quadratic(a, C);
        CounterRng rng(0xE11);
        for (int n = 0; n < 100000; ++n) {
            const Point4 p = box_point(rng, 0.9);
            const double q1 = p[0] * p[0] + p[1] * p[1], q2 = p[2] * p[2] + p[3] * p[3];
            if (d.contains(p) != (pi * q1 / a + pi * q2 / (C * a) <= 1.0)) ++ell_bad;
        }
    }
    double vol_err = 0;
    for (auto [aa, CC] : {std::pair{1.0, 2.0}, {pi, 1.0}, {0.5, 1.7}})
        vol_err = std::max(vol_err, std::abs(volume_quadrature(DomainAaH::quadratic(aa, CC)) / (CC * aa * aa / 2) - 1));

    // every domain here has H >= a - pi|z|^2
    std::uint64_t violations = 0;
    bool all_fit = true;
    std::vector<DomainAaH> doms = {DomainAaH::quadratic(pi, 1.0), DomainAaH::quadratic(1.0, 2.0),
                                   DomainAaH::quadratic(pi, 1.05),
                                   DomainAaH::from_file(SYMCAP_DATA_DIR "/bump_domain.json"),
                                   DomainAaH::from_file(SYMCAP_DATA_DIR "/grid_domain.json")};
    for (const auto& d : doms) {
        const auto sw = sandwich_check(d);
        violations += sw.ball_violations + sw.cylinder_violations;
        all_fit = all_fit && sw.contains_ball && sw.subset_cylinder;
    }
    const auto ball = DomainAaH::quadratic(pi, 1.0);
    art.certificate_json = embedding_report(ball, sandwich_check(ball), volume(ball)).dump(2);
    return {ball_bad == 0 && ell_bad == 0 && vol_err <= 1e-3 && violations == 0 && all_fit,
            "membership disagreements ball " + std::to_string(ball_bad) + ", E(1,2) " + std::to_string(ell_bad) +
                ", volume error " + sci(vol_err) + ", sandwich violations " + std::to_string(violations) + " over " +
                std::to_string(doms.size()) + " domains"};
}

Outcome criterion8() {
    double mismatch = 0;
    for (const auto& d : {DomainAaH::quadratic(pi, 1.05), DomainAaH::from_file(SYMCAP_DATA_DIR "/bump_domain.json"),
                          DomainAaH::from_file(SYMCAP_DATA_DIR "/grid_domain.json")}) {
        GraphFlowOptions opt;
        opt.tolerance = 1.0;  // measured here, not thrown
        mismatch = std::max(mismatch, graph_section_return_map(d, PolarGrid{17, 32}, opt).max_mismatch);
    }
    // Reeb flow on E(1, C): the section return map (degree 1) plus one full turn is the
    // graph return map, a rotation by 2 pi C.
    double angle_err = 0;
    const PolarGrid g{17, 32};
    for (double C : {1.05, 1.618, 2.0}) {
        const auto gm = graph_section_return_map(DomainAaH::quadratic(1.0, C), g);
        const auto sec = section_return_map(StarShapedDomain::ellipsoid(1.0, C), g.n_r, g.n_theta);
        for (int i = 1; i + 1 < g.n_r; ++i)
            for (int j = 0; j < g.n_theta; ++j) {
                const auto k = g.idx(i, j);
                angle_err = std::max({angle_err, std::abs(gm.lift.Theta[k] - (sec.theta_lift[k] + 2 * pi)),
                                      std::abs(sec.theta_lift[k] + 2 * pi - g.theta_at(j) - 2 * pi * C)});
            }
    }
    return {mismatch <= 1e-4 && angle_err <= 1e-6,
            "graph vs Hamiltonian flow " + sci(mismatch) + ", rotation 2 pi C vs Reeb section " + sci(angle_err)};
}

struct RadialDemo {
    Outcome outcome;
    std::string section_csv, pipeline_json;
};

RadialDemo radial_demo() {
    Timer t;
    const auto dom = StarShapedDomain::parse("radial:0.01");
    const auto d = section_return_map(dom, 33, 64);
    const auto lift = lift_from_section(d);
    const auto lam = section_primitive(d);
    const PolarGrid& g = lift.grid;

    double c0 = 0, diff = 0;
    for (int i = 0; i < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j) {
            const auto k = g.idx(i, j);
            const double dr = lift.R[k] - g.r_at(i), dt = lift.Theta[k] - g.theta_at(j);
            c0 = std::max({c0, std::abs(dr), std::abs(dt)});
            if (i + 1 < g.n_r) {
                const auto u = g.idx(i + 1, j);
                diff = std::max({diff, std::abs(lift.R[u] - g.r_at(i + 1) - dr),
                                 std::abs(lift.Theta[u] - g.theta_at(j) - dt)});
            }
            const auto v = g.idx(i, (j + 1) % g.n_theta);
            diff = std::max({diff, std::abs(lift.R[v] - g.r_at(i) - dr),
                             std::abs(lift.Theta[v] - g.theta_at((j + 1) % g.n_theta) - dt)});
        }

    const auto fp = fixed_points_with_actions(lift, lam);
    double min_sigma = 1e300;
    for (const auto& p : fp.points) min_sigma = std::min(min_sigma, p.sigma);

    PipelineOptions opt;
    opt.band_mode = BandMode::per_row_rotation;
    opt.n_steps = 64;
    const auto res = positive_hamiltonian_pipeline(lift_to_strip(lift), AreaDensity::from_primitive(g, lam), opt);
    const double secs = t.seconds();
    RadialDemo out;
    out.section_csv = io::section_csv(d);
    out.pipeline_json = io::to_json(res).dump(2);
    out.outcome = {c0 + diff <= 0.05 && !fp.points.empty() && min_sigma > 0 && res.min_interior > 0 && secs < 600,
                   "C0 " + sci(c0) + " + first difference " + sci(diff) + ", " + std::to_string(fp.points.size()) +
                       " fixed points (min action " + sci(min_sigma) + "), min_interior " + sci(res.min_interior) +
                       ", " + sci(secs) + " s"};
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SYMCAP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

Outcome criterion10(const Artifacts& first) {
    std::vector<std::string> differ;
    if (orbits_artifact() != first.orbits_csv) differ.push_back("orbits.csv");
    const auto demo = radial_demo();
    if (demo.section_csv != first.section_csv) differ.push_back("section.csv");
    if (demo.pipeline_json != first.pipeline_json) differ.push_back("H_report");
    const auto ball = DomainAaH::quadratic(pi, 1.0);
    if (embedding_report(ball, sandwich_check(ball), volume(ball)).dump(2) != first.certificate_json)
        differ.push_back("certificate");
    CapacityBudget budget;
    if (to_json(a_min_pipeline(StarShapedDomain::ellipsoid(1, std::sqrt(2.0)), budget)).dump(2) != first.capacity_json)
        differ.push_back("capacity");

    // the CLI end to end, twice into separate directories
    const fs::path root = fs::temp_directory_path() / "symcap_acceptance";
    fs::remove_all(root);
    const std::vector<std::pair<std::string, std::vector<std::string>>> runs = {
        {"capacity --domain ellipsoid:1,1.41421356", {"capacity.json", "spectrum.csv"}},
        {"orbits --domain ellipsoid:1,1.618", {"orbits.csv"}},
        {"section --domain radial:0.01 --grid 17x32", {"section.csv"}},
        {"construct --a 1 --C 2 --analytic quadratic --check sandwich,volume,graph", {"certificate.json"}},
        {"positivity --domain radial:0.01 --grid 33x64", {"H_report.json", "H.csv", "W.csv"}},
    };
    int failures = 0;
    for (std::size_t n = 0; n < runs.size(); ++n)
        for (const char* rep : {"a", "b"}) {
            const fs::path dir = root / (std::to_string(n) + rep);
            fs::create_directories(dir);
            if (run_cli(runs[n].first + " --out " + dir.string()) != 0) ++failures;
        }
    std::size_t compared = 0;
    for (std::size_t n = 0; n < runs.size(); ++n)
        for (const auto& f : runs[n].second) {
            const auto a = root / (std::to_string(n) + "a") / f, b = root / (std::to_string(n) + "b") / f;
            ++compared;
            if (!fs::exists(a) || slurp(a) != slurp(b)) differ.push_back(f);
        }
    fs::remove_all(root);
    std::string detail = "5 in-process artifacts and " + std::to_string(compared) + " CLI files compared";
    for (const auto& d : differ) detail += "; differs: " + d;
    if (failures) detail += "; " + std::to_string(failures) + " CLI runs failed";
    return {differ.empty() && failures == 0, detail};
}

}  // namespace

int main() {
    Artifacts art;
    int failed = 0;
    auto report = [&](int n, const char* title, const std::function<Outcome()>& f) {
        Outcome o;
        Timer t;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("%s criterion %d: %s (%s) [%.1f s]\n", o.pass ? "PASS" : "FAIL", n, title, o.detail.c_str(),
                    t.seconds());
        std::fflush(stdout);
    };

    report(1, "ellipsoid orbit recovery", [&] { return criterion1(art); });
    report(2, "index oracle on E(1,1.618)", criterion2);
    report(3, "rotation-number methods and positive arcs", criterion3);
    report(4, "action identities and Calabi additivity", criterion4);
    report(5, "generating-function round trips", criterion5);
    report(6, "positivity pipeline at 128x512", criterion6);
    report(7, "construction identities", [&] { return criterion7(art); });
    report(8, "return-map consistency", criterion8);
    report(9, "near-ball end-to-end demo", [&] {
        auto d = radial_demo();
        art.section_csv = d.section_csv;
        art.pipeline_json = d.pipeline_json;
        return d.outcome;
    });
    report(10, "determinism", [&] {
        art.capacity_json = to_json(a_min_pipeline(StarShapedDomain::ellipsoid(1, std::sqrt(2.0)), {})).dump(2);
        return criterion10(art);
    });
    std::printf("%d of 10 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
