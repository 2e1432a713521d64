// symcap: command-line front end.
#include "symcap/capacities.hpp"
#include "symcap/construction.hpp"
#include "symcap/demo_maps.hpp"
#include "symcap/errors.hpp"
#include "symcap/genfun.hpp"
#include "symcap/io.hpp"
#include "symcap/parallel.hpp"
#include "symcap/reeb.hpp"
#include "symcap/section.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace symcap;

namespace {

constexpr int kOk = 0, kComputation = 1, kUsage = 2, kHypothesis = 3;

struct Grid {
    int n_r = 0, n_theta = 0;
};

Grid parse_grid(const std::string& s) {
    const auto x = s.find('x');
    Grid g;
    try {
        std::size_t p1 = 0, p2 = 0;
        if (x == std::string::npos) throw std::invalid_argument("");
        g.n_r = std::stoi(s.substr(0, x), &p1);
        g.n_theta = std::stoi(s.substr(x + 1), &p2);
        if (p1 != x || p2 != s.size() - x - 1) throw std::invalid_argument("");
    } catch (const std::exception&) {
        throw InputError("--grid expects NRxNT, got '" + s + "'");
    }
    if (g.n_r < 3 || g.n_theta < 4) throw InputError("--grid needs NR >= 3 and NT >= 4");
    return g;
}

std::string out_path(const std::string& dir, const std::string& name) {
    fs::create_directories(dir);
    return (fs::path(dir) / name).string();
}

void wrote(const std::string& path) { std::cout << "wrote " << path << "\n"; }

struct Common {
    std::string out = ".";
    std::uint64_t seed = 0x5EED;
    unsigned threads = 0;
};

// ------------------------------------------------------------ orbits

struct OrbitsArgs {
    std::string domain;
    std::size_t seeds = 64;
    double max_period = 0.0;
    double tol = 1e-10;
};

int run_orbits(const Common& c, const OrbitsArgs& a) {
    const auto dom = StarShapedDomain::parse(a.domain);
    OrbitSearchOptions o;
    o.seeds = a.seeds;
    o.max_period = a.max_period;
    o.seed = c.seed;
    o.newton_tol = a.tol;
    const auto res = find_closed_orbits(dom, o);
    const auto path = out_path(c.out, "orbits.csv");
    io::write_text(path, io::orbits_csv(res.orbits));
    wrote(path);
    for (const auto& o2 : res.orbits)
        std::cout << "orbit action " << io::fmt(o2.action) << " cz " << o2.cz_index << " "
                  << orbit_type_name(o2.type) << "\n";
    for (const auto& d : res.diagnostics) std::cerr << "note: " << d << "\n";
    if (res.orbits.empty()) {
        std::cerr << "inconclusive: no closed orbit found with " << a.seeds << " seeds\n";
        return kHypothesis;
    }
    return kOk;
}

// ------------------------------------------------------------ section

struct SectionArgs {
    std::string domain;
    std::string grid = "17x32";
    double tol = 1e-10;
};

int run_section(const Common& c, const SectionArgs& a) {
    const auto dom = StarShapedDomain::parse(a.domain);
    const auto g = parse_grid(a.grid);
    SectionOptions so;
    so.bisection_tol = a.tol;
    const auto d = section_return_map(dom, g.n_r, g.n_theta, so);
    const auto path = out_path(c.out, "section.csv");
    io::write_text(path, io::section_csv(d));
    wrote(path);
    std::cout << "boundary action " << io::fmt(d.boundary_action) << "\n";
    std::cout << "binding rotation " << io::fmt(d.binding_rotation) << "\n";
    if (!(d.binding_rotation > 0.0))
        std::cerr << "warning: binding rotation is not positive; the page may not stay a section after blow-up\n";
    return kOk;
}

// ------------------------------------------------------------ genfun

struct GenfunArgs {
    std::string input;
    bool inverse = false;
    std::string grid = "97x256";
    double a = std::numbers::pi;
    double tol = 1e-4;
    std::uint64_t map_seed = 0;
};

AreaDensity disk_density(const PolarGrid& g, double area) {
    if (!(area > 0.0)) throw InputError("--a must be positive");
    return AreaDensity::standard_disk(g, std::sqrt(area / std::numbers::pi));
}

StripMap demo_strip(const Grid& gr, std::uint64_t seed) {
    FlowOptions fo;
    fo.steps = 128;
    return lift_to_strip(flow_from_hamiltonian(demo_twist_hamiltonian(seed), PolarGrid{gr.n_r, gr.n_theta}, 1.0, fo));
}

int run_genfun(const Common& c, const GenfunArgs& a) {
    GenFunOptions go;
    go.curl_tol = a.tol;
    go.area_tol = a.tol;
    if (a.inverse) {
        if (a.input.empty()) throw InputError("--inverse needs --input W.csv");
        const auto W = io::read_grid_csv(a.input);
        const auto F = disk_density(W.grid, a.a);
        const auto phi = stripmap_from_genfun(W, F);
        const auto path = out_path(c.out, "map.csv");
        io::write_text(path, io::lift_csv(phi.grid, phi.R, phi.Theta));
        wrote(path);
        return kOk;
    }
    StripMap phi;
    double area = a.a;
    if (a.input.empty()) {
        phi = demo_strip(parse_grid(a.grid), a.map_seed);
        area = std::numbers::pi;
    } else {
        phi = io::read_lift_csv(a.input);
    }
    const auto F = disk_density(phi.grid, area);
    double curl = 0.0;
    const auto W = genfun_from_stripmap(phi, F, go, &curl);
    const auto back = stripmap_from_genfun(W, F);
    double err = 0.0;
    for (std::size_t k = 0; k < phi.R.size(); ++k)
        err = std::max({err, std::abs(back.R[k] - phi.R[k]), std::abs(back.Theta[k] - phi.Theta[k])});
    const auto path = out_path(c.out, "W.csv");
    io::write_text(path, io::grid_csv(W.grid, W.W));
    wrote(path);
    std::cout << "mixed-partial defect " << io::fmt(curl) << "\nround-trip error " << io::fmt(err) << "\n";
    for (const auto& p : critical_points(W))
        std::cout << "critical point r " << io::fmt(p.r) << " theta " << io::fmt(p.theta) << " W " << io::fmt(p.value)
                  << "\n";
    return kOk;
}

// ------------------------------------------------------------ positivity

struct PositivityArgs {
    std::string input;
    std::string domain;
    std::string demo = "twist";
    std::string grid;
    std::string band_mode;
    int steps = 64;
    double a = std::numbers::pi;
    double tol = 1e-5;
    double band_tol = 1e-8;
    std::uint64_t map_seed = 0;
};

int run_positivity(const Common& c, const PositivityArgs& a) {
    StripMap phi;
    std::optional<AreaDensity> F;
    BandMode mode = BandMode::translation;
    if (!a.domain.empty()) {
        const auto dom = StarShapedDomain::parse(a.domain);
        const auto g = parse_grid(a.grid.empty() ? "33x64" : a.grid);
        const auto d = section_return_map(dom, g.n_r, g.n_theta);
        const auto lift = lift_from_section(d);
        phi = lift_to_strip(lift);
        F = AreaDensity::from_primitive(lift.grid, section_primitive(d));
        mode = BandMode::per_row_rotation;
    } else if (!a.input.empty()) {
        phi = io::read_lift_csv(a.input);
        F = disk_density(phi.grid, a.a);
    } else {
        const auto g = parse_grid(a.grid.empty() ? "65x128" : a.grid);
        const PolarGrid pg{g.n_r, g.n_theta};
        HamiltonianPtr H;
        if (a.demo == "twist") H = demo_twist_hamiltonian(a.map_seed);
        else if (a.demo == "negative") H = demo_negative_hamiltonian();
        else throw InputError("--demo must be twist or negative");
        FlowOptions fo;
        fo.steps = 128;
        phi = lift_to_strip(flow_from_hamiltonian(H, pg, 1.0, fo));
        F = AreaDensity::standard_disk(pg, 1.0);
    }
    if (a.band_mode == "translation") mode = BandMode::translation;
    else if (a.band_mode == "per-row") mode = BandMode::per_row_rotation;
    else if (!a.band_mode.empty()) throw InputError("--band-mode must be translation or per-row");

    PipelineOptions po;
    po.n_steps = a.steps;
    po.band_mode = mode;
    po.identity_tol = a.tol;
    po.band_tol = a.band_tol;
    const auto report = out_path(c.out, "H_report.json");
    try {
        const auto r = positive_hamiltonian_pipeline(phi, *F, po);
        io::write_json(report, io::to_json(r));
        wrote(report);
        const auto hp = out_path(c.out, "H.csv");
        io::write_text(hp, io::hamiltonian_csv(r.W.grid, r.n_t, r.H));
        wrote(hp);
        const auto wp = out_path(c.out, "W.csv");
        io::write_text(wp, io::grid_csv(r.W.grid, r.W.W));
        wrote(wp);
        std::cout << "min_interior " << io::fmt(r.min_interior) << "\n";
        return kOk;
    } catch (const HypothesisError& e) {
        io::write_json(report, {{"status", "hypothesis_failure"}, {"module", e.module()}, {"message", e.what()}});
        wrote(report);
        throw;
    }
}

// ------------------------------------------------------------ construct

struct ConstructArgs {
    std::string input;
    std::optional<double> a;
    double C = 1.0;
    std::string analytic;
    double collar = 0.9;
    std::vector<std::string> checks{"sandwich", "volume"};
    std::uint64_t samples = 100000;
    std::uint64_t mc_samples = 1000000;
    std::string grid = "17x32";
    double tol = 1e-4;
};

int run_construct(const Common& c, const ConstructArgs& a) {
    std::optional<DomainAaH> dom;
    if (!a.input.empty()) {
        if (a.a || !a.analytic.empty()) throw InputError("--input excludes --a and --analytic");
        dom = DomainAaH::from_file(a.input);
    } else {
        if (!a.a) throw InputError("construct needs --a (or --input SPEC.json)");
        if (a.analytic != "quadratic") throw InputError("--analytic must be 'quadratic'");
        dom = DomainAaH::quadratic(*a.a, a.C, a.collar);
    }
    bool sandwich = false, volume_on = false, graph = false;
    for (const auto& k : a.checks) {
        if (k == "sandwich") sandwich = true;
        else if (k == "volume") volume_on = true;
        else if (k == "graph") graph = true;
        else throw InputError("--check accepts sandwich, volume, graph; got '" + k + "'");
    }
    SandwichOptions so;
    so.samples = sandwich ? a.samples : 0;
    so.seed = c.seed;
    const auto sw = sandwich_check(*dom, so);
    VolumeReport vr;
    if (volume_on) {
        VolumeOptions vo;
        vo.mc_samples = a.mc_samples;
        vo.seed = c.seed;
        vr = volume(*dom, vo);
    } else {
        vr.quadrature = volume_quadrature(*dom);
    }
    auto cert = embedding_report(*dom, sw, vr);
    cert["checks"] = a.checks;
    if (graph) {
        const auto g = parse_grid(a.grid);
        GraphFlowOptions gf;
        gf.tolerance = a.tol;
        const auto gm = graph_section_return_map(*dom, PolarGrid{g.n_r, g.n_theta}, gf);
        cert["graph_flow"] = {{"max_mismatch", gm.max_mismatch},
                              {"max_graph_drift", gm.max_graph_drift},
                              {"center_rotation", gm.lift.Theta[0]}};
    }
    const auto path = out_path(c.out, "certificate.json");
    io::write_json(path, cert);
    wrote(path);
    std::cout << "contains_ball " << (sw.contains_ball ? "true" : "false") << " worst_margin "
              << io::fmt(sw.worst_margin) << "\n";
    return kOk;
}

// ------------------------------------------------------------ capacity

struct CapacityArgs {
    std::string domain;
    std::size_t seeds = 64;
    std::size_t max_seeds = 256;
    double max_period = 0.0;
    std::uint64_t samples = 1000000;
    int spectrum = 10;
};

int run_capacity(const Common& c, const CapacityArgs& a) {
    const auto dom = StarShapedDomain::parse(a.domain);
    CapacityBudget b;
    b.initial_seeds = a.seeds;
    b.max_seeds = std::max(a.max_seeds, a.seeds);
    b.max_period = a.max_period;
    b.seed = c.seed;
    b.volume_samples = a.samples;
    const auto rep = a_min_pipeline(dom, b);
    auto j = to_json(rep);
    j["domain"] = dom.to_json();
    const auto path = out_path(c.out, "capacity.json");
    io::write_json(path, j);
    wrote(path);
    if (dom.is_quadratic()) {
        const auto w = dom.quadratic_weights();
        const auto oracle = ellipsoid_oracle(std::numbers::pi / w[0], std::numbers::pi / w[1], a.spectrum);
        const auto sp = out_path(c.out, "spectrum.csv");
        io::write_text(sp, io::spectrum_csv(oracle.spectrum));
        wrote(sp);
    }
    if (!rep.A_min) {
        std::cerr << "inconclusive: no closed orbit within " << rep.seeds_used << " seeds\n";
        return kHypothesis;
    }
    std::cout << "A_min " << io::fmt(*rep.A_min) << " (" << rep.status << ")\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical toolkit for Reeb dynamics, surfaces of section, generating functions and capacities"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--out", common.out, "Output directory")->capture_default_str();
    app.add_option("--seed", common.seed, "Random seed (orbit seeds, Monte Carlo, demo maps)")->capture_default_str();
    app.add_option("--threads", common.threads, "Worker thread cap (0 = hardware)")->capture_default_str();

    auto* orbits = app.add_subcommand("orbits", "Closed Reeb orbits with invariants -> orbits.csv");
    OrbitsArgs oa;
    orbits->add_option("--domain", oa.domain, "ellipsoid:a,b | ball:a | radial:eps | spec.json")->required();
    orbits->add_option("--seeds", oa.seeds, "Number of shooting seeds")->capture_default_str()->check(CLI::PositiveNumber);
    orbits->add_option("--max-period", oa.max_period, "Longest integration time (0 = automatic)")->capture_default_str();
    orbits->add_option("--tol", oa.tol, "Newton tolerance for orbit refinement")->capture_default_str()->check(CLI::PositiveNumber);

    auto* section = app.add_subcommand("section", "First return map of the disk-like section -> section.csv");
    SectionArgs sa;
    section->add_option("--domain", sa.domain, "Domain spec")->required();
    section->add_option("--grid", sa.grid, "Polar grid NRxNT")->capture_default_str();
    section->add_option("--tol", sa.tol, "Return-time bisection tolerance")->capture_default_str()->check(CLI::PositiveNumber);

    auto* genfun = app.add_subcommand("genfun", "Strip map <-> generating function -> W.csv or map.csv");
    GenfunArgs ga;
    genfun->add_option("--input", ga.input, "Lift CSV (r,theta,R,Theta_lift), or W.csv with --inverse");
    genfun->add_flag("--inverse", ga.inverse, "Rebuild the strip map from a W grid");
    genfun->add_option("--grid", ga.grid, "Grid for the built-in demo map")->capture_default_str();
    genfun->add_option("--map-seed", ga.map_seed, "Demo map seed (0 = reference map)")->capture_default_str();
    genfun->add_option("--a", ga.a, "Disk area for CSV inputs")->capture_default_str();
    genfun->add_option("--tol", ga.tol, "Area and mixed-partial tolerance")->capture_default_str()->check(CLI::PositiveNumber);

    auto* positivity = app.add_subcommand("positivity", "Positive Hamiltonian extraction -> H_report.json, H.csv, W.csv");
    PositivityArgs pa;
    positivity->add_option("--input", pa.input, "Lift CSV of a strip map");
    positivity->add_option("--domain", pa.domain, "Use the section return map of this domain");
    positivity->add_option("--demo", pa.demo, "Built-in map: twist | negative")->capture_default_str();
    positivity->add_option("--grid", pa.grid, "Polar grid NRxNT (33x64 for --domain, 65x128 for demos)");
    positivity->add_option("--band-mode", pa.band_mode, "translation | per-row (default: per-row for --domain)");
    positivity->add_option("--steps", pa.steps, "Time steps of the isotopy")->capture_default_str()->check(CLI::Range(3, 100000));
    positivity->add_option("--a", pa.a, "Disk area for CSV inputs")->capture_default_str();
    positivity->add_option("--tol", pa.tol, "Identity tolerance on critical points")->capture_default_str()->check(CLI::PositiveNumber);
    positivity->add_option("--band-tol", pa.band_tol, "Boundary band tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    positivity->add_option("--map-seed", pa.map_seed, "Demo map seed (0 = reference map)")->capture_default_str();
    positivity->get_option("--input")->excludes(positivity->get_option("--domain"));

    auto* construct = app.add_subcommand("construct", "Domain A(a,H): sandwich, volume, certificate.json");
    ConstructArgs ca;
    double a_value = 0.0;
    auto* a_opt = construct->add_option("--a", a_value, "Width a");
    construct->add_option("--C", ca.C, "Boundary constant C")->capture_default_str()->check(CLI::PositiveNumber);
    construct->add_option("--analytic", ca.analytic, "Analytic Hamiltonian: quadratic");
    construct->add_option("--input", ca.input, "Hamiltonian spec JSON");
    construct->add_option("--collar", ca.collar, "Collar level")->capture_default_str();
    construct->add_option("--check", ca.checks, "Checks: sandwich,volume,graph")->delimiter(',')->capture_default_str();
    construct->add_option("--samples", ca.samples, "Sandwich membership samples")->capture_default_str();
    construct->add_option("--mc-samples", ca.mc_samples, "Monte Carlo volume samples")->capture_default_str()->check(CLI::PositiveNumber);
    construct->add_option("--grid", ca.grid, "Grid for the graph-flow check")->capture_default_str();
    construct->add_option("--tol", ca.tol, "Graph flow vs Hamiltonian flow tolerance")->capture_default_str()->check(CLI::PositiveNumber);

    auto* capacity = app.add_subcommand("capacity", "A_min estimate, bounds, Viterbo quantities -> capacity.json");
    CapacityArgs cpa;
    capacity->add_option("--domain", cpa.domain, "Domain spec")->required();
    capacity->add_option("--seeds", cpa.seeds, "Initial number of seeds")->capture_default_str()->check(CLI::PositiveNumber);
    capacity->add_option("--max-seeds", cpa.max_seeds, "Seed budget")->capture_default_str();
    capacity->add_option("--max-period", cpa.max_period, "Longest integration time (0 = automatic)")->capture_default_str();
    capacity->add_option("--samples", cpa.samples, "Monte Carlo volume samples")->capture_default_str()->check(CLI::PositiveNumber);
    capacity->add_option("--spectrum", cpa.spectrum, "Ellipsoid spectrum length")->capture_default_str()->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        set_thread_count(common.threads);
        if (*orbits) return run_orbits(common, oa);
        if (*section) return run_section(common, sa);
        if (*genfun) return run_genfun(common, ga);
        if (*positivity) return run_positivity(common, pa);
        if (*construct) {
            if (a_opt->count()) ca.a = a_value;
            return run_construct(common, ca);
        }
        if (*capacity) return run_capacity(common, cpa);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kUsage;
    } catch (const HypothesisError& e) {
        std::cerr << "hypothesis failure in " << e.what() << "\n";
        return kHypothesis;
    } catch (const ComputationError& e) {
        std::cerr << "computation error in " << e.what() << "\n";
        return kComputation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kComputation;
    }
    return kUsage;
}
