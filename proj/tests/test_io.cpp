#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symcap/errors.hpp"
#include "symcap/genfun.hpp"
#include "symcap/io.hpp"
#include "symcap/reeb.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace symcap;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("symcap_test_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
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

}  // namespace

TEST_CASE("number formatting round-trips") {
    for (double v : {0.0, 1.0, -2.5, pi, 1e-300, 6.02214076e23, 0.1 + 0.2}) CHECK(std::stod(io::fmt(v)) == v);
    CHECK(io::fmt(0.5) == "0.5");
    CHECK(io::fmt(3.0) == "3");
}

TEST_CASE("lift csv round trip") {
    const PolarGrid g{5, 8};
    std::vector<double> R, T;
    for (int i = 0; i < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j) {
            R.push_back(g.r_at(i));
            T.push_back(g.theta_at(j) + 0.1 * i + 1.0 / 3.0);
        }
    const auto dir = scratch_dir("lift");
    io::write_text((dir / "map.csv").string(), io::lift_csv(g, R, T));
    const auto m = io::read_lift_csv((dir / "map.csv").string());
    CHECK(m.grid.n_r == 5);
    CHECK(m.grid.n_theta == 8);
    CHECK(m.R == R);
    CHECK(m.Theta == T);

    io::write_text((dir / "bad.csv").string(), "x,y\n1,2\n");
    CHECK_THROWS_AS(io::read_lift_csv((dir / "bad.csv").string()), InputError);
    CHECK_THROWS_AS(io::read_lift_csv((dir / "missing.csv").string()), InputError);
    io::write_text((dir / "short.csv").string(), "r,theta,R,Theta_lift\n0,0,0,0\n0,1,0\n");
    CHECK_THROWS_AS(io::read_lift_csv((dir / "short.csv").string()), InputError);
}

TEST_CASE("grid csv round trip") {
    const PolarGrid g{4, 6};
    std::vector<double> v;
    for (std::size_t k = 0; k < g.size(); ++k) v.push_back(std::sin(0.37 * k) / 7);
    const auto dir = scratch_dir("grid");
    io::write_text((dir / "W.csv").string(), io::grid_csv(g, v));
    const auto W = io::read_grid_csv((dir / "W.csv").string());
    CHECK(W.grid.n_r == 4);
    CHECK(W.grid.n_theta == 6);
    CHECK(W.W == v);
    io::write_text((dir / "bad.csv").string(), "n_r,n_theta\n4,6\n1,2\n");
    CHECK_THROWS_AS(io::read_grid_csv((dir / "bad.csv").string()), InputError);
}

TEST_CASE("csv headers") {
    CHECK(io::orbits_csv({}).rfind("action,period,rotation_number,cz,type,x1,y1,x2,y2", 0) == 0);
    CHECK(io::spectrum_csv({1, 2}).find('\n') != std::string::npos);
    const PolarGrid g{3, 4};
    const auto h = io::hamiltonian_csv(g, 2, std::vector<double>(2 * g.size(), 0.25));
    CHECK(h.rfind("k,i,j,H", 0) == 0);
    CHECK(std::count(h.begin(), h.end(), '\n') == 1 + 2 * static_cast<long>(g.size()));
}

TEST_CASE("pipeline json") {
    const PolarGrid g{17, 32};
    StripMap m;
    m.grid = g;
    m.monotone = true;
    for (int i = 0; i < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j) {
            m.R.push_back(g.r_at(i));
            m.Theta.push_back(g.theta_at(j) + 0.5);
        }
    PipelineOptions opt;
    opt.n_steps = 4;
    const auto res = positive_hamiltonian_pipeline(m, AreaDensity::standard_disk(g, 1.0), opt);
    const auto j = io::to_json(res);
    CHECK(j["status"] == "positive");
    CHECK(j["grid"]["n_r"] == 17);
    CHECK(j["n_t"] == 5);
    CHECK(j["conditions"]["c2"]["pass"] == true);
    CHECK(j["fixed_points"].size() == res.fixed_points.size());
}

TEST_CASE("cli exit codes") {
    const auto dir = scratch_dir("cli");
    const std::string out = " --out " + dir.string();
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("") == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("capacity --domain ellipsoid:1" + out) == 2);
    CHECK(run_cli("capacity --domain ellipsoid:1,2 --bogus 3" + out) == 2);
    CHECK(run_cli("orbits --domain ellipsoid:1,2 --seeds 4 --max-period 0.3" + out) == 3);
    CHECK(run_cli("positivity --demo negative --grid 33x64" + out) == 3);
    CHECK(slurp(dir / "H_report.json").find("hypothesis_failure") != std::string::npos);
    CHECK(run_cli("construct --a 3.141592653589793 --analytic quadratic --C 1 --check sandwich" + out) == 0);
    const auto cert = nlohmann::json::parse(slurp(dir / "certificate.json"));
    CHECK(cert["sandwich"]["contains_ball"] == true);
    CHECK(std::abs(cert["sandwich"]["worst_margin"].get<double>()) < 1e-12);
}

TEST_CASE("cli outputs are byte-identical across runs") {
    const auto a = scratch_dir("det_a"), b = scratch_dir("det_b");
    for (const auto& d : {a, b}) {
        REQUIRE(run_cli("capacity --domain ellipsoid:1,1.41421356 --seeds 16 --out " + d.string()) == 0);
        REQUIRE(run_cli("orbits --domain ellipsoid:1,2 --seeds 8 --out " + d.string()) == 0);
        REQUIRE(run_cli("section --domain radial:0.01 --grid 9x16 --out " + d.string()) == 0);
    }
    for (const char* f : {"capacity.json", "spectrum.csv", "orbits.csv", "section.csv"}) {
        CHECK(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    const auto cap = nlohmann::json::parse(slurp(a / "capacity.json"));
    CHECK(cap["A_min"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
}
