#include "symcap/construction.hpp"

#include "symcap/errors.hpp"
#include "symcap/interp.hpp"
#include "symcap/parallel.hpp"
#include "symcap/rng.hpp"
#include "symcap/simd.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace symcap {

using std::numbers::pi;

namespace {

constexpr const char* kModule = "domain_construction";
constexpr double kCenterOffset = 1e-6;

std::string fmt_node(int k, int i, int j) {
    std::ostringstream os;
    os << "node (t=" << k << ", r=" << i << ", theta=" << j << ")";
    return os.str();
}

HamiltonianPtr read_grid_hamiltonian(double radius, const nlohmann::json& grid, const std::string& path) {
    const int nr = grid.at("nr").get<int>(), nt = grid.at("nt").get<int>(), nth = grid.at("ntheta").get<int>();
    if (nr < 3 || nt < 1 || nth < 4) throw InputError("hamiltonian grid too small");
    std::ifstream in(path);
    if (!in) throw InputError("cannot open Hamiltonian values file " + path);
    std::vector<double> values(static_cast<std::size_t>(nt) * nr * nth, std::numeric_limits<double>::quiet_NaN());
    std::string line;
    std::getline(in, line);  // header k,i,j,H
    std::size_t count = 0, lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string f[4];
        for (auto& s : f)
            if (!std::getline(ls, s, ',')) throw InputError(path + ":" + std::to_string(lineno) + ": expected k,i,j,H");
        int k, i, j;
        double v;
        try {
            k = std::stoi(f[0]);
            i = std::stoi(f[1]);
            j = std::stoi(f[2]);
            v = std::stod(f[3]);
        } catch (const std::exception&) {
            throw InputError(path + ":" + std::to_string(lineno) + ": malformed number");
        }
        if (k < 0 || k >= nt || i < 0 || i >= nr || j < 0 || j >= nth)
            throw InputError(path + ":" + std::to_string(lineno) + ": index out of range");
        values[(static_cast<std::size_t>(k) * nr + i) * nth + j] = v;
        ++count;
    }
    if (count != values.size())
        throw InputError(path + ": expected " + std::to_string(values.size()) + " values, got " + std::to_string(count));
    return std::make_shared<GridHamiltonian>(radius, PolarGrid{nr, nth}, nt, true, std::move(values));
}

}  // namespace

double DomainAaH::radius() const { return std::sqrt(a_ / pi); }

DomainAaH::CheckGrid DomainAaH::check_grid() const {
    // Sampled H: 4x refinement, so the checks also see the interpolant between nodes.
    if (auto g = std::dynamic_pointer_cast<const GridHamiltonian>(H_))
        return {4 * g->n_t(), PolarGrid{4 * (g->grid().n_r - 1) + 1, 4 * g->grid().n_theta}};
    return {opt_.n_t, PolarGrid{opt_.n_r, opt_.n_theta}};
}

DomainAaH DomainAaH::build(double a, HamiltonianPtr H, double C, double collar, const BuildOptions& opt) {
    if (!(a > 0.0)) throw InputError("width a must be positive");
    if (!(C > 0.0)) throw InputError("boundary constant C must be positive");
    if (!(collar > 0.0 && collar < 1.0)) throw InputError("collar must lie in (0,1)");
    if (!H) throw InputError("missing Hamiltonian");
    DomainAaH d;
    d.a_ = a;
    d.C_ = C;
    d.collar_ = collar;
    d.H_ = std::move(H);
    d.opt_ = opt;
    const double s = d.radius();
    if (std::abs(d.H_->radius() - s) > 1e-12 * s)
        throw InputError("Hamiltonian radius does not match sqrt(a/pi)");

    const auto cg = d.check_grid();
    const auto& g = cg.grid;
    const double tol = opt.collar_tol * std::max(1.0, C * a);
    for (int k = 0; k < cg.n_t; ++k) {
        const double t = static_cast<double>(k) / cg.n_t;
        for (int i = 0; i < g.n_r; ++i) {
            const double r = g.r_at(i);
            for (int j = 0; j < g.n_theta; ++j) {
                const double th = g.theta_at(j);
                const double v = d.H_->value(t, s * r * std::cos(th), s * r * std::sin(th));
                d.max_H_ = std::max(d.max_H_, v);
                if (i < g.n_r - 1 && !(v > 0.0))
                    throw HypothesisError(kModule, "H is not positive at " + fmt_node(k, i, j) + " (H = " +
                                                       std::to_string(v) + ")");
                if (r * r >= collar) {
                    const double want = C * (a - pi * s * s * r * r);
                    if (std::abs(v - want) > tol)
                        throw HypothesisError(kModule, "collar form C(a - pi|z|^2) fails at " + fmt_node(k, i, j));
                }
            }
        }
    }
    if (auto gh = std::dynamic_pointer_cast<const GridHamiltonian>(d.H_); gh && !gh->periodic_in_t()) {
        const std::size_t n = gh->grid().size();
        const auto& v = gh->values();
        for (std::size_t q = 0; q < n; ++q)
            if (std::abs(v[q] - v[(gh->n_t() - 1) * n + q]) > tol)
                throw HypothesisError(kModule, "H is not periodic in t");
    }
    return d;
}

DomainAaH DomainAaH::quadratic(double a, double C, double collar) {
    if (!(a > 0.0) || !(C > 0.0)) throw InputError("quadratic domain needs a > 0 and C > 0");
    auto d = build(a, make_rotation_hamiltonian(std::sqrt(a / pi), 2.0 * pi * C), C, collar);
    d.quadratic_ = true;
    d.spec_ = {{"a", a}, {"C", C}, {"collar", collar}, {"analytic", "quadratic"}};
    return d;
}

DomainAaH DomainAaH::from_json(const nlohmann::json& j, const std::string& base_dir) {
    static const char* known[] = {"a", "C", "collar", "analytic", "bumps", "grid", "values"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return it.key() == k; }) ==
            std::end(known))
            throw InputError("unknown key '" + it.key() + "' in Hamiltonian spec");
    try {
        const double a = j.at("a").get<double>();
        const double C = j.value("C", 1.0);
        const double collar = j.value("collar", 0.9);
        if (!(a > 0.0) || !(C > 0.0)) throw InputError("Hamiltonian spec needs a > 0 and C > 0");
        const double s = std::sqrt(a / pi);
        if (j.contains("analytic")) {
            if (j.at("analytic").get<std::string>() != "quadratic")
                throw InputError("only the 'quadratic' analytic Hamiltonian is available");
            if (!j.contains("bumps") || j.at("bumps").empty()) {
                auto d = quadratic(a, C, collar);
                d.spec_ = j;
                return d;
            }
            HamiltonianPtr H = make_rotation_hamiltonian(s, 2.0 * pi * C);
            for (const auto& b : j.at("bumps")) {
                AngularMode m;
                m.amp = b.at("amp").get<double>();
                m.k = b.value("k", 0);
                m.phase = b.value("phase", 0.0);
                m.m = b.value("m", 0);
                const double r0 = b.value("r0", 0.0), r1 = b.value("r1", 0.6);
                if (r1 * r1 > collar) throw InputError("bump support reaches into the collar");
                H = make_sum_hamiltonian(H, make_annular_perturbation(s, r0, r1, {m}));
            }
            auto d = build(a, H, C, collar);
            d.spec_ = j;
            return d;
        }
        if (j.contains("grid")) {
            std::filesystem::path p = j.at("values").get<std::string>();
            if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
            auto d = build(a, read_grid_hamiltonian(s, j.at("grid"), p.string()), C, collar);
            d.spec_ = j;
            return d;
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("Hamiltonian spec: ") + e.what());
    }
    throw InputError("Hamiltonian spec needs 'analytic' or 'grid'");
}

DomainAaH DomainAaH::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open Hamiltonian spec " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    return from_json(j, std::filesystem::path(path).parent_path().string());
}

nlohmann::json DomainAaH::describe() const { return spec_; }

bool DomainAaH::contains(const Point4& p) const {
    const double z1 = p[0] * p[0] + p[1] * p[1];
    if (pi * z1 > a_) return false;
    const double z2 = p[2] * p[2] + p[3] * p[3];
    if (z2 == 0.0) return true;
    double t = std::atan2(p[3], p[2]) / (2.0 * pi);
    if (t < 0.0) t += 1.0;
    if (t >= 1.0) t -= 1.0;
    return pi * z2 <= H_->value(t, p[0], p[1]);
}

// ------------------------------------------------------------ sandwich

SandwichReport sandwich_check(const DomainAaH& dom, const SandwichOptions& opt) {
    SandwichReport rep;
    rep.samples = opt.samples;
    const double a = dom.a(), s = dom.radius();

    // Pointwise H >= a - pi|z|^2 on the check grid.
    const auto cg = dom.check_grid();
    rep.worst_margin = std::numeric_limits<double>::infinity();
    double wt = 0, wx = 0, wy = 0;
    for (int k = 0; k < cg.n_t; ++k) {
        const double t = static_cast<double>(k) / cg.n_t;
        for (int i = 0; i < cg.grid.n_r; ++i)
            for (int j = 0; j < cg.grid.n_theta; ++j) {
                const double r = cg.grid.r_at(i), th = cg.grid.theta_at(j);
                const double x = s * r * std::cos(th), y = s * r * std::sin(th);
                const double m = dom.H(t, x, y) - (a - pi * (x * x + y * y));
                if (m < rep.worst_margin) {
                    rep.worst_margin = m;
                    wt = t;
                    wx = x;
                    wy = y;
                }
            }
    }
    const bool pointwise = rep.worst_margin >= -opt.pointwise_tol * a;

    // Sampling: cylinder self-test on the bounding box, ball membership on B(a).
    const double m = std::sqrt(std::max(dom.max_H(), 0.0) / pi) * 1.05;
    const std::uint64_t n = opt.samples;
    const std::size_t blocks = 64;
    std::vector<std::uint64_t> hits(blocks, 0), cyl(blocks, 0), ball(blocks, 0);
    parallel_for(blocks, [&](std::size_t b) {
        const std::uint64_t lo = n * b / blocks, hi = n * (b + 1) / blocks;
        for (std::uint64_t q = lo; q < hi; ++q) {
            Point4 p{(2 * counter_uniform(opt.seed, 8 * q) - 1) * s, (2 * counter_uniform(opt.seed, 8 * q + 1) - 1) * s,
                     (2 * counter_uniform(opt.seed, 8 * q + 2) - 1) * m, (2 * counter_uniform(opt.seed, 8 * q + 3) - 1) * m};
            if (dom.contains(p)) {
                ++hits[b];
                if (pi * (p[0] * p[0] + p[1] * p[1]) > a) ++cyl[b];
            }
            // uniform point of the 4-ball of radius s
            CounterRng rng(opt.seed ^ 0xB411ull, 8 * q);
            Point4 u{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
            const double len = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2] + u[3] * u[3]);
            const double rad = s * std::pow(rng.uniform(), 0.25) / len;
            for (double& c : u) c *= rad;
            if (!dom.contains(u)) ++ball[b];
        }
    });
    for (std::size_t b = 0; b < blocks; ++b) {
        rep.domain_hits += hits[b];
        rep.cylinder_violations += cyl[b];
        rep.ball_violations += ball[b];
    }
    rep.subset_cylinder = rep.cylinder_violations == 0;
    if (!rep.subset_cylinder)
        throw ComputationError(kModule, "membership violates the cylinder bound on " +
                                            std::to_string(rep.cylinder_violations) + " samples");

    if (pointwise && rep.ball_violations > 0)
        throw ComputationError(kModule, "pointwise test says B(a) fits but " + std::to_string(rep.ball_violations) +
                                            " sampled ball points lie outside");
    if (!pointwise) {
        // The worst node gives a point of B(a) that must fall outside A(a, H).
        const double z2 = std::sqrt(std::max(a - pi * (wx * wx + wy * wy), 0.0) / pi);
        const Point4 witness{wx, wy, z2 * std::cos(2 * pi * wt), z2 * std::sin(2 * pi * wt)};
        if (dom.contains(witness))
            throw ComputationError(kModule, "pointwise test fails but its witness point lies inside the domain");
    }
    rep.contains_ball = pointwise;
    return rep;
}

// ------------------------------------------------------------ volume

double volume_quadrature(const DomainAaH& dom) {
    const double s = dom.radius();
    int n_t = 16, n_r = 129, n_th = 64;
    if (auto g = std::dynamic_pointer_cast<const GridHamiltonian>(dom.hamiltonian())) {
        n_t = g->n_t() - (g->periodic_in_t() ? 0 : 1);
        n_r = g->grid().n_r;
        n_th = g->grid().n_theta;
        if (n_r % 2 == 0) ++n_r;
    } else if (!dom.is_quadratic()) {
        n_t = 32;
        n_r = 257;
        n_th = 128;
    }
    const double hr = 1.0 / (n_r - 1);
    auto w = interp::simpson_weights(n_r, hr);
    for (int i = 0; i < n_r; ++i) w[i] *= s * s * (i * hr);
    std::vector<double> total(static_cast<std::size_t>(n_t) * n_th);
    parallel_for(total.size(), [&](std::size_t q) {
        const int k = static_cast<int>(q / n_th), j = static_cast<int>(q % n_th);
        const double t = static_cast<double>(k) / n_t, th = 2.0 * pi * j / n_th;
        std::vector<double> v(n_r);
        for (int i = 0; i < n_r; ++i) v[i] = dom.H(t, s * i * hr * std::cos(th), s * i * hr * std::sin(th));
        total[q] = simd::weighted_sum(w.data(), v.data(), v.size());
    });
    double sum = 0.0;
    for (double v : total) sum += v;
    return sum * (2.0 * pi / n_th) / n_t;
}

VolumeReport volume(const DomainAaH& dom, const VolumeOptions& opt) {
    VolumeReport rep;
    rep.quadrature = volume_quadrature(dom);
    const std::uint64_t n = opt.mc_samples;
    if (n == 0) throw InputError("Monte Carlo volume needs samples");
    double box = 0.0, p = 0.0;
    if (dom.is_quadratic()) {
        const double a = dom.a(), C = dom.C();
        const double h = std::max(dom.radius(), std::sqrt(C * a / pi));
        const auto hits = simd::count_quadratic_hits(opt.seed, 0, n, h, pi / a, pi / (C * a));
        box = std::pow(2.0 * h, 4);
        p = static_cast<double>(hits) / n;
    } else {
        const double s = dom.radius(), m = std::sqrt(std::max(dom.max_H(), 0.0) / pi) * 1.05;
        const std::size_t blocks = 64;
        std::vector<std::uint64_t> hits(blocks, 0);
        parallel_for(blocks, [&](std::size_t b) {
            const std::uint64_t lo = n * b / blocks, hi = n * (b + 1) / blocks;
            for (std::uint64_t q = lo; q < hi; ++q) {
                const Point4 x{(2 * counter_uniform(opt.seed, 4 * q) - 1) * s,
                               (2 * counter_uniform(opt.seed, 4 * q + 1) - 1) * s,
                               (2 * counter_uniform(opt.seed, 4 * q + 2) - 1) * m,
                               (2 * counter_uniform(opt.seed, 4 * q + 3) - 1) * m};
                if (dom.contains(x)) ++hits[b];
            }
        });
        std::uint64_t total = 0;
        for (auto h : hits) total += h;
        box = 16.0 * s * s * m * m;
        p = static_cast<double>(total) / n;
    }
    rep.monte_carlo = p * box;
    rep.mc_std_error = box * std::sqrt(p * (1.0 - p) / n);
    rep.relative_difference = std::abs(rep.monte_carlo - rep.quadrature) / rep.quadrature;
    if (rep.relative_difference > opt.agreement)
        throw ComputationError(kModule, "quadrature volume " + std::to_string(rep.quadrature) +
                                            " and Monte Carlo volume " + std::to_string(rep.monte_carlo) +
                                            " disagree");
    return rep;
}

// ------------------------------------------------------------ graph flow

GraphReturnMap graph_section_return_map(const DomainAaH& dom, const PolarGrid& grid, const GraphFlowOptions& opt) {
    if (opt.steps < 1) throw InputError("graph flow needs at least one step");
    const auto& H = *dom.hamiltonian();
    const double s = dom.radius();
    // (s, x, y) with t as the flow parameter: ds/dt = dH/dt, dz/dt = X_{H_t}.
    auto field = [&](double t, const std::array<double, 3>& u) {
        const auto g = H.gradient(t, u[1], u[2]);
        const double e = 1e-5;
        const double t0 = std::clamp(t - e, 0.0, 1.0 - 2 * e), t1 = t0 + 2 * e;
        const double dHdt = (H.value(t1, u[1], u[2]) - H.value(t0, u[1], u[2])) / (t1 - t0);
        return std::array<double, 3>{dHdt, g[1], -g[0]};
    };
    struct End {
        double x, y, angle, drift;
    };
    // Steps land on the Hamiltonian's kinks in t.
    std::vector<double> knots{0.0};
    for (double b : H.breakpoints())
        if (b > 0.0 && b < 1.0) knots.push_back(b);
    knots.push_back(1.0);
    auto run = [&](double x, double y) {
        std::array<double, 3> u{H.value(0.0, x, y), x, y};
        double angle = 0.0, drift = 0.0;
        auto add = [](const std::array<double, 3>& a, const std::array<double, 3>& b, double c) {
            return std::array<double, 3>{a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]};
        };
        for (std::size_t seg = 0; seg + 1 < knots.size(); ++seg) {
            const double len = knots[seg + 1] - knots[seg];
            const int n = std::max(1, static_cast<int>(std::ceil(len * opt.steps - 1e-9)));
            const double h = len / n;
            for (int k = 0; k < n; ++k) {
                const double t = knots[seg] + k * h;
                const auto k1 = field(t, u);
                const auto k2 = field(t + 0.5 * h, add(u, k1, 0.5 * h));
                const auto k3 = field(t + 0.5 * h, add(u, k2, 0.5 * h));
                const auto k4 = field(t + h, add(u, k3, h));
                std::array<double, 3> nu;
                for (int c = 0; c < 3; ++c) nu[c] = u[c] + h / 6.0 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
                angle += std::atan2(u[1] * nu[2] - u[2] * nu[1], u[1] * nu[1] + u[2] * nu[2]);
                u = nu;
                drift = std::max(drift, std::abs(u[0] - H.value(t + h, u[1], u[2])));
            }
        }
        return End{u[1], u[2], angle, drift};
    };

    GraphReturnMap out;
    auto& L = out.lift;
    L.grid = grid;
    L.area = dom.a();
    L.provenance = Provenance::hamiltonian_isotopy;
    L.hamiltonian = dom.hamiltonian();
    L.t_end = 1.0;
    L.flow_steps = opt.steps;
    L.R.assign(grid.size(), 0.0);
    L.Theta.assign(grid.size(), 0.0);
    out.return_time.assign(grid.size(), 1.0);
    std::vector<double> drift(grid.size(), 0.0), ex(grid.size()), ey(grid.size());
    const auto center = run(0.0, 0.0);
    parallel_for(grid.size(), [&](std::size_t k) {
        const int i = static_cast<int>(k / grid.n_theta), j = static_cast<int>(k % grid.n_theta);
        const double th = grid.theta_at(j), r = i == 0 ? kCenterOffset : grid.r_at(i);
        const auto e = run(s * r * std::cos(th), s * r * std::sin(th));
        const auto& p = i == 0 ? center : e;
        L.R[k] = std::min(std::hypot(p.x, p.y) / s, 1.0);
        L.Theta[k] = th + e.angle;
        ex[k] = p.x;
        ey[k] = p.y;
        drift[k] = e.drift;
    });
    for (double d : drift) out.max_graph_drift = std::max(out.max_graph_drift, d);

    FlowOptions fo;
    fo.steps = opt.reference_steps;
    const auto ref = flow_from_hamiltonian(dom.hamiltonian(), grid, 1.0, fo);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double rx = s * ref.R[k] * std::cos(ref.Theta[k]), ry = s * ref.R[k] * std::sin(ref.Theta[k]);
        out.max_mismatch = std::max({out.max_mismatch, std::abs(rx - ex[k]), std::abs(ry - ey[k]),
                                     std::abs(ref.Theta[k] - L.Theta[k]) * s * ref.R[k]});
    }
    if (out.max_mismatch > opt.tolerance)
        throw ComputationError(kModule, "graph characteristic flow and Hamiltonian flow differ by " +
                                            std::to_string(out.max_mismatch));
    return out;
}

// ------------------------------------------------------------ certificate

nlohmann::json embedding_report(const DomainAaH& dom, const SandwichReport& sw, const VolumeReport& vol) {
    const double a = dom.a();
    nlohmann::json j;
    j["a"] = a;
    j["C"] = dom.C();
    j["hamiltonian"] = dom.describe();
    j["cZ_upper_bound"] = a;
    j["ball_lower_bound"] = sw.contains_ball ? nlohmann::json(a) : nlohmann::json(nullptr);
    j["capacity_equality"] = sw.contains_ball;
    if (sw.contains_ball) {
        j["c_G"] = a;
        j["c_Z"] = a;
    }
    j["volume"] = vol.quadrature;
    j["volume_monte_carlo"] = vol.monte_carlo;
    j["volume_mc_std_error"] = vol.mc_std_error;
    j["viterbo_margin"] = std::sqrt(2.0 * vol.quadrature) - a;
    j["sandwich"] = {{"subset_cylinder", sw.subset_cylinder},
                     {"contains_ball", sw.contains_ball},
                     {"worst_margin", sw.worst_margin},
                     {"samples", sw.samples},
                     {"cylinder_violations", sw.cylinder_violations},
                     {"ball_violations", sw.ball_violations}};
    return j;
}

}  // namespace symcap
