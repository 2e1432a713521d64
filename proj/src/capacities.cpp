#include "symcap/capacities.hpp"

#include "symcap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace symcap {

using std::numbers::pi;

EllipsoidCapacities ellipsoid_oracle(double a, double b, int N) {
    if (!(a > 0.0) || !(b > 0.0)) throw InputError("ellipsoid_oracle needs a, b > 0");
    if (N < 1) throw InputError("ellipsoid_oracle needs N >= 1");
    EllipsoidCapacities out;
    // m a + n b with m + n >= 1; any value among the first N has m, n <= N.
    std::vector<double> all;
    for (int m = 0; m <= N; ++m)
        for (int n = 0; n <= N; ++n)
            if (m + n >= 1) all.push_back(m * a + n * b);
    std::sort(all.begin(), all.end());
    out.spectrum.assign(all.begin(), all.begin() + N);
    out.A_min = std::min(a, b);
    out.gromov = out.cylindrical = out.ech1 = out.A_min;
    out.volume = a * b / 2.0;
    return out;
}

ViterboResult viterbo_check(double c, double volume) {
    if (!(volume > 0.0)) throw InputError("viterbo_check needs a positive volume");
    ViterboResult r;
    r.margin = std::sqrt(2.0 * volume) - c;
    r.holds = r.margin >= 0.0;
    return r;
}

namespace {

struct SphereScan {
    double volume = 0.0;
    double max_z1 = 0.0, max_z2 = 0.0, min_r2 = 0.0;
};

// Boundary point of direction u is sqrt(rho(u)) u. Hopf coordinates
// u = (cos e e^{i a}, sin e e^{i b}), dsigma = sin e cos e de da db.
SphereScan sphere_scan(const StarShapedDomain& dom, int n) {
    const int ne = 2 * (n / 2) + 1, na = 2 * n;
    const double he = 0.5 * pi / (ne - 1), ha = 2.0 * pi / na;
    SphereScan out;
    out.min_r2 = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (int i = 0; i < ne; ++i) {
        const double e = i * he, c = std::cos(e), s = std::sin(e);
        const double w = (i == 0 || i == ne - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        double row = 0.0;
        for (int p = 0; p < na; ++p)
            for (int q = 0; q < na; ++q) {
                const Point4 u{c * std::cos(p * ha), c * std::sin(p * ha), s * std::cos(q * ha), s * std::sin(q * ha)};
                const double rho = dom.rho(u);
                row += rho * rho;
                out.max_z1 = std::max(out.max_z1, rho * c * c);
                out.max_z2 = std::max(out.max_z2, rho * s * s);
                out.min_r2 = std::min(out.min_r2, rho);
            }
        sum += w * s * c * row;
    }
    out.volume = sum * he / 3.0 * ha * ha / 4.0;
    return out;
}

}  // namespace

CapacityReport a_min_pipeline(const StarShapedDomain& dom, const CapacityBudget& budget) {
    if (budget.initial_seeds == 0 || budget.max_seeds < budget.initial_seeds)
        throw InputError("capacity budget needs 0 < initial_seeds <= max_seeds");
    CapacityReport rep;

    OrbitSearchOptions so;
    so.max_period = budget.max_period;
    so.seed = budget.seed;
    for (std::size_t n = budget.initial_seeds;; n = std::min(2 * n, budget.max_seeds)) {
        so.seeds = n;
        auto res = find_closed_orbits(dom, so);
        rep.seeds_used = n;
        rep.orbits_found = res.orbits.size();
        rep.diagnostics = res.diagnostics;
        for (const auto& o : res.orbits)
            if (!rep.A_min || o.action < *rep.A_min) {
                rep.A_min = o.action;
                rep.A_min_orbit = o;
            }
        if (rep.A_min || n == budget.max_seeds) break;
    }
    rep.status = rep.A_min ? "non-certified" : "inconclusive";

    if (dom.is_quadratic()) {
        const auto w = dom.quadratic_weights();
        const double a = pi / w[0], b = pi / w[1];
        rep.volume = rep.volume_monte_carlo = a * b / 2.0;
        rep.cZ_upper = rep.ball_lower = std::min(a, b);
        rep.bounds_exact = true;
        if (rep.A_min) rep.A_hopf = std::min(a, b);
    } else {
        const auto q = sphere_scan(dom, budget.sphere_nodes);
        rep.volume = q.volume;
        const auto v = domain_volume(dom, budget.volume_samples, budget.seed);
        rep.volume_monte_carlo = v.volume;
        rep.volume_std_error = v.std_error;
        if (std::abs(v.volume - q.volume) > 5.0 * v.std_error + 1e-12 * q.volume)
            throw ComputationError("capacities", "sphere quadrature volume " + std::to_string(q.volume) +
                                                     " and Monte Carlo volume " + std::to_string(v.volume) +
                                                     " disagree");
        rep.cZ_upper = pi * std::min(q.max_z1, q.max_z2);
        rep.ball_lower = pi * q.min_r2;
    }
    rep.viterbo_rhs = std::sqrt(2.0 * rep.volume);
    if (rep.A_min) {
        rep.viterbo_lhs = *rep.A_min;
        rep.systolic_ratio = *rep.A_min * *rep.A_min / (2.0 * rep.volume);
    }
    return rep;
}

nlohmann::json to_json(const CapacityReport& r) {
    nlohmann::json j;
    j["status"] = r.status;
    j["A_min"] = r.A_min ? nlohmann::json(*r.A_min) : nlohmann::json(nullptr);
    if (r.A_min_orbit) {
        const auto& o = *r.A_min_orbit;
        j["A_min_orbit"] = {{"action", o.action},
                            {"period", o.period},
                            {"initial_point", {o.initial_point[0], o.initial_point[1], o.initial_point[2], o.initial_point[3]}},
                            {"rotation_number", o.has_invariants ? nlohmann::json(o.rotation_number) : nlohmann::json(nullptr)},
                            {"cz", o.has_invariants ? nlohmann::json(o.cz_index) : nlohmann::json(nullptr)}};
    } else {
        j["A_min_orbit"] = nullptr;
    }
    if (r.A_hopf) j["A_Hopf"] = *r.A_hopf;
    j["c_bounds"] = {{"cZ_upper", r.cZ_upper}, {"ball_lower", r.ball_lower}, {"exact", r.bounds_exact}};
    j["volume"] = r.volume;
    j["volume_monte_carlo"] = r.volume_monte_carlo;
    j["volume_std_error"] = r.volume_std_error;
    j["viterbo_lhs"] = r.A_min ? nlohmann::json(r.viterbo_lhs) : nlohmann::json(nullptr);
    j["viterbo_rhs"] = r.viterbo_rhs;
    j["systolic_ratio"] = r.A_min ? nlohmann::json(r.systolic_ratio) : nlohmann::json(nullptr);
    j["seeds_used"] = r.seeds_used;
    j["orbits_found"] = r.orbits_found;
    j["diagnostics"] = r.diagnostics;
    return j;
}

}  // namespace symcap
