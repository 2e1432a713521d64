#include "symcap/reeb.hpp"

#include "symcap/errors.hpp"
#include "symcap/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace symcap {

using std::numbers::pi;

namespace {

Point4 mat_vec(const Mat4& m, const Point4& v) {
    Point4 r{};
    for (int i = 0; i < 4; ++i) r[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2] + m[i][3] * v[3];
    return r;
}

Mat4 mat_mul(const Mat4& a, const Mat4& b) {
    Mat4 r{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j] + a[i][3] * b[3][j];
    return r;
}

Mat4 mat_identity() {
    Mat4 m{};
    for (int i = 0; i < 4; ++i) m[i][i] = 1.0;
    return m;
}

Mat4 mat_axpy(const Mat4& a, double s, const Mat4& b) {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r[i][j] = a[i][j] + s * b[i][j];
    return r;
}

Point4 project_step(const StarShapedDomain& dom, const Point4& x, std::size_t step) {
    try {
        return dom.project_to_boundary(x);
    } catch (const ComputationError& e) {
        std::ostringstream os;
        os << "projection failed at step " << step << " (" << e.what() << ")";
        throw ComputationError("reeb_dynamics", os.str());
    }
}

void require_on_boundary(const StarShapedDomain& dom, const Point4& x, double tol) {
    const double g = dom.value(x);
    if (!std::isfinite(g) || std::abs(g - 1.0) > tol) {
        std::ostringstream os;
        os.precision(12);
        os << "point is off the boundary: G = " << g;
        throw ComputationError("reeb_dynamics", os.str());
    }
}

int step_count(double T, double h) {
    return std::max(1, static_cast<int>(std::ceil(T / h - 1e-9)));
}

}  // namespace

Point4 reeb_field(const StarShapedDomain& dom, const Point4& x) {
    const Point4 g = dom.gradient(x);
    const double half = 0.5 * dot(x, g);
    return (1.0 / half) * apply_J(g);
}

Point4 reeb_vector(const StarShapedDomain& dom, const Point4& x, double tol) {
    require_on_boundary(dom, x, tol);
    return reeb_field(dom, x);
}

Mat4 reeb_jacobian(const StarShapedDomain& dom, const Point4& x) {
    const Point4 g = dom.gradient(x);
    const Mat4 H = dom.hessian(x);
    const double half = 0.5 * dot(x, g);
    const Point4 hx = mat_vec(H, x);
    const Point4 dhalf = 0.5 * (g + hx);
    Mat4 inner;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) inner[i][j] = H[i][j] / half - g[i] * dhalf[j] / (half * half);
    Mat4 out;
    for (int j = 0; j < 4; ++j) {
        out[0][j] = -inner[1][j];
        out[1][j] = inner[0][j];
        out[2][j] = -inner[3][j];
        out[3][j] = inner[2][j];
    }
    return out;
}

double period_scale(const StarShapedDomain& dom) {
    if (dom.is_quadratic()) return std::min(dom.a(), dom.b());
    double l1 = 0.0;
    for (const auto& m : dom.coeffs()) l1 += std::abs(m.coeff);
    return pi * (1.0 - std::abs(dom.epsilon()) * l1);
}

Point4 reeb_step(const StarShapedDomain& dom, const Point4& x, double dt) {
    const Point4 k1 = reeb_field(dom, x);
    const Point4 k2 = reeb_field(dom, x + (0.5 * dt) * k1);
    const Point4 k3 = reeb_field(dom, x + (0.5 * dt) * k2);
    const Point4 k4 = reeb_field(dom, x + dt * k3);
    return dom.project_to_boundary(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

std::pair<Point4, Point4> reeb_tangent_step(const StarShapedDomain& dom, const Point4& x, const Point4& v, double dt) {
    auto rhs = [&](const Point4& y, const Point4& w) {
        return std::pair<Point4, Point4>{reeb_field(dom, y), mat_vec(reeb_jacobian(dom, y), w)};
    };
    const auto [a1, b1] = rhs(x, v);
    const auto [a2, b2] = rhs(x + (0.5 * dt) * a1, v + (0.5 * dt) * b1);
    const auto [a3, b3] = rhs(x + (0.5 * dt) * a2, v + (0.5 * dt) * b2);
    const auto [a4, b4] = rhs(x + dt * a3, v + dt * b3);
    return {dom.project_to_boundary(x + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)),
            v + (dt / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)};
}

Trajectory integrate_flow(const StarShapedDomain& dom, const Point4& x0, double T, double h) {
    if (!(T >= 0.0) || !std::isfinite(T)) throw InputError("flow time must be finite and non-negative");
    require_on_boundary(dom, x0, kBoundaryTol);
    Trajectory tr;
    tr.times.push_back(0.0);
    tr.points.push_back(x0);
    if (T == 0.0) return tr;
    if (h <= 0.0) h = period_scale(dom) / kStepsPerPeriod;
    const int n = step_count(T, h);
    const double dt = T / n;
    Point4 x = x0;
    for (int s = 0; s < n; ++s) {
        const Point4 k1 = reeb_field(dom, x);
        const Point4 k2 = reeb_field(dom, x + (0.5 * dt) * k1);
        const Point4 k3 = reeb_field(dom, x + (0.5 * dt) * k2);
        const Point4 k4 = reeb_field(dom, x + dt * k3);
        const Point4 xn = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        tr.max_drift = std::max(tr.max_drift, std::abs(dom.value(xn) - 1.0));
        x = project_step(dom, xn, static_cast<std::size_t>(s));
        tr.times.push_back(T * (s + 1) / n);
        tr.points.push_back(x);
    }
    return tr;
}

FlowJet flow_with_jacobian(const StarShapedDomain& dom, const Point4& x0, double T, double h, Trajectory* samples,
                           std::vector<Mat4>* jacobians) {
    require_on_boundary(dom, x0, 1e-8);
    if (h <= 0.0) h = period_scale(dom) / kStepsPerPeriod;
    FlowJet jet{x0, mat_identity()};
    if (samples) {
        samples->times.assign(1, 0.0);
        samples->points.assign(1, x0);
        samples->max_drift = 0.0;
    }
    if (jacobians) jacobians->assign(1, jet.jacobian);
    if (T == 0.0) return jet;
    const bool backward = T < 0.0;
    const int n = step_count(std::abs(T), h);
    const double dt = T / n;
    Point4 x = x0;
    Mat4 M = jet.jacobian;
    for (int s = 0; s < n; ++s) {
        const Point4 k1 = reeb_field(dom, x);
        const Mat4 m1 = mat_mul(reeb_jacobian(dom, x), M);
        const Point4 x2 = x + (0.5 * dt) * k1;
        const Point4 k2 = reeb_field(dom, x2);
        const Mat4 m2 = mat_mul(reeb_jacobian(dom, x2), mat_axpy(M, 0.5 * dt, m1));
        const Point4 x3 = x + (0.5 * dt) * k2;
        const Point4 k3 = reeb_field(dom, x3);
        const Mat4 m3 = mat_mul(reeb_jacobian(dom, x3), mat_axpy(M, 0.5 * dt, m2));
        const Point4 x4 = x + dt * k3;
        const Point4 k4 = reeb_field(dom, x4);
        const Mat4 m4 = mat_mul(reeb_jacobian(dom, x4), mat_axpy(M, dt, m3));
        const Point4 xn = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                M[i][j] += dt / 6.0 * (m1[i][j] + 2.0 * m2[i][j] + 2.0 * m3[i][j] + m4[i][j]);
        if (samples) samples->max_drift = std::max(samples->max_drift, std::abs(dom.value(xn) - 1.0));
        x = project_step(dom, xn, static_cast<std::size_t>(s));
        if (samples) {
            samples->times.push_back(T * (s + 1) / n);
            samples->points.push_back(x);
        }
        if (jacobians) jacobians->push_back(M);
    }
    (void)backward;
    jet.end = x;
    jet.jacobian = M;
    return jet;
}

std::string orbit_type_name(OrbitType t) {
    switch (t) {
        case OrbitType::elliptic: return "elliptic";
        case OrbitType::pos_hyperbolic: return "pos_hyperbolic";
        case OrbitType::neg_hyperbolic: return "neg_hyperbolic";
        case OrbitType::degenerate: return "degenerate";
        case OrbitType::foliated_family: return "foliated_family";
    }
    return "unknown";
}

std::array<Point4, 2> contact_frame(const StarShapedDomain& dom, const Point4& x) {
    const Point4 g = dom.gradient(x);
    const Point4 n1 = (1.0 / norm(g)) * g;
    Point4 jx = apply_J(x);
    jx = jx - dot(jx, n1) * n1;
    const Point4 n2 = (1.0 / norm(jx)) * jx;
    auto proj = [&](const Point4& v) { return v - dot(v, n1) * n1 - dot(v, n2) * n2; };
    Point4 e1 = proj(apply_jq(x));
    Point4 e2 = proj(apply_kq(x));
    const double c = eval_symplectic(e1, e2);
    if (!(c > 0.0)) throw ComputationError("reeb_dynamics", "contact frame degenerates");
    const double s = 1.0 / std::sqrt(c);
    return {s * e1, s * e2};
}

Sp2Arc linearized_arc(const StarShapedDomain& dom, const Point4& x0, double period) {
    Trajectory tr;
    std::vector<Mat4> jac;
    flow_with_jacobian(dom, x0, period, 0.0, &tr, &jac);
    const auto f0 = contact_frame(dom, x0);
    Sp2Arc arc;
    for (std::size_t k = 0; k < tr.points.size(); ++k) {
        const auto fk = contact_frame(dom, tr.points[k]);
        Mat2 m;
        for (int col = 0; col < 2; ++col) {
            const Point4 v = mat_vec(jac[k], f0[col]);
            m[col] = eval_symplectic(v, fk[1]);      // coefficient on e1
            m[2 + col] = eval_symplectic(fk[0], v);  // coefficient on e2
        }
        arc.times.push_back(tr.times[k] / period);
        arc.mats.push_back(m);
    }
    return arc;
}

double action_integral(const StarShapedDomain& dom, const std::vector<Point4>& samples, double period) {
    // lambda_0 integrated over the cubic Hermite interpolant of the closed loop,
    // three Gauss points per segment.
    const std::size_t n = samples.size();
    if (n < 2) return 0.0;
    const double dt = period / static_cast<double>(n);
    static const double gx[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
    static const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    std::vector<Point4> vel(n);
    for (std::size_t k = 0; k < n; ++k) vel[k] = dt * reeb_field(dom, samples[k]);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const Point4& p0 = samples[k];
        const Point4& p1 = samples[(k + 1) % n];
        const Point4& m0 = vel[k];
        const Point4& m1 = vel[(k + 1) % n];
        for (int g = 0; g < 3; ++g) {
            const double s = gx[g], s2 = s * s, s3 = s2 * s;
            const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
            const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1, d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
            const Point4 pos = h00 * p0 + h10 * m0 + h01 * p1 + h11 * m1;
            const Point4 der = d00 * p0 + d10 * m0 + d01 * p1 + d11 * m1;
            total += gw[g] * eval_liouville(pos, der);
        }
    }
    return total;
}

ReebOrbit orbit_invariants(const StarShapedDomain& dom, ReebOrbit orbit) {
    const double T = orbit.period;
    const Sp2Arc arc = linearized_arc(dom, orbit.initial_point, T);
    orbit.monodromy = arc.mats.back();
    orbit.rotation_number = rotation_number_of_arc(arc, RotationMethod::eigenvalue_lift);
    const Mat2& m = orbit.monodromy;
    const double tr = mat2_trace(m);
    const double det = mat2_det(m);
    // Distance of the spectrum from 1.
    double gap;
    const double disc = 0.25 * tr * tr - det;
    if (disc >= 0.0) {
        const double l1 = 0.5 * tr + std::sqrt(disc), l2 = 0.5 * tr - std::sqrt(disc);
        gap = std::min(std::abs(l1 - 1.0), std::abs(l2 - 1.0));
    } else {
        gap = std::hypot(0.5 * tr - 1.0, std::sqrt(-disc));
    }
    const bool keep_foliated = orbit.type == OrbitType::foliated_family;
    const double rho = orbit.rotation_number;
    if (gap <= 1e-6) {
        orbit.type = OrbitType::degenerate;
        orbit.degenerate_warning = true;
        const double snapped = std::abs(rho - std::round(rho)) < 1e-8 ? std::round(rho) : rho;
        orbit.cz_index = 2 * static_cast<int>(std::floor(snapped)) + 1;
    } else if (std::abs(tr) < 2.0) {
        orbit.type = OrbitType::elliptic;
        orbit.cz_index = 2 * static_cast<int>(std::floor(rho)) + 1;
    } else {
        orbit.type = tr > 0.0 ? OrbitType::pos_hyperbolic : OrbitType::neg_hyperbolic;
        orbit.cz_index = static_cast<int>(std::lround(2.0 * rho));
    }
    if (keep_foliated) orbit.type = OrbitType::foliated_family;
    if (orbit.samples.empty()) orbit.samples = integrate_flow(dom, orbit.initial_point, T).points;
    std::vector<Point4> loop(orbit.samples.begin(), orbit.samples.end() - 1);
    orbit.action = action_integral(dom, loop, T);
    orbit.has_invariants = true;
    return orbit;
}

namespace {

struct NewtonResult {
    bool ok = false;
    Point4 y{};
    double T = 0.0;
};

NewtonResult refine_orbit(const StarShapedDomain& dom, const Point4& start, double T0, double h, double tol,
                          double T_max) {
    const double scale = dom.radius_bound();
    const Point4 anchor = start;
    const Point4 r_anchor = reeb_field(dom, anchor);
    NewtonResult out;
    Point4 y = start;
    double T = T0;
    for (int it = 0; it < 40; ++it) {
        const FlowJet jet = flow_with_jacobian(dom, y, T, h);
        const Point4 F = jet.end - y;
        if (norm(F) <= tol * scale) {
            out = {true, y, T};
            return out;
        }
        const Point4 r_end = reeb_field(dom, jet.end);
        const Point4 grad = dom.gradient(y);
        Eigen::Matrix<double, 6, 5> A = Eigen::Matrix<double, 6, 5>::Zero();
        Eigen::Matrix<double, 6, 1> b = Eigen::Matrix<double, 6, 1>::Zero();
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) A(i, j) = jet.jacobian[i][j] - (i == j ? 1.0 : 0.0);
            A(i, 4) = r_end[i];
            b(i) = -F[i];
        }
        for (int j = 0; j < 4; ++j) {
            A(4, j) = grad[j];
            A(5, j) = r_anchor[j];
        }
        b(4) = -(dom.value(y) - 1.0);
        b(5) = -dot(y - anchor, r_anchor);
        const Eigen::Matrix<double, 5, 1> d = A.completeOrthogonalDecomposition().solve(b);
        Point4 dy{d(0), d(1), d(2), d(3)};
        double dT = d(4);
        const double len = norm(dy);
        const double cap = 0.25 * scale;
        if (len > cap || std::abs(dT) > 0.25 * T) {
            const double s = std::min(cap / std::max(len, 1e-300), 0.25 * T / std::max(std::abs(dT), 1e-300));
            dy = s * dy;
            dT *= s;
        }
        y = dom.project_to_boundary(y + dy);
        T += dT;
        if (!(T > 1e-3 * period_scale(dom)) || T > T_max) return out;
    }
    return out;
}

// Reduces a converged (possibly multiply covered) orbit to its simple period:
// the largest k with phi_{T/k}(y) = y is taken and re-refined.
NewtonResult make_simple(const StarShapedDomain& dom, NewtonResult r, double h, double tol, double T_max) {
    const double scale = dom.radius_bound();
    const long kmax = static_cast<long>(std::floor(r.T / (0.25 * period_scale(dom))));
    for (long k = kmax; k >= 2; --k) {
        const double Tk = r.T / static_cast<double>(k);
        const Trajectory tr = integrate_flow(dom, r.y, Tk, h);
        if (norm(tr.points.back() - r.y) > 1e-6 * scale) continue;
        NewtonResult s = refine_orbit(dom, r.y, Tk, h, tol, T_max);
        if (s.ok) return s;
    }
    return r;
}

// Distance from p to the closed orbit through y of period T, using the samples
// plus one short RK4 refinement from the nearest sample.
double distance_to_orbit(const StarShapedDomain& dom, const ReebOrbit& orbit, const Point4& p) {
    std::size_t best = 0;
    double bd = INFINITY;
    for (std::size_t k = 0; k < orbit.samples.size(); ++k) {
        const double d = norm(orbit.samples[k] - p);
        if (d < bd) {
            bd = d;
            best = k;
        }
    }
    if (orbit.samples.size() < 2) return bd;
    const std::size_t nseg = orbit.samples.size() - 1;
    const double dt = orbit.period / static_cast<double>(nseg);
    const std::size_t base = best == 0 ? 0 : best - 1;
    const Point4 x = orbit.samples[base];
    const Point4 r = reeb_field(dom, x);
    double tau = dot(p - x, r) / dot(r, r);
    tau = std::clamp(tau, 0.0, 2.0 * dt);
    double d_ref = bd;
    if (tau > 0.0) {
        const Trajectory t = integrate_flow(dom, x, tau, tau);
        d_ref = norm(t.points.back() - p);
    }
    return std::min(bd, d_ref);
}

struct SeedHit {
    NewtonResult orbit;
    std::size_t seed_index = 0;
    bool closes_up = false;
};

}  // namespace

OrbitSearchResult find_closed_orbits(const StarShapedDomain& dom, const OrbitSearchOptions& opt) {
    if (opt.seeds == 0) throw InputError("orbit search needs at least one seed");
    const double scale = dom.radius_bound();
    const double max_period = opt.max_period > 0.0 ? opt.max_period : 2.5 * pi * scale * scale;
    const double Tscale = period_scale(dom);
    const double h = Tscale / kStepsPerPeriod;
    const auto seeds = sample_boundary(dom, opt.seeds, opt.seed);

    std::vector<std::vector<SeedHit>> per_seed(seeds.size());
    std::vector<int> skipped(seeds.size(), 0);
    parallel_for(seeds.size(), [&](std::size_t s) {
        const Point4& x0 = seeds[s];
        const Trajectory tr = integrate_flow(dom, x0, max_period, h);
        std::vector<std::pair<double, std::size_t>> minima;
        for (std::size_t k = 1; k + 1 < tr.points.size(); ++k) {
            if (tr.times[k] < 0.25 * Tscale) continue;
            const double d = norm(tr.points[k] - x0);
            if (d <= norm(tr.points[k - 1] - x0) && d < norm(tr.points[k + 1] - x0)) minima.push_back({d, k});
        }
        std::stable_sort(minima.begin(), minima.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        if (minima.size() > opt.max_candidates) minima.resize(opt.max_candidates);
        std::sort(minima.begin(), minima.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
        bool any = false;
        for (const auto& [d, k] : minima) {
            NewtonResult r = refine_orbit(dom, x0, tr.times[k], h, opt.newton_tol, 1.5 * max_period);
            if (!r.ok) continue;
            r = make_simple(dom, r, h, opt.newton_tol, 1.5 * max_period);
            if (r.T > max_period * (1.0 + 1e-9)) continue;
            SeedHit hit;
            hit.orbit = r;
            hit.seed_index = s;
            hit.closes_up = norm(r.y - x0) < opt.near_return;
            per_seed[s].push_back(hit);
            any = true;
        }
        if (!any) skipped[s] = 1;
    });

    OrbitSearchResult res;
    std::vector<SeedHit> hits;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        res.seeds_skipped += static_cast<std::size_t>(skipped[s]);
        if (skipped[s]) res.diagnostics.push_back("seed " + std::to_string(s) + ": no Newton convergence");
        for (const auto& h2 : per_seed[s]) hits.push_back(h2);
    }

    // Resonant case: nearly every seed lies on a closed orbit of one common period.
    std::vector<double> closing_periods(seeds.size(), -1.0);
    for (const auto& hit : hits)
        if (hit.closes_up && closing_periods[hit.seed_index] < 0.0) closing_periods[hit.seed_index] = hit.orbit.T;
    std::vector<double> cp;
    for (double t : closing_periods)
        if (t > 0.0) cp.push_back(t);
    if (!cp.empty()) {
        std::vector<double> sorted = cp;
        std::sort(sorted.begin(), sorted.end());
        const double median = sorted[sorted.size() / 2];
        std::size_t common = 0;
        for (double t : cp)
            if (std::abs(t - median) <= opt.dedup_tol * std::max(1.0, median)) ++common;
        if (static_cast<double>(common) >= opt.foliated_fraction * static_cast<double>(seeds.size())) {
            const double tol = opt.dedup_tol * std::max(1.0, median);
            for (const auto& hit : hits) {
                if (!hit.closes_up || std::abs(hit.orbit.T - median) > tol) continue;
                ReebOrbit o;
                o.initial_point = hit.orbit.y;
                o.period = hit.orbit.T;
                o.type = OrbitType::foliated_family;
                o.samples = integrate_flow(dom, o.initial_point, o.period, h).points;
                res.orbits.push_back(orbit_invariants(dom, o));
                res.foliated = true;
                break;
            }
            // a resonant ellipsoid still has shorter exceptional orbits
            std::erase_if(hits, [&](const SeedHit& hit) { return hit.orbit.T >= median - tol; });
        }
    }

    std::stable_sort(hits.begin(), hits.end(), [](const SeedHit& a, const SeedHit& b) {
        if (a.orbit.T != b.orbit.T) return a.orbit.T < b.orbit.T;
        return a.seed_index < b.seed_index;
    });
    for (const auto& hit : hits) {
        bool dup = false;
        for (const auto& kept : res.orbits) {
            if (std::abs(kept.period - hit.orbit.T) > opt.dedup_tol * std::max(1.0, kept.period)) continue;
            if (distance_to_orbit(dom, kept, hit.orbit.y) <= opt.dedup_tol) {
                dup = true;
                break;
            }
        }
        if (dup) continue;
        ReebOrbit o;
        o.initial_point = hit.orbit.y;
        o.period = hit.orbit.T;
        o.samples = integrate_flow(dom, o.initial_point, o.period, h).points;
        res.orbits.push_back(orbit_invariants(dom, o));
    }
    std::stable_sort(res.orbits.begin(), res.orbits.end(),
                     [](const ReebOrbit& a, const ReebOrbit& b) { return a.period < b.period; });
    return res;
}

}  // namespace symcap
