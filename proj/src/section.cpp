#include "symcap/section.hpp"

#include "symcap/errors.hpp"
#include "symcap/parallel.hpp"
#include "symcap/reeb.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace symcap {

using std::numbers::pi;

namespace {

double wrap_pi(double a) {
    a = std::remainder(a, 2.0 * pi);
    return a;
}

double arg1(const Point4& x) { return std::atan2(x[1], x[0]); }
double arg2(const Point4& x) { return std::atan2(x[3], x[2]); }

[[noreturn]] void section_fail(int i, int j, const std::string& why) {
    std::ostringstream os;
    os << "node (" << i << "," << j << "): " << why;
    throw ComputationError("section", os.str());
}

struct NodeReturn {
    Point4 end{};
    double time = 0.0;
    double dtheta = 0.0;  // accumulated change of the tracked angle
};

// Flows x until arg z2 has advanced by 2 pi. The same machinery runs on the
// tangent vector for the boundary orbit, where the "angle" is that of v's z2 part.
using Pair = std::pair<Point4, Point4>;

template <class Step, class Angle, class Track>
NodeReturn first_return(Pair s0, const Step& step, const Angle& angle, const Track& track, double h, double budget,
                        double tol, int i, int j) {
    Pair s = s0;
    double t = 0.0, swept = 0.0, tracked = 0.0;
    double a_prev = angle(s);
    double tr_prev = track(s);
    while (true) {
        if (t > budget) section_fail(i, j, "no return within the time budget");
        Pair sn = step(s, h);
        const double da = wrap_pi(angle(sn) - a_prev);
        if (!(da > 0.0)) section_fail(i, j, "flow is not transverse to the pages");
        if (swept + da >= 2.0 * pi) {
            // bisection on the partial step
            double lo = 0.0, hi = h;
            Pair sm = sn;
            while (hi - lo > tol) {
                const double mid = 0.5 * (lo + hi);
                sm = step(s, mid);
                const double dm = wrap_pi(angle(sm) - a_prev);
                if (swept + dm >= 2.0 * pi) hi = mid;
                else lo = mid;
            }
            sm = step(s, hi);
            NodeReturn r;
            r.time = t + hi;
            r.dtheta = tracked + wrap_pi(track(sm) - tr_prev);
            r.end = sm.first;
            return r;
        }
        swept += da;
        tracked += wrap_pi(track(sn) - tr_prev);
        tr_prev = track(sn);
        a_prev = angle(sn);
        s = sn;
        t += h;
    }
}

}  // namespace

double SectionReturnData::theta_at(int j) const { return 2.0 * pi * j / n_theta; }

Point4 section_point(const StarShapedDomain& dom, double r, double theta) {
    const double s = std::sin(0.5 * pi * r), c = std::cos(0.5 * pi * r);
    return dom.project_to_boundary({s * std::cos(theta), s * std::sin(theta), c, 0.0});
}

std::array<double, 3> model_coordinates(const Point4& x) {
    const double m1 = std::hypot(x[0], x[1]), m2 = std::hypot(x[2], x[3]);
    const double r = (2.0 / pi) * std::atan2(m1, m2);
    double th = std::atan2(x[1], x[0]) - std::atan2(x[3], x[2]);
    th = std::fmod(th, 2.0 * pi);
    if (th < 0.0) th += 2.0 * pi;
    double t = std::atan2(x[3], x[2]) / (2.0 * pi);
    if (t < 0.0) t += 1.0;
    return {r, th, t};
}

SectionReturnData section_return_map(const StarShapedDomain& dom, int n_r, int n_theta, const SectionOptions& opt) {
    if (n_r < 3 || n_theta < 4) throw InputError("section grid must be at least 3 x 4");
    const double scale = period_scale(dom);
    const double h = opt.step > 0.0 ? opt.step : scale / 1024.0;
    const double budget = opt.time_budget * scale;

    SectionReturnData d;
    d.n_r = n_r;
    d.n_theta = n_theta;
    const std::size_t N = static_cast<std::size_t>(n_r) * n_theta;
    d.ret_r.assign(N, 0.0);
    d.ret_theta.assign(N, 0.0);
    d.sigma.assign(N, 0.0);
    d.theta_lift.assign(N, 0.0);
    d.primitive.assign(N, 0.0);
    d.density.assign(N, 0.0);

    // binding check: the circle {z2 = 0} must be a Reeb orbit
    for (int j = 0; j < 8; ++j) {
        const Point4 b = section_point(dom, 1.0, 2.0 * pi * j / 8);
        const Point4 R = reeb_field(dom, b);
        if (std::hypot(R[2], R[3]) > 1e-9)
            throw HypothesisError("section", "the circle {z2 = 0} is not a Reeb orbit; no disk section with this binding");
    }

    auto point_step = [&](const Point4& x, double dt) { return reeb_step(dom, x, dt); };

    // center orbit once
    NodeReturn center;
    {
        const Point4 x0 = section_point(dom, 0.0, 0.0);
        auto st = [&](const Pair& s, double dt) { return Pair{reeb_step(dom, s.first, dt), {}}; };
        auto ang = [](const Pair& s) { return arg2(s.first); };
        auto trk = [](const Pair&) { return 0.0; };
        center = first_return(Pair{x0, {}}, st, ang, trk, h, budget, opt.bisection_tol, 0, 0);
    }
    const double delta = 1e-6;

    parallel_for(N, [&](std::size_t k) {
        const int i = static_cast<int>(k / n_theta), j = static_cast<int>(k % n_theta);
        const double r = d.r_at(i), th = d.theta_at(j);
        const double sn = std::sin(0.5 * pi * r), cs = std::cos(0.5 * pi * r);
        const Point4 u{sn * std::cos(th), sn * std::sin(th), cs, 0.0};
        const double g = dom.value(u);
        const Point4 gg = dom.gradient(u);
        const Point4 du{0.5 * pi * cs * std::cos(th), 0.5 * pi * cs * std::sin(th), -0.5 * pi * sn, 0.0};
        d.primitive[k] = 0.5 * sn * sn / g;
        d.density[k] = 0.5 * (pi * sn * cs / g - sn * sn * dot(gg, du) / (g * g));

        if (i == n_r - 1) {
            // boundary orbit: follow the linearized normal direction
            const Point4 x0 = dom.project_to_boundary(u);
            auto st = [&](const Pair& s, double dt) { return reeb_tangent_step(dom, s.first, s.second, dt); };
            auto ang = [](const Pair& s) { return std::atan2(s.second[3], s.second[2]); };
            auto trk = [](const Pair& s) { return arg1(s.first) - std::atan2(s.second[3], s.second[2]); };
            const NodeReturn nr =
                first_return(Pair{x0, {0.0, 0.0, 1.0, 0.0}}, st, ang, trk, h, budget, opt.bisection_tol, i, j);
            d.sigma[k] = nr.time;
            d.ret_r[k] = 1.0;
            d.theta_lift[k] = th + nr.dtheta;
            d.ret_theta[k] = std::fmod(std::fmod(d.theta_lift[k], 2.0 * pi) + 2.0 * pi, 2.0 * pi);
            return;
        }
        // r = 0 row: the angle comes from a point displaced by delta in direction theta
        const double rr = i == 0 ? delta : r;
        const Point4 x0 = section_point(dom, rr, th);
        auto st = [&](const Pair& s, double dt) { return Pair{point_step(s.first, dt), {}}; };
        auto ang = [](const Pair& s) { return arg2(s.first); };
        auto trk = [](const Pair& s) { return arg1(s.first) - arg2(s.first); };
        const NodeReturn nr = first_return(Pair{x0, {}}, st, ang, trk, h, budget, opt.bisection_tol, i, j);
        d.theta_lift[k] = th + nr.dtheta;
        if (i == 0) {
            const auto mc = model_coordinates(center.end);
            d.sigma[k] = center.time;
            d.ret_r[k] = mc[0];
        } else {
            const auto mc = model_coordinates(nr.end);
            d.sigma[k] = nr.time;
            d.ret_r[k] = mc[0];
        }
        d.ret_theta[k] = std::fmod(std::fmod(d.theta_lift[k], 2.0 * pi) + 2.0 * pi, 2.0 * pi);
    });

    // boundary action: period of the binding orbit
    {
        const Point4 b = section_point(dom, 1.0, 0.0);
        auto st = [&](const Pair& s, double dt) { return Pair{reeb_step(dom, s.first, dt), {}}; };
        auto ang = [](const Pair& s) { return arg1(s.first); };
        auto trk = [](const Pair&) { return 0.0; };
        d.boundary_action = first_return(Pair{b, {}}, st, ang, trk, h, budget, opt.bisection_tol, n_r - 1, 0).time;
        ReebOrbit binding;
        binding.initial_point = b;
        binding.period = d.boundary_action;
        d.binding_rotation = orbit_invariants(dom, binding).rotation_number - 1.0;
    }
    return d;
}

}  // namespace symcap
