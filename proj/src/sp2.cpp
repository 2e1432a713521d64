#include "symcap/sp2.hpp"

#include "symcap/errors.hpp"
#include "symcap/interp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace symcap {

using std::numbers::pi;

namespace {

// Signed angle increment in turns between two nonzero plane vectors.
double angle_step(double x0, double y0, double x1, double y1) {
    return std::atan2(x0 * y1 - y0 * x1, x0 * x1 + y0 * y1) / (2.0 * pi);
}

// Winding in turns of Phi(t)v along the sampled arc.
double arc_winding(const Sp2Arc& arc, double vx, double vy) {
    double total = 0.0;
    double px = vx, py = vy;
    for (std::size_t k = 1; k < arc.mats.size(); ++k) {
        const Mat2& m = arc.mats[k];
        const double qx = m[0] * vx + m[1] * vy, qy = m[2] * vx + m[3] * vy;
        const double step = angle_step(px, py, qx, qy);
        if (std::abs(step) >= 0.25)
            throw ComputationError("rotation", "arc sampling too coarse to lift the winding angle");
        total += step;
        px = qx;
        py = qy;
    }
    return total;
}

}  // namespace

Mat2 mat2_rotation(double t) { return {std::cos(t), -std::sin(t), std::sin(t), std::cos(t)}; }

double rotation_class(const Mat2& m) {
    const double tr = mat2_trace(m);
    if (tr >= 2.0) return 0.0;
    if (tr <= -2.0) return 0.5;
    const double theta = std::acos(0.5 * tr) / (2.0 * pi);
    // <J0 v, m v> for v = (1,0) is the lower-left entry.
    return m[2] > 0.0 ? theta : -theta;
}

double rotation_number_of_arc(const Sp2Arc& arc, RotationMethod method, long iterations) {
    if (arc.mats.empty()) throw InputError("empty Sp(2) arc");
    if (method == RotationMethod::eigenvalue_lift) {
        double rho = 0.0;
        const Mat2& m0 = arc.mats.front();
        if (std::abs(m0[0] - 1.0) + std::abs(m0[1]) + std::abs(m0[2]) + std::abs(m0[3] - 1.0) > 1e-8)
            throw InputError("arc must start at the identity");
        double prev = 0.0;
        for (std::size_t k = 1; k < arc.mats.size(); ++k) {
            const double cur = rotation_class(arc.mats[k]);
            double d = cur - prev;
            d -= std::round(d);
            if (std::abs(d) >= 0.25)
                throw ComputationError("rotation", "arc sampling too coarse: rotation class jumps by >= 1/4");
            rho += d;
            prev = cur;
        }
        return rho;
    }
    if (iterations < 1) throw InputError("winding limit needs at least one iteration");
    const Mat2& end = arc.mats.back();
    // For many iterations the per-iterate winding is tabulated as a function of
    // the starting direction (period pi) and read off by periodic cubic
    // interpolation; short runs evaluate it directly.
    constexpr long kDirect = 1024;
    constexpr int kTable = 4096;
    std::vector<double> table;
    if (iterations > kDirect) {
        table.resize(kTable);
        for (int j = 0; j < kTable; ++j) {
            const double psi = pi * j / kTable;
            table[j] = arc_winding(arc, std::cos(psi), std::sin(psi));
        }
    }
    auto per_iterate = [&](double vx, double vy) {
        if (table.empty()) return arc_winding(arc, vx, vy);
        double psi = std::atan2(vy, vx);
        if (psi < 0.0) psi += pi;
        if (psi >= pi) psi -= pi;
        const double s = psi / pi * kTable;
        const long i0 = static_cast<long>(std::floor(s));
        const double f = s - static_cast<double>(i0);
        auto at = [&](long i) { return table[((i % kTable) + kTable) % kTable]; };
        const double ym = at(i0 - 1), y0 = at(i0), y1 = at(i0 + 1), y2 = at(i0 + 2);
        return interp::lagrange4(ym, y0, y1, y2, f);
    };
    double vx = 1.0, vy = 0.0, total = 0.0;
    for (long k = 0; k < iterations; ++k) {
        total += per_iterate(vx, vy);
        const double wx = end[0] * vx + end[1] * vy, wy = end[2] * vx + end[3] * vy;
        const double len = std::hypot(wx, wy);
        vx = wx / len;
        vy = wy / len;
    }
    return total / static_cast<double>(iterations);
}

PositivityCheck positive_path_check(const Sp2Arc& arc) {
    const std::size_t n = arc.mats.size();
    if (n < 3) throw InputError("positive_path_check needs at least three samples");
    PositivityCheck out;
    out.min_eigenvalue = INFINITY;
    for (std::size_t k = 0; k < n; ++k) {
        Mat2 d;
        if (k == 0 || k == n - 1) {
            // Second-order one-sided difference at the ends.
            const int s = k == 0 ? 1 : -1;
            const std::size_t k1 = k + s, k2 = k + 2 * s;
            const double h = arc.times[k1] - arc.times[k];
            for (int e = 0; e < 4; ++e)
                d[e] = (-3.0 * arc.mats[k][e] + 4.0 * arc.mats[k1][e] - arc.mats[k2][e]) / (2.0 * h);
        } else {
            const double h = arc.times[k + 1] - arc.times[k - 1];
            for (int e = 0; e < 4; ++e) d[e] = (arc.mats[k + 1][e] - arc.mats[k - 1][e]) / h;
        }
        const Mat2 a = mat2_mul(d, mat2_inverse(arc.mats[k]));
        // -J0 a with J0 = (0 -1; 1 0).
        const Mat2 s = {a[2], a[3], -a[0], -a[1]};
        const double s11 = s[0], s22 = s[3], s12 = 0.5 * (s[1] + s[2]);
        const double mean = 0.5 * (s11 + s22);
        const double rad = std::hypot(0.5 * (s11 - s22), s12);
        out.min_eigenvalue = std::min(out.min_eigenvalue, mean - rad);
    }
    out.is_positive = out.min_eigenvalue > 0.0;
    out.rho = rotation_number_of_arc(arc, RotationMethod::eigenvalue_lift);
    return out;
}

Sp2Arc arc_from_generator(const SymGenerator& S, int samples, int substeps) {
    if (samples < 1 || substeps < 1) throw InputError("arc_from_generator needs positive sample counts");
    auto rhs = [&](double t, const Mat2& m) {
        const auto s = S(t);
        // J0 S = (-s12 -s22; s11 s12)
        const Mat2 js = {-s[1], -s[2], s[0], s[1]};
        return mat2_mul(js, m);
    };
    Sp2Arc arc;
    arc.times.push_back(0.0);
    arc.mats.push_back(mat2_identity());
    Mat2 m = mat2_identity();
    const double h = 1.0 / (static_cast<double>(samples) * substeps);
    for (int i = 0; i < samples; ++i) {
        for (int j = 0; j < substeps; ++j) {
            const double t = (static_cast<double>(i) * substeps + j) * h;
            const Mat2 k1 = rhs(t, m);
            Mat2 tmp;
            for (int e = 0; e < 4; ++e) tmp[e] = m[e] + 0.5 * h * k1[e];
            const Mat2 k2 = rhs(t + 0.5 * h, tmp);
            for (int e = 0; e < 4; ++e) tmp[e] = m[e] + 0.5 * h * k2[e];
            const Mat2 k3 = rhs(t + 0.5 * h, tmp);
            for (int e = 0; e < 4; ++e) tmp[e] = m[e] + h * k3[e];
            const Mat2 k4 = rhs(t + h, tmp);
            for (int e = 0; e < 4; ++e) m[e] += h / 6.0 * (k1[e] + 2.0 * k2[e] + 2.0 * k3[e] + k4[e]);
        }
        arc.times.push_back(static_cast<double>(i + 1) / samples);
        arc.mats.push_back(m);
    }
    return arc;
}

bool arc_is_symplectic(const Sp2Arc& arc, double tol) {
    return std::all_of(arc.mats.begin(), arc.mats.end(),
                       [&](const Mat2& m) { return std::abs(mat2_det(m) - 1.0) <= tol; });
}

}  // namespace symcap
