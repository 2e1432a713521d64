#include "symcap/errors.hpp"
#include "symcap/genfun.hpp"
#include "symcap/interp.hpp"
#include "symcap/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace symcap {

namespace {

std::size_t pidx(const PlanarBox& b, int i, int j) { return static_cast<std::size_t>(i) * b.n + j; }

// Derivative along i (stride n) and along j of a box grid.
void box_gradients(const PlanarBox& b, const std::vector<double>& f, std::vector<double>& d_i,
                   std::vector<double>& d_j) {
    const std::size_t N = static_cast<std::size_t>(b.n) * b.n;
    d_i.assign(N, 0.0);
    d_j.assign(N, 0.0);
    for (int j = 0; j < b.n; ++j) {
        auto c = interp::derivative(&f[j], b.n, b.h(), b.n);
        for (int i = 0; i < b.n; ++i) d_i[pidx(b, i, j)] = c[i];
    }
    for (int i = 0; i < b.n; ++i) {
        auto r = interp::derivative(&f[pidx(b, i, 0)], b.n, b.h());
        std::copy(r.begin(), r.end(), d_j.begin() + pidx(b, i, 0));
    }
}

// Root of an increasing interpolated column through safeguarded Newton on [lo, hi].
double invert_column(const double* y, int n, std::size_t stride, double h, double origin, double target,
                     double guess, double lo, double hi) {
    auto f = [&](double x) {
        double d = 0.0;
        const double v = interp::uniform_strided(y, n, stride, h, x - origin, 6, &d) - target;
        return std::pair{v, d};
    };
    double x = std::clamp(guess, lo, hi);
    for (int it = 0; it < 80; ++it) {
        auto [v, d] = f(x);
        if (v < 0) lo = x;
        else hi = x;
        double nx = d > 0 ? x - v / d : 0.5 * (lo + hi);
        if (!(nx >= lo && nx <= hi)) nx = 0.5 * (lo + hi);
        const double step = std::abs(nx - x);
        x = nx;
        if (step < 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

double c1_distance(const PlanarMap& phi) {
    const auto& b = phi.box;
    const std::size_t N = static_cast<std::size_t>(b.n) * b.n;
    std::vector<double> u(N), v(N);
    for (int i = 0; i < b.n; ++i)
        for (int j = 0; j < b.n; ++j) {
            u[pidx(b, i, j)] = phi.X[pidx(b, i, j)] - b.at(i);
            v[pidx(b, i, j)] = phi.Y[pidx(b, i, j)] - b.at(j);
        }
    std::vector<double> ui, uj, vi, vj;
    box_gradients(b, u, ui, uj);
    box_gradients(b, v, vi, vj);
    double m = 0.0;
    for (std::size_t k = 0; k < N; ++k)
        m = std::max({m, std::abs(u[k]), std::abs(v[k]), std::abs(ui[k]), std::abs(uj[k]), std::abs(vi[k]),
                      std::abs(vj[k])});
    return m;
}

}  // namespace

PlanarMap sample_planar_map(const PlanarBox& box, const std::function<std::array<double, 2>(double, double)>& f) {
    if (box.n < 8 || !(box.hi > box.lo)) throw InputError("planar box needs n >= 8 and hi > lo");
    PlanarMap m;
    m.box = box;
    m.X.resize(static_cast<std::size_t>(box.n) * box.n);
    m.Y.resize(m.X.size());
    for (int i = 0; i < box.n; ++i)
        for (int j = 0; j < box.n; ++j) {
            const auto p = f(box.at(i), box.at(j));
            m.X[pidx(box, i, j)] = p[0];
            m.Y[pidx(box, i, j)] = p[1];
        }
    return m;
}

std::array<double, 2> planar_flow(const std::function<std::array<double, 2>(double, double, double)>& grad_H,
                                  double x, double y, double t0, double t1, int steps) {
    const double h = (t1 - t0) / steps;
    auto field = [&](double t, double a, double b) {
        const auto g = grad_H(t, a, b);
        return std::array<double, 2>{g[1], -g[0]};
    };
    for (int s = 0; s < steps; ++s) {
        const double t = t0 + s * h;
        const auto k1 = field(t, x, y);
        const auto k2 = field(t + 0.5 * h, x + 0.5 * h * k1[0], y + 0.5 * h * k1[1]);
        const auto k3 = field(t + 0.5 * h, x + 0.5 * h * k2[0], y + 0.5 * h * k2[1]);
        const auto k4 = field(t + h, x + h * k3[0], y + h * k3[1]);
        x += h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
        y += h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    }
    return {x, y};
}

PlanarGenFun planar_genfun_from_map(const PlanarMap& phi, double c1_limit) {
    const auto& b = phi.box;
    const double dist = c1_distance(phi);
    if (dist > c1_limit)
        throw HypothesisError("generating_functions", "planar map is too far from the identity in C1 (" +
                                                          std::to_string(dist) + " > " + std::to_string(c1_limit) + ")");
    const std::size_t N = static_cast<std::size_t>(b.n) * b.n;
    const double width = b.hi - b.lo;
    std::vector<double> g1(N), g2(N);
    parallel_for(static_cast<std::size_t>(b.n), [&](std::size_t jj) {
        const int j = static_cast<int>(jj);
        for (int k = 0; k < b.n; ++k) {
            const double Xk = b.at(k);
            const double x = invert_column(&phi.X[j], b.n, b.n, b.h(), b.lo, Xk,
                                           Xk - (phi.X[pidx(b, k, j)] - Xk), b.lo - width, b.hi + width);
            const double Y = interp::uniform_strided(&phi.Y[j], b.n, b.n, b.h(), x - b.lo);
            g2[pidx(b, k, j)] = Xk - x;
            g1[pidx(b, k, j)] = -(Y - b.at(j));
        }
    });
    PlanarGenFun out;
    out.box = b;
    out.W.assign(N, 0.0);
    std::vector<double> left(b.n);
    for (int j = 0; j < b.n; ++j) left[j] = g2[pidx(b, 0, j)];
    const auto anchor = interp::cumulative(left.data(), b.n, b.h());
    for (int j = 0; j < b.n; ++j) {
        auto c = interp::cumulative(&g1[j], b.n, b.h(), b.n);
        for (int k = 0; k < b.n; ++k) out.W[pidx(b, k, j)] = anchor[j] + c[k];
    }
    std::vector<double> wi, wj;
    box_gradients(b, out.W, wi, wj);
    for (std::size_t k = 0; k < N; ++k) out.residual = std::max(out.residual, std::abs(wj[k] - g2[k]));
    return out;
}

PlanarMap planar_map_from_genfun(const PlanarGenFun& W, double t) {
    const auto& b = W.box;
    const std::size_t N = static_cast<std::size_t>(b.n) * b.n;
    std::vector<double> wi, wj;
    box_gradients(b, W.W, wi, wj);
    std::vector<double> xsrc(N), Yimg(N);
    for (int k = 0; k < b.n; ++k)
        for (int j = 0; j < b.n; ++j) {
            const auto idx = pidx(b, k, j);
            xsrc[idx] = b.at(k) - t * wj[idx];
            Yimg[idx] = b.at(j) - t * wi[idx];
        }
    for (int j = 0; j < b.n; ++j)
        for (int k = 0; k + 1 < b.n; ++k)
            if (!(xsrc[pidx(b, k + 1, j)] > xsrc[pidx(b, k, j)]))
                throw HypothesisError("generating_functions", "planar generating function is too large for the change of variables");
    PlanarMap out;
    out.box = b;
    out.X.resize(N);
    out.Y.resize(N);
    const double width = b.hi - b.lo;
    parallel_for(static_cast<std::size_t>(b.n), [&](std::size_t jj) {
        const int j = static_cast<int>(jj);
        for (int i = 0; i < b.n; ++i) {
            const double xi = b.at(i);
            const double X = invert_column(&xsrc[j], b.n, b.n, b.h(), b.lo, xi, xi, b.lo - width, b.hi + width);
            out.X[pidx(b, i, j)] = X;
            out.Y[pidx(b, i, j)] = interp::uniform_strided(&Yimg[j], b.n, b.n, b.h(), X - b.lo);
        }
    });
    return out;
}

PlanarIsotopy planar_isotopy_hamiltonian(const PlanarGenFun& W, int n_steps, double c1_limit) {
    if (n_steps < 3) throw InputError("isotopy needs at least 3 time steps");
    const auto& b = W.box;
    const std::size_t N = static_cast<std::size_t>(b.n) * b.n;
    std::vector<double> wi, wj, wii, wij, wji, wjj;
    box_gradients(b, W.W, wi, wj);
    box_gradients(b, wi, wii, wij);
    box_gradients(b, wj, wji, wjj);
    double hess = 0.0;
    for (std::size_t k = 0; k < N; ++k) hess = std::max({hess, std::abs(wii[k]), std::abs(wij[k]), std::abs(wjj[k])});
    if (hess > c1_limit)
        throw HypothesisError("generating_functions", "generating function violates the C2 smallness bound (" +
                                                          std::to_string(hess) + ")");

    const int n_t = n_steps + 1;
    const double dt = 1.0 / n_steps;
    // Image heights Y_t(X, y) = y - t dW/dX on every time node.
    std::vector<double> Yt(static_cast<std::size_t>(n_t) * N);
    for (int k = 0; k < n_t; ++k)
        for (int i = 0; i < b.n; ++i)
            for (int j = 0; j < b.n; ++j)
                Yt[k * N + pidx(b, i, j)] = b.at(j) - k * dt * wi[pidx(b, i, j)];

    PlanarIsotopy iso;
    iso.n_t = n_t;
    iso.H.assign(static_cast<std::size_t>(n_t) * N, 0.0);
    parallel_for(static_cast<std::size_t>(n_t), [&](std::size_t kk) {
        const double t = kk * dt;
        const double* Yk = &Yt[kk * N];
        std::vector<double> himg(N), q(b.n);
        for (int j = 0; j < b.n; ++j) {
            for (int i = 0; i < b.n; ++i) {
                double vel = 0.0;
                interp::uniform_strided(&Yt[pidx(b, i, j)], n_t, N, dt, t, 4, &vel);
                q[i] = -vel;
            }
            auto c = interp::cumulative(q.data(), b.n, b.h());
            for (int i = 0; i < b.n; ++i) himg[pidx(b, i, j)] = c[i];
        }
        double* Hk = &iso.H[kk * N];
        const double width = b.hi - b.lo;
        for (int i = 0; i < b.n; ++i)
            for (int m = 0; m < b.n; ++m) {
                const double y = invert_column(&Yk[pidx(b, i, 0)], b.n, 1, b.h(), b.lo, b.at(m), b.at(m), b.lo - width,
                                               b.hi + width);
                Hk[pidx(b, i, m)] = interp::uniform(&himg[pidx(b, i, 0)], b.n, b.h(), y - b.lo);
            }
    });
    iso.min_value = *std::min_element(iso.H.begin(), iso.H.end());
    return iso;
}

std::array<double, 3> planar_isotopy_eval(const PlanarIsotopy& iso, const PlanarBox& box, double t, double x,
                                          double y) {
    const std::size_t N = static_cast<std::size_t>(box.n) * box.n;
    const double dt = 1.0 / (iso.n_t - 1);
    const int ot = std::min(4, iso.n_t);
    const int ft = std::clamp(static_cast<int>(std::floor(t / dt)) - 1, 0, iso.n_t - ot);
    const int ox = std::min(6, box.n);
    const int fx = std::clamp(static_cast<int>(std::floor((x - box.lo) / box.h())) - 2, 0, box.n - ox);
    double tv[4], tdx[4], tdy[4];
    for (int a = 0; a < ot; ++a) {
        const double* Hk = &iso.H[static_cast<std::size_t>(ft + a) * N];
        double rv[6], rd[6];
        for (int c = 0; c < ox; ++c)
            rv[c] = interp::uniform(&Hk[pidx(box, fx + c, 0)], box.n, box.h(), y - box.lo, 6, &rd[c]);
        double dxv = 0.0;
        tv[a] = interp::uniform(rv, ox, box.h(), x - box.at(fx), ox, &dxv);
        tdx[a] = dxv;
        tdy[a] = interp::uniform(rd, ox, box.h(), x - box.at(fx), ox);
    }
    const double ts = t - ft * dt;
    return {interp::uniform(tv, ot, dt, ts, ot), interp::uniform(tdx, ot, dt, ts, ot),
            interp::uniform(tdy, ot, dt, ts, ot)};
}

}  // namespace symcap
