#include "symcap/interp.hpp"

#include "symcap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace symcap::interp {

namespace {

// Lagrange basis values (and derivatives) at s for nodes first..first+order-1.
void basis(long first, int order, double s, double* w, double* dw) {
    for (int j = 0; j < order; ++j) {
        const double xj = static_cast<double>(first + j);
        double num = 1.0, den = 1.0;
        for (int m = 0; m < order; ++m) {
            if (m == j) continue;
            const double xm = static_cast<double>(first + m);
            num *= s - xm;
            den *= xj - xm;
        }
        w[j] = num / den;
        if (dw) {
            double d = 0.0;
            for (int m = 0; m < order; ++m) {
                if (m == j) continue;
                double p = 1.0;
                for (int q = 0; q < order; ++q) {
                    if (q == j || q == m) continue;
                    p *= s - static_cast<double>(first + q);
                }
                d += p;
            }
            dw[j] = d / den;
        }
    }
}

double eval(const double* y, std::size_t n, std::size_t stride, double h, double x, int order, double* deriv,
            bool wrap) {
    if (n == 0) throw InputError("interpolation on an empty grid");
    const double s = x / h;
    if (!wrap) order = std::min<int>(order, static_cast<int>(n));
    long first = static_cast<long>(std::floor(s)) - (order - 1) / 2;
    if (!wrap) first = std::clamp<long>(first, 0, static_cast<long>(n) - order);
    double w[16], dw[16];
    basis(first, order, s, w, deriv ? dw : nullptr);
    double v = 0.0, d = 0.0;
    const long nn = static_cast<long>(n);
    for (int j = 0; j < order; ++j) {
        long idx = first + j;
        if (wrap) idx = ((idx % nn) + nn) % nn;
        const double yj = y[static_cast<std::size_t>(idx) * stride];
        v += w[j] * yj;
        if (deriv) d += dw[j] * yj;
    }
    if (deriv) *deriv = d / h;
    return v;
}

}  // namespace

double uniform(const double* y, std::size_t n, double h, double x, int order, double* deriv) {
    return eval(y, n, 1, h, x, order, deriv, false);
}
double periodic(const double* y, std::size_t n, double h, double x, int order, double* deriv) {
    return eval(y, n, 1, h, x, order, deriv, true);
}
double uniform_strided(const double* y, std::size_t n, std::size_t stride, double h, double x, int order,
                       double* deriv) {
    return eval(y, n, stride, h, x, order, deriv, false);
}
double periodic_strided(const double* y, std::size_t n, std::size_t stride, double h, double x, int order,
                        double* deriv) {
    return eval(y, n, stride, h, x, order, deriv, true);
}

Polar2 polar(const double* data, int n_r, int n_theta, double r, double theta, int order) {
    const int orr = std::min(order, n_r);
    const double hr = 1.0 / (n_r - 1);
    const double ht = 2.0 * std::numbers::pi / n_theta;
    const double sr = r / hr, st = theta / ht;
    long fr = static_cast<long>(std::floor(sr)) - (orr - 1) / 2;
    fr = std::clamp<long>(fr, 0, n_r - orr);
    const long ft = static_cast<long>(std::floor(st)) - (order - 1) / 2;
    double wr[16], dwr[16], wt[16], dwt[16];
    basis(fr, orr, sr, wr, dwr);
    basis(ft, order, st, wt, dwt);
    int cols[16];
    for (int b = 0; b < order; ++b) cols[b] = static_cast<int>(((ft + b) % n_theta + n_theta) % n_theta);
    Polar2 out;
    for (int a = 0; a < orr; ++a) {
        const double* row = data + static_cast<std::size_t>(fr + a) * n_theta;
        double v = 0.0, dv = 0.0;
        for (int b = 0; b < order; ++b) {
            v += wt[b] * row[cols[b]];
            dv += dwt[b] * row[cols[b]];
        }
        out.value += wr[a] * v;
        out.d_r += dwr[a] * v;
        out.d_theta += wr[a] * dv;
    }
    out.d_r /= hr;
    out.d_theta /= ht;
    return out;
}

std::vector<double> cumulative(const double* y, std::size_t n, double h, std::size_t stride, int order) {
    std::vector<double> out(n, 0.0);
    if (n < 2) return out;
    order = std::min<int>(order, static_cast<int>(n));
    // Four-point Gauss rule: exact for interpolants up to degree 7.
    static const double gt[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                 0.8611363115940526};
    static const double gwt[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                  0.3478548451374538};
    for (std::size_t i = 0; i + 1 < n; ++i) {
        long first = static_cast<long>(i) - (order - 1) / 2;
        first = std::clamp<long>(first, 0, static_cast<long>(n) - order);
        double cell = 0.0;
        for (int g = 0; g < 4; ++g) {
            double w[16];
            basis(first, order, static_cast<double>(i) + 0.5 + 0.5 * gt[g], w, nullptr);
            double v = 0.0;
            for (int j = 0; j < order; ++j) v += w[j] * y[static_cast<std::size_t>(first + j) * stride];
            cell += 0.5 * gwt[g] * v;
        }
        out[i + 1] = out[i] + h * cell;
    }
    return out;
}

std::vector<double> derivative(const double* y, std::size_t n, double h, std::size_t stride, int order) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) uniform_strided(y, n, stride, h, static_cast<double>(i) * h, order, &out[i]);
    return out;
}

std::vector<double> periodic_derivative(const double* y, std::size_t n, double h, std::size_t stride, int order) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        periodic_strided(y, n, stride, h, static_cast<double>(i) * h, order, &out[i]);
    return out;
}

std::vector<double> simpson_weights(std::size_t n, double h) {
    std::vector<double> w(n, 0.0);
    if (n < 2) return w;
    const std::size_t intervals = n - 1;
    if (intervals == 1) {
        w[0] = w[1] = 0.5 * h;
        return w;
    }
    std::size_t simpson_end = intervals;  // index where the Simpson part stops
    if (intervals % 2 == 1) simpson_end = intervals - 3;
    for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if (intervals % 2 == 1) {
        const std::size_t i = simpson_end;
        w[i] += 3.0 * h / 8.0;
        w[i + 1] += 9.0 * h / 8.0;
        w[i + 2] += 9.0 * h / 8.0;
        w[i + 3] += 3.0 * h / 8.0;
    }
    return w;
}

void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = 0.5 * (a + b) - 0.5 * (b - a) * z;
        w[i] = (b - a) / ((1.0 - z * z) * dp * dp);
    }
}

}  // namespace symcap::interp
