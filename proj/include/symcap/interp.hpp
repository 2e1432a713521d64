#pragma once
#include <cstddef>
#include <vector>

namespace symcap::interp {

/// Cubic through nodes -1, 0, 1, 2 evaluated at f in [0,1].
inline double lagrange4(double ym, double y0, double y1, double y2, double f) {
    const double c1 = -ym / 3.0 - 0.5 * y0 + y1 - y2 / 6.0;
    const double c2 = 0.5 * ym - y0 + 0.5 * y1;
    const double c3 = (y2 - ym) / 6.0 + 0.5 * (y0 - y1);
    return y0 + f * (c1 + f * (c2 + f * c3));
}

/// Local Lagrange interpolation on the uniform grid x_i = i*h, i = 0..n-1,
/// using `order` nodes around s = x/h (stencil shifted inward at the ends).
/// Returns value and, if deriv != nullptr, the derivative with respect to x.
double uniform(const double* y, std::size_t n, double h, double x, int order = 6, double* deriv = nullptr);

/// Same on a periodic grid of n nodes with spacing h (x any real).
double periodic(const double* y, std::size_t n, double h, double x, int order = 6, double* deriv = nullptr);

/// Strided variants for walking one index of a row-major grid.
double uniform_strided(const double* y, std::size_t n, std::size_t stride, double h, double x, int order = 6,
                       double* deriv = nullptr);
double periodic_strided(const double* y, std::size_t n, std::size_t stride, double h, double x, int order = 6,
                        double* deriv = nullptr);

/// Tensor-product interpolation on a polar grid: rows r_i = i/(n_r-1) (stencil
/// clamped at the ends), columns theta_j = 2 pi j / n_theta (periodic).
/// data is row-major n_r x n_theta.
struct Polar2 {
    double value = 0.0, d_r = 0.0, d_theta = 0.0;
};
Polar2 polar(const double* data, int n_r, int n_theta, double r, double theta, int order = 6);

/// Cumulative integral F_i = int_{x_0}^{x_i} y dx of uniformly sampled data,
/// integrating a local degree-(order-1) interpolant over each cell.
std::vector<double> cumulative(const double* y, std::size_t n, double h, std::size_t stride = 1, int order = 6);

/// Derivative at every node from the local interpolant.
std::vector<double> derivative(const double* y, std::size_t n, double h, std::size_t stride = 1, int order = 7);
std::vector<double> periodic_derivative(const double* y, std::size_t n, double h, std::size_t stride = 1,
                                        int order = 7);

/// Quadrature weights for a uniform grid: composite Simpson, with a 3/8 panel
/// when the number of intervals is odd.
std::vector<double> simpson_weights(std::size_t n, double h);

/// Gauss-Legendre nodes and weights on [a,b].
void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w);

}  // namespace symcap::interp
