#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symcap/errors.hpp"
#include "symcap/genfun.hpp"

#include <cmath>
#include <numbers>

using namespace symcap;
using std::numbers::pi;

namespace {

// amp * (1 - |z|^2/0.49)^6 * (1 + 0.3 x y cos 2 pi t + 0.2 x), supported in the disk of radius 0.7.
struct BumpHamiltonian {
    double amp;
    std::array<double, 3> operator()(double t, double x, double y) const {
        const double rho2 = 0.49, r2 = (x * x + y * y) / rho2;
        if (r2 >= 1) return {0, 0, 0};
        const double u = 1 - r2, u5 = std::pow(u, 5), p = u5 * u;
        const double c = std::cos(2 * pi * t);
        const double q = 1 + 0.3 * x * y * c + 0.2 * x;
        const double px = -12 * u5 * x / rho2, py = -12 * u5 * y / rho2;
        return {amp * p * q, amp * (px * q + p * (0.3 * y * c + 0.2)), amp * (py * q + p * 0.3 * x * c)};
    }
    std::function<std::array<double, 2>(double, double, double)> gradient() const {
        auto self = *this;
        return [self](double t, double x, double y) {
            const auto h = self(t, x, y);
            return std::array<double, 2>{h[1], h[2]};
        };
    }
};

// Fixed point of the time-one map near the origin, by Newton with difference quotients.
std::array<double, 2> fixed_point(const BumpHamiltonian& H) {
    const auto g = H.gradient();
    double x = 0, y = 0;
    for (int it = 0; it < 20; ++it) {
        const double h = 1e-6;
        const auto f = planar_flow(g, x, y, 0, 1, 512);
        const auto fx = planar_flow(g, x + h, y, 0, 1, 512), fy = planar_flow(g, x, y + h, 0, 1, 512);
        const double a = (fx[0] - f[0]) / h - 1, b = (fy[0] - f[0]) / h, c = (fx[1] - f[1]) / h,
                     d = (fy[1] - f[1]) / h - 1;
        const double r1 = f[0] - x, r2 = f[1] - y, det = a * d - b * c;
        x -= (d * r1 - b * r2) / det;
        y -= (-c * r1 + a * r2) / det;
    }
    return {x, y};
}

// Action of the closed orbit through p: integral of lambda_0 plus H along it.
double orbit_action(const BumpHamiltonian& H, double x, double y) {
    const int n = 4096;
    const double h = 1.0 / n;
    double act = 0;
    auto field = [&](double t, double a, double c) {
        const auto v = H(t, a, c);
        return std::array<double, 3>{v[2], -v[1], 0.5 * (a * -v[1] - c * v[2]) + v[0]};
    };
    for (int s = 0; s < n; ++s) {
        const double t = s * h;
        const auto k1 = field(t, x, y);
        const auto k2 = field(t + h / 2, x + h / 2 * k1[0], y + h / 2 * k1[1]);
        const auto k3 = field(t + h / 2, x + h / 2 * k2[0], y + h / 2 * k2[1]);
        const auto k4 = field(t + h, x + h * k3[0], y + h * k3[1]);
        x += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
        y += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
        act += h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]);
    }
    return act;
}

PlanarIsotopy single_slice(const PlanarGenFun& W) {
    PlanarIsotopy iso;
    iso.n_t = 4;
    for (int k = 0; k < 4; ++k) iso.H.insert(iso.H.end(), W.W.begin(), W.W.end());
    return iso;
}

}  // namespace

TEST_CASE("identity map has zero generating function") {
    const PlanarBox box{-1, 1, 33};
    const auto id = sample_planar_map(box, [](double x, double y) { return std::array<double, 2>{x, y}; });
    const auto W = planar_genfun_from_map(id);
    for (double v : W.W) CHECK(std::abs(v) < 1e-14);
    const auto iso = planar_isotopy_hamiltonian(W, 8);
    for (double v : iso.H) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("shear generating function") {
    const PlanarBox box{-1, 1, 129};
    const double eps = 0.1;
    const auto sh = sample_planar_map(box, [&](double x, double y) { return std::array<double, 2>{x + eps * y, y}; });
    const auto W = planar_genfun_from_map(sh);
    const int j0 = (box.n - 1) / 2;
    double e = 0;
    for (int i = 0; i < box.n; ++i)
        for (int j = 0; j < box.n; ++j) {
            const double y = box.at(j);
            e = std::max(e, std::abs(W.W[i * box.n + j] - W.W[i * box.n + j0] - eps * y * y / 2));
        }
    CHECK(e < 1e-10);
    CHECK(W.residual < 1e-9);
    const auto far = sample_planar_map(box, [](double x, double y) { return std::array<double, 2>{x + 0.5 * y, y}; });
    CHECK_THROWS_AS(planar_genfun_from_map(far), HypothesisError);
}

TEST_CASE("compactly supported Hamiltonian: fixed point value, isotopy, positivity") {
    const PlanarBox box{-1, 1, 129};
    const BumpHamiltonian H{0.006};
    const auto phi = sample_planar_map(box, [&](double x, double y) { return planar_flow(H.gradient(), x, y, 0, 1, 256); });
    const auto W = planar_genfun_from_map(phi);
    double edge = 0;
    for (int i = 0; i < box.n; ++i)
        for (int j = 0; j < box.n; ++j)
            if (i == 0 || j == 0 || i == box.n - 1 || j == box.n - 1) edge = std::max(edge, std::abs(W.W[i * box.n + j]));
    CHECK(edge < 1e-9);

    const auto p = fixed_point(H);
    const double act = orbit_action(H, p[0], p[1]);
    const double w = planar_isotopy_eval(single_slice(W), box, 0.5, p[0], p[1])[0];
    CHECK(std::abs(act - w) < 1e-5);

    const auto M = planar_map_from_genfun(W, 1.0);
    double em = 0;
    for (std::size_t k = 0; k < W.W.size(); ++k) em = std::max({em, std::abs(M.X[k] - phi.X[k]), std::abs(M.Y[k] - phi.Y[k])});
    CHECK(em < 1e-6);

    const auto iso = planar_isotopy_hamiltonian(W, 64);
    CHECK(iso.min_value >= -1e-8);
    double e0 = 0;
    for (std::size_t k = 0; k < W.W.size(); ++k) e0 = std::max(e0, std::abs(iso.H[k] - W.W[k]));
    CHECK(e0 < 1e-8);

    auto g = [&](double t, double a, double c) {
        const auto v = planar_isotopy_eval(iso, box, t, a, c);
        return std::array<double, 2>{v[1], v[2]};
    };
    double ef = 0;
    for (int i = 8; i < box.n - 8; i += 8)
        for (int j = 8; j < box.n - 8; j += 8) {
            const auto q = planar_flow(g, box.at(i), box.at(j), 0, 1, 128);
            const std::size_t k = i * box.n + j;
            ef = std::max({ef, std::abs(q[0] - M.X[k]), std::abs(q[1] - M.Y[k])});
        }
    CHECK(ef < 1e-6);
}

TEST_CASE("negative critical value shows up in the extracted Hamiltonian") {
    const PlanarBox box{-1, 1, 65};
    const BumpHamiltonian H{-0.006};
    const auto phi = sample_planar_map(box, [&](double x, double y) { return planar_flow(H.gradient(), x, y, 0, 1, 128); });
    const auto W = planar_genfun_from_map(phi);
    const auto iso = planar_isotopy_hamiltonian(W, 16);
    CHECK(iso.min_value < -1e-3);
    const auto p = fixed_point(H);
    for (double t : {0.0, 0.5, 1.0}) CHECK(planar_isotopy_eval(iso, box, t, p[0], p[1])[0] < -1e-3);
}

TEST_CASE("planar input validation") {
    CHECK_THROWS_AS(sample_planar_map(PlanarBox{-1, 1, 4}, [](double x, double y) { return std::array<double, 2>{x, y}; }),
                    InputError);
    const PlanarBox box{-1, 1, 17};
    PlanarGenFun W{box, std::vector<double>(17 * 17, 0.0), 0.0};
    CHECK_THROWS_AS(planar_isotopy_hamiltonian(W, 2), InputError);
}
