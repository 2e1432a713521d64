#include "symcap/disk_maps.hpp"

#include "symcap/errors.hpp"
#include "symcap/interp.hpp"
#include "symcap/parallel.hpp"
#include "symcap/rng.hpp"
#include "symcap/section.hpp"
#include "symcap/simd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace symcap {

using std::numbers::pi;

double PolarGrid::theta_at(int j) const { return 2.0 * pi * j / n_theta; }
double DiskHamiltonian::area() const { return pi * radius_ * radius_; }

std::string provenance_name(Provenance p) {
    switch (p) {
        case Provenance::hamiltonian_isotopy: return "hamiltonian_isotopy";
        case Provenance::section_data: return "section_data";
        case Provenance::composition: return "composition";
    }
    return "?";
}

double smooth_step(double x, double* deriv) {
    if (x <= 0.0 || x >= 1.0) {
        if (deriv) *deriv = 0.0;
        return x <= 0.0 ? 0.0 : 1.0;
    }
    const double u = x * (1.0 - x), u5 = u * u * u * u * u;
    if (deriv) *deriv = 2772.0 * u5;
    const double x3 = x * x * x;
    return x3 * x3 * (462.0 + x * (-1980.0 + x * (3465.0 + x * (-3080.0 + x * (1386.0 - 252.0 * x)))));
}

namespace {

std::array<double, 2> polar_to_cartesian_grad(double rho, double th, double h_rho, double h_th) {
    const double c = std::cos(th), s = std::sin(th);
    return {h_rho * c - h_th * s / rho, h_rho * s + h_th * c / rho};
}

class FunctionHamiltonian : public DiskHamiltonian {
public:
    FunctionHamiltonian(double radius, std::function<double(double, double, double)> v,
                        std::function<std::array<double, 2>(double, double, double)> g)
        : DiskHamiltonian(radius), v_(std::move(v)), g_(std::move(g)) {}
    double value(double t, double x, double y) const override { return v_(t, x, y); }
    std::array<double, 2> gradient(double t, double x, double y) const override { return g_(t, x, y); }

private:
    std::function<double(double, double, double)> v_;
    std::function<std::array<double, 2>(double, double, double)> g_;
};

class TwistHamiltonian : public DiskHamiltonian {
public:
    TwistHamiltonian(double radius, double inner, double outer, double r0, double r1)
        : DiskHamiltonian(radius), inner_(inner), outer_(outer), r0_(r0), r1_(r1) {
        if (!(0.0 < r0 && r0 < r1 && r1 < 1.0)) throw InputError("twist bands need 0 < r0 < r1 < 1");
        interp::gauss_legendre(24, 0.0, 1.0, gx_, gw_);
    }
    double rate(double rho) const {
        return inner_ + (outer_ - inner_) * smooth_step((rho / radius() - r0_) / (r1_ - r0_));
    }
    double value(double, double x, double y) const override {
        const double s = radius();
        const double rho = std::hypot(x, y);
        // int_rho^s sigma * rate(sigma) dsigma
        double v = inner_ * 0.5 * (s * s - rho * rho);
        const double a = r0_ * s, b = r1_ * s;
        const double lo = std::max(rho, b);
        v += (outer_ - inner_) * 0.5 * (s * s - lo * lo);
        if (rho < b) {
            const double from = std::max(rho, a);
            double part = 0.0;
            for (std::size_t q = 0; q < gx_.size(); ++q) {
                const double sig = from + (b - from) * gx_[q];
                part += gw_[q] * sig * smooth_step((sig / s - r0_) / (r1_ - r0_));
            }
            v += (outer_ - inner_) * part * (b - from);
        }
        return v;
    }
    std::array<double, 2> gradient(double, double x, double y) const override {
        const double w = rate(std::hypot(x, y));
        return {-w * x, -w * y};
    }

private:
    double inner_, outer_, r0_, r1_;
    std::vector<double> gx_, gw_;
};

class AnnularPerturbation : public DiskHamiltonian {
public:
    AnnularPerturbation(double radius, double r0, double r1, std::vector<AngularMode> modes)
        : DiskHamiltonian(radius), r0_(r0), r1_(r1), modes_(std::move(modes)) {
        if (!(0.0 <= r0 && r0 < r1 && r1 <= 1.0)) throw InputError("perturbation support needs 0 <= r0 < r1 <= 1");
    }
    // (1 - x^2)^6 on the support: C^5, and tame enough for grid derivatives
    // (exp(-1/x) steps have huge high derivatives at these widths).
    double bump(double r, double* d) const {
        const double w = 0.5 * (r1_ - r0_);
        const double x = (r - 0.5 * (r0_ + r1_)) / w;
        if (std::abs(x) >= 1.0) {
            if (d) *d = 0.0;
            return 0.0;
        }
        const double u = 1.0 - x * x, u2 = u * u, u5 = u2 * u2 * u;
        if (d) *d = -12.0 * x * u5 / w;
        return u5 * u;
    }
    double angular(double t, double th, double* dth) const {
        double v = 0.0, d = 0.0;
        for (const auto& m : modes_) {
            const double arg = m.k * th - m.phase + 2.0 * pi * m.m * t;
            v += m.amp * std::cos(arg);
            d -= m.amp * m.k * std::sin(arg);
        }
        if (dth) *dth = d;
        return v;
    }
    double value(double t, double x, double y) const override {
        const double r = std::hypot(x, y) / radius();
        if (r <= r0_ || r >= r1_) return 0.0;
        return bump(r, nullptr) * angular(t, std::atan2(y, x), nullptr);
    }
    std::array<double, 2> gradient(double t, double x, double y) const override {
        const double rho = std::hypot(x, y);
        const double r = rho / radius();
        if (r <= r0_ || r >= r1_) return {0.0, 0.0};
        const double th = std::atan2(y, x);
        double db, da;
        const double b = bump(r, &db);
        const double a = angular(t, th, &da);
        return polar_to_cartesian_grad(rho, th, db * a / radius(), b * da);
    }

private:
    double r0_, r1_;
    std::vector<AngularMode> modes_;
};

class RandomPolynomialHamiltonian : public DiskHamiltonian {
public:
    RandomPolynomialHamiltonian(double radius, std::uint64_t seed, double amplitude) : DiskHamiltonian(radius) {
        CounterRng rng(seed);
        for (int p = 0; p <= 3; ++p)
            for (int q = 0; p + q <= 3; ++q) {
                Term t;
                t.p = p;
                t.q = q;
                t.a = amplitude * rng.normal();
                t.b = amplitude * 0.5 * rng.normal();
                t.c = amplitude * 0.5 * rng.normal();
                terms_.push_back(t);
            }
    }
    double value(double t, double x, double y) const override {
        const double u = x / radius(), v = y / radius();
        return (1.0 - u * u - v * v) * poly(t, u, v, nullptr);
    }
    std::array<double, 2> gradient(double t, double x, double y) const override {
        const double u = x / radius(), v = y / radius();
        double g[2];
        const double P = poly(t, u, v, g);
        const double c = 1.0 - u * u - v * v;
        return {(-2.0 * u * P + c * g[0]) / radius(), (-2.0 * v * P + c * g[1]) / radius()};
    }

private:
    struct Term {
        int p, q;
        double a, b, c;
    };
    std::vector<Term> terms_;
    double poly(double t, double u, double v, double* g) const {
        const double ct = std::cos(2.0 * pi * t), st = std::sin(2.0 * pi * t);
        const double pu[4] = {1.0, u, u * u, u * u * u}, pv[4] = {1.0, v, v * v, v * v * v};
        double val = 0.0, gu = 0.0, gv = 0.0;
        for (const auto& tm : terms_) {
            const double k = tm.a + tm.b * ct + tm.c * st;
            val += k * pu[tm.p] * pv[tm.q];
            if (tm.p > 0) gu += k * tm.p * pu[tm.p - 1] * pv[tm.q];
            if (tm.q > 0) gv += k * tm.q * pu[tm.p] * pv[tm.q - 1];
        }
        if (g) {
            g[0] = gu;
            g[1] = gv;
        }
        return val;
    }
};

class SumHamiltonian : public DiskHamiltonian {
public:
    SumHamiltonian(HamiltonianPtr a, HamiltonianPtr b) : DiskHamiltonian(a->radius()), a_(std::move(a)), b_(std::move(b)) {}
    double value(double t, double x, double y) const override { return a_->value(t, x, y) + b_->value(t, x, y); }
    std::array<double, 2> gradient(double t, double x, double y) const override {
        const auto ga = a_->gradient(t, x, y), gb = b_->gradient(t, x, y);
        return {ga[0] + gb[0], ga[1] + gb[1]};
    }
    std::vector<double> breakpoints() const override {
        auto p = a_->breakpoints();
        const auto q = b_->breakpoints();
        p.insert(p.end(), q.begin(), q.end());
        std::sort(p.begin(), p.end());
        p.erase(std::unique(p.begin(), p.end()), p.end());
        return p;
    }

private:
    HamiltonianPtr a_, b_;
};

class ConcatenatedHamiltonian : public DiskHamiltonian {
public:
    ConcatenatedHamiltonian(HamiltonianPtr first, HamiltonianPtr second)
        : DiskHamiltonian(first->radius()), f_(std::move(first)), s_(std::move(second)) {}
    double value(double t, double x, double y) const override {
        return t < 0.5 ? 2.0 * f_->value(2.0 * t, x, y) : 2.0 * s_->value(2.0 * t - 1.0, x, y);
    }
    std::array<double, 2> gradient(double t, double x, double y) const override {
        auto g = t < 0.5 ? f_->gradient(2.0 * t, x, y) : s_->gradient(2.0 * t - 1.0, x, y);
        return {2.0 * g[0], 2.0 * g[1]};
    }
    std::vector<double> breakpoints() const override {
        std::vector<double> p{0.5};
        for (double b : f_->breakpoints()) p.push_back(0.5 * b);
        for (double b : s_->breakpoints()) p.push_back(0.5 + 0.5 * b);
        std::sort(p.begin(), p.end());
        return p;
    }

private:
    HamiltonianPtr f_, s_;
};

class ReversedHamiltonian : public DiskHamiltonian {
public:
    explicit ReversedHamiltonian(HamiltonianPtr h) : DiskHamiltonian(h->radius()), h_(std::move(h)) {}
    double value(double t, double x, double y) const override { return -h_->value(1.0 - t, x, y); }
    std::array<double, 2> gradient(double t, double x, double y) const override {
        const auto g = h_->gradient(1.0 - t, x, y);
        return {-g[0], -g[1]};
    }
    std::vector<double> breakpoints() const override {
        auto p = h_->breakpoints();
        for (double& b : p) b = 1.0 - b;
        std::sort(p.begin(), p.end());
        return p;
    }

private:
    HamiltonianPtr h_;
};

}  // namespace

HamiltonianPtr make_function_hamiltonian(double radius, std::function<double(double, double, double)> value,
                                         std::function<std::array<double, 2>(double, double, double)> gradient) {
    return std::make_shared<FunctionHamiltonian>(radius, std::move(value), std::move(gradient));
}

HamiltonianPtr make_rotation_hamiltonian(double radius, double c) {
    const double s2 = radius * radius;
    return make_function_hamiltonian(
        radius, [c, s2](double, double x, double y) { return 0.5 * c * (s2 - x * x - y * y); },
        [c](double, double x, double y) { return std::array<double, 2>{-c * x, -c * y}; });
}

HamiltonianPtr make_twist_hamiltonian(double radius, double inner_rate, double outer_rate, double r0, double r1) {
    return std::make_shared<TwistHamiltonian>(radius, inner_rate, outer_rate, r0, r1);
}

HamiltonianPtr make_annular_perturbation(double radius, double r0, double r1, std::vector<AngularMode> modes) {
    return std::make_shared<AnnularPerturbation>(radius, r0, r1, std::move(modes));
}

HamiltonianPtr make_random_hamiltonian(double radius, std::uint64_t seed, double amplitude) {
    return std::make_shared<RandomPolynomialHamiltonian>(radius, seed, amplitude);
}

HamiltonianPtr make_sum_hamiltonian(HamiltonianPtr a, HamiltonianPtr b) {
    return std::make_shared<SumHamiltonian>(std::move(a), std::move(b));
}

HamiltonianPtr make_concatenated_hamiltonian(HamiltonianPtr first, HamiltonianPtr second) {
    return std::make_shared<ConcatenatedHamiltonian>(std::move(first), std::move(second));
}

HamiltonianPtr make_reversed_hamiltonian(HamiltonianPtr h) {
    return std::make_shared<ReversedHamiltonian>(std::move(h));
}

// ---------------------------------------------------------------- grid H

GridHamiltonian::GridHamiltonian(double radius, PolarGrid grid, int n_t, bool periodic_in_t, std::vector<double> values)
    : DiskHamiltonian(radius), grid_(grid), n_t_(n_t), periodic_(periodic_in_t), values_(std::move(values)) {
    if (grid_.n_r < 6 || grid_.n_theta < 6 || n_t_ < 1) throw InputError("Hamiltonian grid too small");
    if (!periodic_ && n_t_ < 2) throw InputError("non-periodic Hamiltonian grid needs at least 2 time nodes");
    if (values_.size() != grid_.size() * static_cast<std::size_t>(n_t_))
        throw InputError("Hamiltonian grid has the wrong number of values");
}

std::array<double, 3> GridHamiltonian::polar_eval(double t, double r, double theta) const {
    const std::size_t plane = grid_.size();
    // Lagrange weights in t over 4 nodes
    int order = std::min(4, n_t_);
    double s, h;
    long first;
    if (periodic_) {
        h = 1.0 / n_t_;
        s = t / h;
        first = static_cast<long>(std::floor(s)) - (order - 1) / 2;
    } else {
        h = 1.0 / (n_t_ - 1);
        s = t / h;
        first = std::clamp<long>(static_cast<long>(std::floor(s)) - (order - 1) / 2, 0, n_t_ - order);
    }
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (int a = 0; a < order; ++a) {
        double w = 1.0;
        for (int b = 0; b < order; ++b)
            if (b != a) w *= (s - static_cast<double>(first + b)) / static_cast<double>(a - b);
        long k = first + a;
        if (periodic_) k = ((k % n_t_) + n_t_) % n_t_;
        const auto p = interp::polar(values_.data() + static_cast<std::size_t>(k) * plane, grid_.n_r, grid_.n_theta,
                                     r, theta);
        out[0] += w * p.value;
        out[1] += w * p.d_r;
        out[2] += w * p.d_theta;
    }
    return out;
}

std::vector<double> GridHamiltonian::breakpoints() const {
    std::vector<double> p;
    const int n = periodic_ ? n_t_ : n_t_ - 1;
    for (int k = 1; k < n; ++k) p.push_back(static_cast<double>(k) / n);
    return p;
}

double GridHamiltonian::value(double t, double x, double y) const {
    const double r = std::hypot(x, y) / radius();
    return polar_eval(t, std::min(r, 1.0), std::atan2(y, x))[0];
}

std::array<double, 2> GridHamiltonian::gradient(double t, double x, double y) const {
    const double rho = std::hypot(x, y);
    const double s = radius();
    if (rho < 1e-6 * s) {
        const double e = 1e-6 * s;
        return {(value(t, x + e, y) - value(t, x - e, y)) / (2.0 * e),
                (value(t, x, y + e) - value(t, x, y - e)) / (2.0 * e)};
    }
    const double th = std::atan2(y, x);
    const auto p = polar_eval(t, std::min(rho / s, 1.0), th);
    return polar_to_cartesian_grad(rho, th, p[1] / s, p[2]);
}

// ---------------------------------------------------------------- primitives

ExactTerm make_random_exact_term(double radius, std::uint64_t seed, double amplitude) {
    CounterRng rng(seed);
    std::vector<std::array<double, 3>> terms;  // coeff, p, q
    for (int p = 0; p <= 3; ++p)
        for (int q = 0; p + q <= 3; ++q)
            if (p + q > 0) terms.push_back({amplitude * rng.normal(), double(p), double(q)});
    ExactTerm e;
    e.u = [terms, radius](double x, double y) {
        const double u = x / radius, v = y / radius;
        double s = 0.0;
        for (const auto& t : terms) s += t[0] * std::pow(u, t[1]) * std::pow(v, t[2]);
        return s;
    };
    e.grad = [terms, radius](double x, double y) {
        const double u = x / radius, v = y / radius;
        double gu = 0.0, gv = 0.0;
        for (const auto& t : terms) {
            if (t[1] > 0) gu += t[0] * t[1] * std::pow(u, t[1] - 1) * std::pow(v, t[2]);
            if (t[2] > 0) gv += t[0] * t[2] * std::pow(u, t[1]) * std::pow(v, t[2] - 1);
        }
        return std::array<double, 2>{gu / radius, gv / radius};
    };
    return e;
}

PrimitiveOneForm PrimitiveOneForm::standard(double radius) {
    if (!(radius > 0.0)) throw InputError("disk radius must be positive");
    PrimitiveOneForm f;
    f.kind_ = Kind::half_r2_dtheta;
    f.radius_ = radius;
    return f;
}

PrimitiveOneForm PrimitiveOneForm::from_grid(PolarGrid grid, std::vector<double> h, std::vector<double> density) {
    if (h.size() != grid.size() || density.size() != grid.size()) throw InputError("primitive grid size mismatch");
    PrimitiveOneForm f;
    f.kind_ = Kind::custom_grid;
    f.grid_ = grid;
    f.h_ = std::move(h);
    f.density_ = std::move(density);
    f.radius_ = std::sqrt(std::max(f.boundary_integral(), 0.0) / pi);
    return f;
}

PrimitiveOneForm PrimitiveOneForm::with_exact(ExactTerm u) const {
    PrimitiveOneForm f = *this;
    f.exact_ = std::move(u);
    return f;
}

double PrimitiveOneForm::h(double r, double theta) const {
    if (kind_ == Kind::half_r2_dtheta) return 0.5 * radius_ * radius_ * r * r;
    return interp::polar(h_.data(), grid_.n_r, grid_.n_theta, r, theta).value;
}

double PrimitiveOneForm::density(double r, double theta) const {
    if (kind_ == Kind::half_r2_dtheta) return radius_ * radius_ * r;
    return interp::polar(density_.data(), grid_.n_r, grid_.n_theta, r, theta).value;
}

double PrimitiveOneForm::u_polar(double r, double theta) const {
    if (!exact_) return 0.0;
    return exact_->u(radius_ * r * std::cos(theta), radius_ * r * std::sin(theta));
}

double PrimitiveOneForm::eval(double x, double y, double vx, double vy) const {
    if (kind_ != Kind::half_r2_dtheta) throw InputError("Cartesian evaluation needs the standard primitive");
    double v = 0.5 * (x * vy - y * vx);
    if (exact_) {
        const auto g = exact_->grad(x, y);
        v += g[0] * vx + g[1] * vy;
    }
    return v;
}

double PrimitiveOneForm::boundary_integral() const {
    if (kind_ == Kind::half_r2_dtheta) return pi * radius_ * radius_;
    double s = 0.0;
    const int i = grid_.n_r - 1;
    for (int j = 0; j < grid_.n_theta; ++j) s += h_[grid_.idx(i, j)];
    return s * 2.0 * pi / grid_.n_theta;
}

// ---------------------------------------------------------------- flows

DiskFlowPoint flow_point(const DiskHamiltonian& H, double x, double y, double t0, double t1, int steps,
                         const PrimitiveOneForm* lambda) {
    DiskFlowPoint out{x, y, 0.0, 0.0};
    if (t1 == t0) return out;
    if (steps < 1) throw InputError("flow needs at least one step");
    // pieces split at breakpoints
    std::vector<double> cuts{t0};
    const double lo = std::min(t0, t1), hi = std::max(t0, t1);
    auto bps = H.breakpoints();
    if (t1 < t0) std::reverse(bps.begin(), bps.end());
    for (double b : bps)
        if (b > lo && b < hi) cuts.push_back(b);
    cuts.push_back(t1);

    auto rhs = [&](double t, double a, double b, double px, double py, double out3[3]) {
        const double tt = std::clamp(t, std::min(a, b) + 1e-13, std::max(a, b) - 1e-13);
        const auto g = H.gradient(tt, px, py);
        const double vx = g[1], vy = -g[0];
        out3[0] = vx;
        out3[1] = vy;
        if (!lambda) {
            out3[2] = 0.0;
            return;
        }
        double lam = 0.5 * (px * vy - py * vx);
        if (lambda->has_exact()) {
            const auto gu = lambda->exact()->grad(px, py);
            lam += gu[0] * vx + gu[1] * vy;
        }
        out3[2] = lam + H.value(tt, px, py);
    };

    double px = x, py = y, act = 0.0, ang = 0.0;
    double prev_arg = std::atan2(py, px);
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        const double a = cuts[p], b = cuts[p + 1];
        const int n = std::max(1, static_cast<int>(std::ceil(steps * std::abs(b - a) / std::abs(t1 - t0) - 1e-9)));
        const double dt = (b - a) / n;
        for (int k = 0; k < n; ++k) {
            const double t = a + k * dt;
            double k1[3], k2[3], k3[3], k4[3];
            rhs(t, a, b, px, py, k1);
            rhs(t + 0.5 * dt, a, b, px + 0.5 * dt * k1[0], py + 0.5 * dt * k1[1], k2);
            rhs(t + 0.5 * dt, a, b, px + 0.5 * dt * k2[0], py + 0.5 * dt * k2[1], k3);
            rhs(t + dt, a, b, px + dt * k3[0], py + dt * k3[1], k4);
            px += dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            py += dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
            act += dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);
            const double arg = std::atan2(py, px);
            ang += std::remainder(arg - prev_arg, 2.0 * pi);
            prev_arg = arg;
        }
    }
    out.x = px;
    out.y = py;
    out.action = act;
    out.angle_change = ang;
    return out;
}

namespace {

void check_boundary_normalization(const DiskHamiltonian& H) {
    const double s = H.radius();
    for (int k = 0; k <= 8; ++k) {
        const double t = k / 8.0;
        for (int j = 0; j < 64; ++j) {
            const double th = 2.0 * pi * j / 64;
            const double x = s * std::cos(th), y = s * std::sin(th);
            const double v = H.value(t, x, y);
            const auto g = H.gradient(t, x, y);
            if (!std::isfinite(v) || !std::isfinite(g[0]) || !std::isfinite(g[1]))
                throw ComputationError("disk_maps", "vector field blows up at the boundary");
            if (std::abs(v) > 1e-9 * std::max(1.0, s * s))
                throw ComputationError("disk_maps", "Hamiltonian does not vanish on the boundary circle");
            // tangency: X_H . n = (H_y x - H_x y)/s
            const double normal = (g[1] * x - g[0] * y) / s;
            if (std::abs(normal) > 1e-7 * std::max(1.0, std::hypot(g[0], g[1])))
                throw ComputationError("disk_maps", "Hamiltonian vector field is not tangent to the boundary");
        }
    }
}

constexpr double kCenterOffset = 1e-6;

}  // namespace

DiskMapLift flow_from_hamiltonian(HamiltonianPtr H, const PolarGrid& grid, double t_end, const FlowOptions& opt) {
    if (grid.n_r < 3 || grid.n_theta < 4) throw InputError("disk grid must be at least 3 x 4");
    check_boundary_normalization(*H);
    DiskMapLift L;
    L.grid = grid;
    L.area = H->area();
    L.provenance = Provenance::hamiltonian_isotopy;
    L.hamiltonian = H;
    L.t_end = t_end;
    L.flow_steps = opt.steps;
    L.R.assign(grid.size(), 0.0);
    L.Theta.assign(grid.size(), 0.0);
    const double s = H->radius();
    const auto center = flow_point(*H, 0.0, 0.0, 0.0, t_end, opt.steps);
    const double center_r = std::hypot(center.x, center.y) / s;
    parallel_for(grid.size(), [&](std::size_t k) {
        const int i = static_cast<int>(k / grid.n_theta), j = static_cast<int>(k % grid.n_theta);
        const double th = grid.theta_at(j);
        const double r = i == 0 ? kCenterOffset : grid.r_at(i);
        const auto p = flow_point(*H, s * r * std::cos(th), s * r * std::sin(th), 0.0, t_end, opt.steps);
        L.R[k] = i == 0 ? center_r : std::min(std::hypot(p.x, p.y) / s, 1.0);
        L.Theta[k] = th + p.angle_change;
    });
    return L;
}

PrimitiveOneForm section_primitive(const SectionReturnData& d) {
    return PrimitiveOneForm::from_grid(PolarGrid{d.n_r, d.n_theta}, d.primitive, d.density);
}

DiskMapLift lift_from_section(const SectionReturnData& d) {
    DiskMapLift L;
    L.grid = PolarGrid{d.n_r, d.n_theta};
    L.provenance = Provenance::section_data;
    L.R = d.ret_r;
    L.Theta = d.theta_lift;
    L.recorded_sigma.resize(d.sigma.size());
    for (std::size_t k = 0; k < d.sigma.size(); ++k) L.recorded_sigma[k] = d.sigma[k] - d.boundary_action;
    L.section_form = section_primitive(d);
    L.area = L.section_form->area();
    return L;
}

std::array<double, 2> DiskMapLift::apply(double r, double theta) const {
    const int nr = grid.n_r, nt = grid.n_theta;
    const double tw = std::fmod(std::fmod(theta, 2.0 * pi) + 2.0 * pi, 2.0 * pi);
    std::vector<double> shift(Theta.size());
    // Theta - theta is periodic; interpolate that
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nt; ++j) shift[grid.idx(i, j)] = Theta[grid.idx(i, j)] - grid.theta_at(j);
    const double Rv = interp::polar(R.data(), nr, nt, r, tw).value;
    const double Sv = interp::polar(shift.data(), nr, nt, r, tw).value;
    return {Rv, theta + Sv};
}

DiskMapLift compose(const DiskMapLift& second, const DiskMapLift& first) {
    DiskMapLift out = first;
    out.provenance = Provenance::composition;
    out.hamiltonian.reset();
    out.recorded_sigma.clear();
    out.degree_offset = first.degree_offset + second.degree_offset;
    const int nr = second.grid.n_r, nt = second.grid.n_theta;
    // R and Theta of `second` are not smooth where its image passes near the
    // origin; the Cartesian image is. The shift only picks the branch.
    std::vector<double> shift(second.Theta.size()), X(shift.size()), Y(shift.size());
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nt; ++j) {
            const auto k = second.grid.idx(i, j);
            shift[k] = second.Theta[k] - second.grid.theta_at(j);
            X[k] = second.R[k] * std::cos(second.Theta[k]);
            Y[k] = second.R[k] * std::sin(second.Theta[k]);
        }
    for (std::size_t k = 0; k < first.R.size(); ++k) {
        const double th = first.Theta[k];
        const double tw = std::fmod(std::fmod(th, 2.0 * pi) + 2.0 * pi, 2.0 * pi);
        const double x = interp::polar(X.data(), nr, nt, first.R[k], tw).value;
        const double y = interp::polar(Y.data(), nr, nt, first.R[k], tw).value;
        const double guess = th + interp::polar(shift.data(), nr, nt, first.R[k], tw).value;
        const double a = std::atan2(y, x);
        out.R[k] = std::hypot(x, y);
        out.Theta[k] = a + 2.0 * pi * std::round((guess - a) / (2.0 * pi));
    }
    // the center row has no angle of its own: follow the next row
    for (int j = 0; j < first.grid.n_theta && first.grid.n_r > 1; ++j) {
        double& c = out.Theta[first.grid.idx(0, j)];
        c += 2.0 * pi * std::round((out.Theta[first.grid.idx(1, j)] - c) / (2.0 * pi));
    }
    return out;
}

DiskMapLift degree_shift(const DiskMapLift& lift, int k) {
    DiskMapLift out = lift;
    for (double& t : out.Theta) t += 2.0 * pi * k;
    out.degree_offset += k;
    return out;
}

// ---------------------------------------------------------------- actions

namespace {

struct GridDerivs {
    std::vector<double> dr, dt;
};

GridDerivs grid_derivatives(const PolarGrid& g, const std::vector<double>& f) {
    GridDerivs d{std::vector<double>(g.size()), std::vector<double>(g.size())};
    const double hr = 1.0 / (g.n_r - 1), ht = 2.0 * pi / g.n_theta;
    for (int j = 0; j < g.n_theta; ++j) {
        const auto col = interp::derivative(f.data() + j, g.n_r, hr, g.n_theta);
        for (int i = 0; i < g.n_r; ++i) d.dr[g.idx(i, j)] = col[i];
    }
    for (int i = 0; i < g.n_r; ++i) {
        const auto row = interp::periodic_derivative(f.data() + g.idx(i, 0), g.n_theta, ht, 1);
        for (int j = 0; j < g.n_theta; ++j) d.dt[g.idx(i, j)] = row[j];
    }
    return d;
}

// Theta lift minus theta is periodic; derivatives of Theta come from that.
GridDerivs lift_derivatives(const PolarGrid& g, const std::vector<double>& Theta) {
    std::vector<double> shift(Theta.size());
    for (int i = 0; i < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j) shift[g.idx(i, j)] = Theta[g.idx(i, j)] - g.theta_at(j);
    GridDerivs d = grid_derivatives(g, shift);
    for (double& v : d.dt) v += 1.0;
    return d;
}

}  // namespace

double action_residual(const DiskMapLift& lift, const PrimitiveOneForm& lambda, const std::vector<double>& sigma) {
    const PolarGrid& g = lift.grid;
    // remove the exact part: sigma' = sigma - (u o phi - u) pairs with h dtheta
    std::vector<double> sp(sigma);
    if (lambda.has_exact()) {
        for (int i = 0; i < g.n_r; ++i)
            for (int j = 0; j < g.n_theta; ++j) {
                const auto k = g.idx(i, j);
                sp[k] -= lambda.u_polar(lift.R[k], lift.Theta[k]) - lambda.u_polar(g.r_at(i), g.theta_at(j));
            }
    }
    const GridDerivs ds = grid_derivatives(g, sp);
    double worst = 0.0;
    if (lambda.kind() == PrimitiveOneForm::Kind::half_r2_dtheta) {
        // phi^* lambda_0 = (X dY - Y dX)/2 with smooth X, Y
        const double s = lambda.radius();
        std::vector<double> X(g.size()), Y(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) {
            X[k] = s * lift.R[k] * std::cos(lift.Theta[k]);
            Y[k] = s * lift.R[k] * std::sin(lift.Theta[k]);
        }
        const GridDerivs dX = grid_derivatives(g, X), dY = grid_derivatives(g, Y);
        for (int i = 1; i + 1 < g.n_r; ++i)
            for (int j = 0; j < g.n_theta; ++j) {
                const auto k = g.idx(i, j);
                const double r = g.r_at(i);
                const double er = 0.5 * (X[k] * dY.dr[k] - Y[k] * dX.dr[k]) - ds.dr[k];
                const double et = 0.5 * (X[k] * dY.dt[k] - Y[k] * dX.dt[k]) - 0.5 * s * s * r * r - ds.dt[k];
                worst = std::max({worst, std::abs(er), std::abs(et)});
            }
        return worst;
    }
    const GridDerivs dT = lift_derivatives(g, lift.Theta);
    for (int i = 1; i + 1 < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j) {
            const auto k = g.idx(i, j);
            const double th = g.theta_at(j);
            const double hR = lambda.h(lift.R[k], std::fmod(std::fmod(lift.Theta[k], 2.0 * pi) + 2.0 * pi, 2.0 * pi));
            const double er = hR * dT.dr[k] - ds.dr[k];
            const double et = hR * dT.dt[k] - lambda.h(g.r_at(i), th) - ds.dt[k];
            worst = std::max({worst, std::abs(er), std::abs(et)});
        }
    return worst;
}

ActionField action_of_lift(const DiskMapLift& lift, const PrimitiveOneForm& lambda, const ActionOptions& opt) {
    const PolarGrid& g = lift.grid;
    ActionField out;
    out.grid = g;
    out.sigma.assign(g.size(), 0.0);
    if (lift.provenance == Provenance::hamiltonian_isotopy) {
        if (!lift.hamiltonian) throw InputError("Hamiltonian lift without its Hamiltonian");
        if (lambda.kind() != PrimitiveOneForm::Kind::half_r2_dtheta)
            throw InputError("Hamiltonian lifts pair with the standard primitive (plus exact terms)");
        const auto& H = *lift.hamiltonian;
        const double s = H.radius();
        const double center = flow_point(H, 0.0, 0.0, 0.0, lift.t_end, lift.flow_steps, &lambda).action;
        parallel_for(g.size(), [&](std::size_t k) {
            const int i = static_cast<int>(k / g.n_theta), j = static_cast<int>(k % g.n_theta);
            if (i == 0) {
                out.sigma[k] = center;
                return;
            }
            const double r = g.r_at(i), th = g.theta_at(j);
            out.sigma[k] =
                flow_point(H, s * r * std::cos(th), s * r * std::sin(th), 0.0, lift.t_end, lift.flow_steps, &lambda)
                    .action;
        });
    } else if (lift.provenance == Provenance::section_data) {
        if (lift.recorded_sigma.size() != g.size()) throw InputError("section lift without recorded return times");
        if (lambda.kind() == PrimitiveOneForm::Kind::custom_grid) {
            for (std::size_t k = 0; k < g.size(); ++k) out.sigma[k] = lift.recorded_sigma[k];
        } else {
            throw InputError("section lifts pair with their own primitive");
        }
        if (lambda.has_exact()) {
            for (int i = 0; i < g.n_r; ++i)
                for (int j = 0; j < g.n_theta; ++j) {
                    const auto k = g.idx(i, j);
                    out.sigma[k] += lambda.u_polar(lift.R[k], lift.Theta[k]) - lambda.u_polar(g.r_at(i), g.theta_at(j));
                }
        }
    } else {
        throw InputError("actions need a Hamiltonian or section lift (composition lifts carry no representing arc)");
    }
    const double shift = lift.degree_offset * lambda.boundary_integral();
    for (double& v : out.sigma) v += shift;
    // the shifted lift has the same underlying map; the residual is degree-independent
    if (opt.check_residual) {
        out.residual = action_residual(lift, lambda, out.sigma);
        if (!(out.residual <= opt.residual_tol)) {
            std::ostringstream os;
            os << "inconsistent lift: |phi^* lambda - lambda - d sigma| = " << out.residual << " exceeds "
               << opt.residual_tol;
            throw ComputationError("disk_maps", os.str());
        }
    }
    return out;
}

double integrate_over_disk(const PolarGrid& g, const std::vector<double>& f, const PrimitiveOneForm& lambda) {
    const auto wr = interp::simpson_weights(g.n_r, 1.0 / (g.n_r - 1));
    const double wt = 2.0 * pi / g.n_theta;
    std::vector<double> w(g.size());
    for (int i = 0; i < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j)
            w[g.idx(i, j)] = wr[i] * wt * lambda.density(g.r_at(i), g.theta_at(j));
    return simd::weighted_sum(w.data(), f.data(), g.size());
}

double calabi(const DiskMapLift& lift, const PrimitiveOneForm& lambda, const ActionOptions& opt) {
    const ActionField a = action_of_lift(lift, lambda, opt);
    return integrate_over_disk(lift.grid, a.sigma, lambda);
}

double area_defect(const DiskMapLift& lift, const PrimitiveOneForm& form) {
    const PolarGrid& g = lift.grid;
    double worst = 0.0;
    if (form.kind() == PrimitiveOneForm::Kind::half_r2_dtheta) {
        std::vector<double> X(g.size()), Y(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) {
            X[k] = lift.R[k] * std::cos(lift.Theta[k]);
            Y[k] = lift.R[k] * std::sin(lift.Theta[k]);
        }
        const GridDerivs dX = grid_derivatives(g, X), dY = grid_derivatives(g, Y);
        for (int i = 1; i + 1 < g.n_r; ++i)
            for (int j = 0; j < g.n_theta; ++j) {
                const auto k = g.idx(i, j);
                const double jac = dX.dr[k] * dY.dt[k] - dX.dt[k] * dY.dr[k];
                worst = std::max(worst, std::abs(jac / g.r_at(i) - 1.0));
            }
        return worst;
    }
    const GridDerivs dR = grid_derivatives(g, lift.R), dT = lift_derivatives(g, lift.Theta);
    for (int i = 1; i + 1 < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j) {
            const auto k = g.idx(i, j);
            const double F0 = form.density(g.r_at(i), g.theta_at(j));
            const double F1 = form.density(lift.R[k], std::fmod(std::fmod(lift.Theta[k], 2.0 * pi) + 2.0 * pi, 2.0 * pi));
            const double jac = dR.dr[k] * dT.dt[k] - dR.dt[k] * dT.dr[k];
            worst = std::max(worst, std::abs(F1 * jac / F0 - 1.0));
        }
    return worst;
}

// ---------------------------------------------------------------- fixed points

FixedPointReport fixed_points_with_actions(const DiskMapLift& lift, const PrimitiveOneForm& lambda,
                                           const FixedPointOptions& opt) {
    const PolarGrid& g = lift.grid;
    FixedPointReport rep;
    std::vector<double> shift(g.size());
    for (int i = 0; i < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j) shift[g.idx(i, j)] = lift.Theta[g.idx(i, j)] - g.theta_at(j);

    // normalized Cartesian image and its Jacobian from the interpolant
    auto image = [&](double x, double y, double J[4]) {
        const double r = std::hypot(x, y), th = std::atan2(y, x);
        const double tw = th < 0.0 ? th + 2.0 * pi : th;
        const auto pR = interp::polar(lift.R.data(), g.n_r, g.n_theta, r, tw);
        const auto pS = interp::polar(shift.data(), g.n_r, g.n_theta, r, tw);
        const double Th = tw + pS.value;
        const double c = std::cos(Th), s = std::sin(Th);
        if (J) {
            // d(X,Y)/d(r,theta)
            const double Xr = pR.d_r * c - pR.value * s * pS.d_r;
            const double Yr = pR.d_r * s + pR.value * c * pS.d_r;
            const double Xt = pR.d_theta * c - pR.value * s * (1.0 + pS.d_theta);
            const double Yt = pR.d_theta * s + pR.value * c * (1.0 + pS.d_theta);
            const double ct = std::cos(th), st = std::sin(th);
            // (r,theta) w.r.t. (x,y)
            const double rx = ct, ry = st, tx = -st / r, ty = ct / r;
            J[0] = Xr * rx + Xt * tx;
            J[1] = Xr * ry + Xt * ty;
            J[2] = Yr * rx + Yt * tx;
            J[3] = Yr * ry + Yt * ty;
        }
        return std::array<double, 3>{pR.value * c, pR.value * s, pS.value};
    };

    auto sigma_at = [&](double r, double th, const ActionField* field) {
        if (lift.provenance == Provenance::hamiltonian_isotopy && lift.hamiltonian) {
            const double s = lift.hamiltonian->radius();
            return flow_point(*lift.hamiltonian, s * r * std::cos(th), s * r * std::sin(th), 0.0, lift.t_end,
                              lift.flow_steps, &lambda)
                       .action +
                   lift.degree_offset * lambda.boundary_integral();
        }
        return interp::polar(field->sigma.data(), g.n_r, g.n_theta, r, th < 0 ? th + 2.0 * pi : th).value;
    };

    std::optional<ActionField> field;
    if (lift.provenance != Provenance::hamiltonian_isotopy) {
        ActionOptions ao;
        ao.check_residual = false;
        field = action_of_lift(lift, lambda, ao);
    }

    // distance of every node from its image
    std::vector<double> dist(g.size());
    std::size_t fixed_nodes = 0;
    for (int i = 0; i < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j) {
            const auto k = g.idx(i, j);
            const double r = g.r_at(i), th = g.theta_at(j);
            dist[k] = std::hypot(lift.R[k] * std::cos(lift.Theta[k]) - r * std::cos(th),
                                 lift.R[k] * std::sin(lift.Theta[k]) - r * std::sin(th));
            if (dist[k] < opt.scan_tol) ++fixed_nodes;
        }
    if (fixed_nodes >= static_cast<std::size_t>(0.99 * g.size())) {
        rep.foliated = true;
        return rep;
    }

    auto add_point = [&](double r, double th, double trace, double lift_shift) {
        if (r < 1e-9) th = 0.0;
        for (const auto& p : rep.points) {
            if (std::hypot(r * std::cos(th) - p.r * std::cos(p.theta), r * std::sin(th) - p.r * std::sin(p.theta)) <
                opt.merge_tol)
                return;
        }
        DiskFixedPoint fp;
        fp.r = r;
        fp.theta = th < 0.0 ? th + 2.0 * pi : th;
        fp.trace = trace;
        fp.elliptic = std::abs(trace) < 2.0;
        fp.winding = static_cast<int>(std::lround(lift_shift / (2.0 * pi)));
        fp.sigma = sigma_at(r, fp.theta, field ? &*field : nullptr);
        rep.points.push_back(fp);
    };

    // center: interpolation is singular there, so use the node row and a small ring for the trace
    if (lift.R[0] < 1e-8) {
        double J[4], tr = 0.0;
        const double e = 0.5 / (g.n_r - 1);
        for (int q = 0; q < 4; ++q) {
            image(e * std::cos(q * 0.5 * pi), e * std::sin(q * 0.5 * pi), J);
            tr += 0.25 * (J[0] + J[3]);
        }
        double mean_shift = 0.0;
        for (int j = 0; j < g.n_theta; ++j) mean_shift += shift[g.idx(0, j)];
        add_point(0.0, 0.0, tr, mean_shift / g.n_theta);
    }

    const double hr = 1.0 / (g.n_r - 1);
    const double thresh = opt.scan_tol + 4.0 * hr;
    for (int i = 1; i + 1 < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j) {
            const auto k = g.idx(i, j);
            if (dist[k] > thresh) continue;
            bool minimum = true;
            for (int di = -1; di <= 1 && minimum; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    if (!di && !dj) continue;
                    const int ii = i + di;
                    if (ii < 0 || ii >= g.n_r) continue;
                    const int jj = ((j + dj) % g.n_theta + g.n_theta) % g.n_theta;
                    if (dist[g.idx(ii, jj)] < dist[k]) {
                        minimum = false;
                        break;
                    }
                }
            if (!minimum) continue;
            // damped Newton on f(p) - p
            double x = g.r_at(i) * std::cos(g.theta_at(j)), y = g.r_at(i) * std::sin(g.theta_at(j));
            bool ok = false;
            double J[4];
            for (int it = 0; it < 60; ++it) {
                const double rr = std::hypot(x, y);
                if (rr < 1e-9 || rr > 1.0) break;
                const auto f = image(x, y, J);
                const double fx = f[0] - x, fy = f[1] - y;
                if (std::hypot(fx, fy) < opt.newton_tol) {
                    ok = true;
                    break;
                }
                const double a = J[0] - 1.0, b = J[1], c = J[2], d = J[3] - 1.0;
                const double det = a * d - b * c;
                if (std::abs(det) < 1e-14) break;
                double dx = (d * fx - b * fy) / det, dy = (-c * fx + a * fy) / det;
                const double step = std::hypot(dx, dy);
                if (step > 0.1) {
                    dx *= 0.1 / step;
                    dy *= 0.1 / step;
                }
                x -= dx;
                y -= dy;
            }
            if (!ok) continue;
            const auto f = image(x, y, J);
            add_point(std::hypot(x, y), std::atan2(y, x), J[0] + J[3], f[2]);
        }
    std::sort(rep.points.begin(), rep.points.end(), [](const DiskFixedPoint& a, const DiskFixedPoint& b) {
        return a.r != b.r ? a.r < b.r : a.theta < b.theta;
    });
    return rep;
}

}  // namespace symcap
