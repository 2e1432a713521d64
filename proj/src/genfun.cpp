#include "symcap/genfun.hpp"

#include "symcap/errors.hpp"
#include "symcap/interp.hpp"
#include "symcap/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace symcap {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Stencil sizes along r; the maps carry more radial structure than angular.
constexpr int kROrder = 8;
constexpr int kRDerivOrder = 9;

std::string node_str(int i, int j) {
    std::ostringstream os;
    os << "node (" << i << "," << j << ")";
    return os.str();
}

// Safeguarded Newton for an increasing function with f(lo) <= 0 <= f(hi).
template <class Fn>
double solve_increasing(const Fn& f, double lo, double hi, double x, double tol, int max_iter, bool* ok = nullptr) {
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
        double d = 0.0;
        const double v = f(x, d);
        if (v == 0.0) {
            converged = true;
            break;
        }
        if (v < 0.0) lo = x;
        else hi = x;
        double nx = (d > 0.0) ? x - v / d : 0.5 * (lo + hi);
        if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
        const double step = std::abs(nx - x);
        x = nx;
        if (step <= tol * std::max(1.0, std::abs(x)) || hi - lo <= tol) {
            converged = true;
            break;
        }
    }
    if (ok) *ok = converged;
    return x;
}

// Lagrange extrapolation of column values at rows `rows` to row `target`.
double extrapolate_rows(const std::vector<double>& v, const PolarGrid& g, int j, const int* rows, int n, int target) {
    double out = 0.0;
    for (int a = 0; a < n; ++a) {
        double w = 1.0;
        for (int b = 0; b < n; ++b)
            if (b != a) w *= static_cast<double>(target - rows[b]) / (rows[a] - rows[b]);
        out += w * v[g.idx(rows[a], j)];
    }
    return out;
}

// Fills angles on degenerate rows (F == 0 there) from the six nearest regular rows.
void fill_degenerate_rows(std::vector<double>& D, const AreaDensity& F) {
    const PolarGrid& g = F.grid();
    for (int i = 0; i < g.n_r; ++i) {
        if (!F.degenerate_row(i)) continue;
        int rows[6];
        int n = 0;
        const int dir = (i < g.n_r / 2) ? 1 : -1;
        for (int k = i + dir; k >= 0 && k < g.n_r && n < 6; k += dir)
            if (!F.degenerate_row(k)) rows[n++] = k;
        if (n == 0) throw InputError("area density vanishes on every row");
        for (int j = 0; j < g.n_theta; ++j) D[g.idx(i, j)] = extrapolate_rows(D, g, j, rows, n, i);
    }
}

struct Gradients {
    std::vector<double> d_r, d_theta;
};

Gradients grid_gradients(const PolarGrid& g, const std::vector<double>& f) {
    Gradients out{std::vector<double>(g.size()), std::vector<double>(g.size())};
    const double hr = 1.0 / (g.n_r - 1), ht = kTwoPi / g.n_theta;
    for (int j = 0; j < g.n_theta; ++j) {
        auto col = interp::derivative(&f[j], g.n_r, hr, g.n_theta, kRDerivOrder);
        for (int i = 0; i < g.n_r; ++i) out.d_r[g.idx(i, j)] = col[i];
    }
    for (int i = 0; i < g.n_r; ++i) {
        auto row = interp::periodic_derivative(&f[g.idx(i, 0)], g.n_theta, ht);
        std::copy(row.begin(), row.end(), out.d_theta.begin() + g.idx(i, 0));
    }
    return out;
}

std::vector<double> angle_shift(const StripMap& phi) {
    std::vector<double> D(phi.grid.size());
    for (int i = 0; i < phi.grid.n_r; ++i)
        for (int j = 0; j < phi.grid.n_theta; ++j)
            D[phi.grid.idx(i, j)] = phi.Theta[phi.grid.idx(i, j)] - phi.grid.theta_at(j);
    return D;
}

bool compute_monotone(const PolarGrid& g, const std::vector<double>& R, int* bad_i = nullptr, int* bad_j = nullptr) {
    const double hr = 1.0 / (g.n_r - 1);
    for (int j = 0; j < g.n_theta; ++j) {
        auto d = interp::derivative(&R[j], g.n_r, hr, g.n_theta, kRDerivOrder);
        for (int i = 0; i < g.n_r; ++i)
            if (!(d[i] > 0.0)) {
                if (bad_i) *bad_i = i;
                if (bad_j) *bad_j = j;
                return false;
            }
    }
    return true;
}

void require_same_grid(const PolarGrid& a, const PolarGrid& b, const char* what) {
    if (a.n_r != b.n_r || a.n_theta != b.n_theta)
        throw InputError(std::string(what) + ": strip map and density use different grids");
}

// Solves B(row i, Theta) = target for Theta, starting near guess.
double solve_row_angle(const AreaDensity& F, int i, double target, double guess, const InversionOptions& opt,
                       int j) {
    auto f = [&](double th, double& d) { return F.B_row(i, th, &d) - target; };
    double d0 = 0.0;
    const double v0 = f(guess, d0);
    double lo = guess, hi = guess, step = 0.05;
    if (v0 > 0.0) {
        for (int k = 0; k < 80; ++k) {
            lo -= step;
            step *= 2.0;
            double d;
            if (f(lo, d) <= 0.0) break;
            if (k == 79) throw HypothesisError("generating_functions", "angle equation has no root at " + node_str(i, j));
        }
    } else if (v0 < 0.0) {
        for (int k = 0; k < 80; ++k) {
            hi += step;
            step *= 2.0;
            double d;
            if (f(hi, d) >= 0.0) break;
            if (k == 79) throw HypothesisError("generating_functions", "angle equation has no root at " + node_str(i, j));
        }
    } else {
        return guess;
    }
    bool ok = false;
    const double th = solve_increasing(f, lo, hi, guess, opt.tol, opt.max_iter, &ok);
    if (!ok) {
        // bisection leftovers are still inside the bracket; accept only if the residual is tiny
        double d;
        if (std::abs(f(th, d)) > 1e-10 * std::max(1.0, std::abs(target)))
            throw ComputationError("generating_functions", "angle solve did not converge at " + node_str(i, j));
    }
    return th;
}

}  // namespace

// ------------------------------------------------------------ AreaDensity

AreaDensity AreaDensity::from_grid(PolarGrid grid, std::vector<double> F) {
    if (grid.n_r < 8 || grid.n_theta < 8) throw InputError("area density grid must be at least 8 x 8");
    if (F.size() != grid.size()) throw InputError("area density has the wrong number of samples");
    AreaDensity a;
    a.grid_ = grid;
    a.F_ = std::move(F);
    a.finish();
    return a;
}

AreaDensity AreaDensity::standard_disk(PolarGrid grid, double radius) {
    std::vector<double> F(grid.size());
    for (int i = 0; i < grid.n_r; ++i)
        for (int j = 0; j < grid.n_theta; ++j) F[grid.idx(i, j)] = radius * radius * grid.r_at(i);
    return from_grid(grid, std::move(F));
}

AreaDensity AreaDensity::from_primitive(PolarGrid grid, const PrimitiveOneForm& form) {
    std::vector<double> F(grid.size());
    for (int i = 0; i < grid.n_r; ++i)
        for (int j = 0; j < grid.n_theta; ++j) F[grid.idx(i, j)] = form.density(grid.r_at(i), grid.theta_at(j));
    return from_grid(grid, std::move(F));
}

void AreaDensity::finish() {
    const auto& g = grid_;
    const double hr = 1.0 / (g.n_r - 1), ht = kTwoPi / g.n_theta;
    double fmax = 0.0;
    for (double v : F_) fmax = std::max(fmax, std::abs(v));
    degenerate_.assign(g.n_r, false);
    for (int i = 0; i < g.n_r; ++i) {
        double rm = 0.0;
        for (int j = 0; j < g.n_theta; ++j) rm = std::max(rm, std::abs(F_[g.idx(i, j)]));
        degenerate_[i] = rm <= 1e-14 * fmax;
        if (degenerate_[i] && i > 0 && i < g.n_r - 1)
            throw InputError("area density vanishes on interior row " + std::to_string(i));
        if (!degenerate_[i] && i > 0 && i < g.n_r - 1)
            for (int j = 0; j < g.n_theta; ++j)
                if (!(F_[g.idx(i, j)] > 0.0))
                    throw InputError("area density must be positive at interior " + node_str(i, j));
    }

    A_.assign(g.size(), 0.0);
    for (int j = 0; j < g.n_theta; ++j) {
        auto c = interp::cumulative(&F_[j], g.n_r, hr, g.n_theta, kROrder);
        for (int i = 0; i < g.n_r; ++i) A_[g.idx(i, j)] = c[i];
    }

    // Periodic cumulative integral: 4-point Gauss on the periodic 6-point interpolant of each cell.
    static const double gt[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
    static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
    mean_.assign(g.n_r, 0.0);
    Bper_.assign(g.size(), 0.0);
    std::vector<double> cum(g.n_theta + 1);
    for (int i = 0; i < g.n_r; ++i) {
        const double* row = &F_[g.idx(i, 0)];
        cum[0] = 0.0;
        for (int j = 0; j < g.n_theta; ++j) {
            double cell = 0.0;
            for (int q = 0; q < 4; ++q)
                cell += 0.5 * gw[q] * interp::periodic(row, g.n_theta, ht, ht * (j + 0.5 + 0.5 * gt[q]));
            cum[j + 1] = cum[j] + ht * cell;
        }
        mean_[i] = cum[g.n_theta] / kTwoPi;
        for (int j = 0; j < g.n_theta; ++j) Bper_[g.idx(i, j)] = cum[j] - mean_[i] * g.theta_at(j);
    }
}

double AreaDensity::F_at(double r, double theta) const {
    return interp::polar(F_.data(), grid_.n_r, grid_.n_theta, r, theta).value;
}

double AreaDensity::A_col(int j, double r, double* dA) const {
    return interp::uniform_strided(&A_[j], grid_.n_r, grid_.n_theta, 1.0 / (grid_.n_r - 1), r, kROrder, dA);
}

double AreaDensity::A_at(double r, double theta) const {
    return interp::polar(A_.data(), grid_.n_r, grid_.n_theta, r, theta).value;
}

double AreaDensity::B_row(int i, double theta, double* dB) const {
    const double ht = kTwoPi / grid_.n_theta;
    double dp = 0.0;
    const double p = interp::periodic(&Bper_[grid_.idx(i, 0)], grid_.n_theta, ht, theta, 6, dB ? &dp : nullptr);
    if (dB) *dB = mean_[i] + dp;
    return mean_[i] * theta + p;
}

double AreaDensity::B_at(double r, double theta) const {
    const double m = interp::uniform(mean_.data(), grid_.n_r, 1.0 / (grid_.n_r - 1), r);
    return m * theta + interp::polar(Bper_.data(), grid_.n_r, grid_.n_theta, r, theta).value;
}

// ------------------------------------------------------------ strip maps

StripMap lift_to_strip(const DiskMapLift& lift) {
    const auto& g = lift.grid;
    if (lift.R.size() != g.size() || lift.Theta.size() != g.size())
        throw InputError("lift_to_strip: lift has no angle data");
    for (int j = 0; j < g.n_theta; ++j) {
        if (std::abs(lift.R[g.idx(0, j)]) > 1e-8)
            throw HypothesisError("generating_functions", "origin is not fixed (R = " +
                                                              std::to_string(lift.R[g.idx(0, j)]) + ")");
        if (std::abs(lift.R[g.idx(g.n_r - 1, j)] - 1.0) > 1e-8)
            throw HypothesisError("generating_functions", "boundary circle is not preserved");
    }
    StripMap s;
    s.grid = g;
    s.R = lift.R;
    s.Theta = lift.Theta;
    for (int j = 0; j < g.n_theta; ++j) {
        s.R[g.idx(0, j)] = 0.0;
        s.R[g.idx(g.n_r - 1, j)] = 1.0;
    }
    s.monotone = compute_monotone(g, s.R);
    return s;
}

double strip_area_defect(const StripMap& phi, const AreaDensity& F) {
    require_same_grid(phi.grid, F.grid(), "strip_area_defect");
    const auto& g = phi.grid;
    const auto D = angle_shift(phi);
    const auto gR = grid_gradients(g, phi.R);
    const auto gD = grid_gradients(g, D);
    double worst = 0.0;
    for (int i = 1; i < g.n_r - 1; ++i)
        for (int j = 0; j < g.n_theta; ++j) {
            const auto k = g.idx(i, j);
            const double jac = gR.d_r[k] * (1.0 + gD.d_theta[k]) - gR.d_theta[k] * gD.d_r[k];
            const double f0 = F.F()[k];
            worst = std::max(worst, std::abs(F.F_at(phi.R[k], phi.Theta[k]) * jac / f0 - 1.0));
        }
    return worst;
}

double band_defect(const StripMap& phi, int rows, BandMode mode) {
    const auto& g = phi.grid;
    const auto D = angle_shift(phi);
    double worst = 0.0;
    auto scan = [&](int i0, int i1) {
        const double ref = D[g.idx(i0, 0)];
        for (int i = i0; i <= i1; ++i) {
            const double row_ref = (mode == BandMode::translation) ? ref : D[g.idx(i, 0)];
            for (int j = 0; j < g.n_theta; ++j) {
                const auto k = g.idx(i, j);
                worst = std::max(worst, std::abs(phi.R[k] - g.r_at(i)));
                worst = std::max(worst, std::abs(D[k] - row_ref));
            }
        }
    };
    scan(0, rows - 1);
    scan(g.n_r - rows, g.n_r - 1);
    return worst;
}

std::vector<double> strip_action(const StripMap& phi, const AreaDensity& F) {
    require_same_grid(phi.grid, F.grid(), "strip_action");
    const auto& g = phi.grid;
    const double hr = 1.0 / (g.n_r - 1), ht = kTwoPi / g.n_theta;
    const auto D = angle_shift(phi);
    const auto gD = grid_gradients(g, D);
    // A(1, .) as a function of the angle, integrated with a periodic primitive.
    std::vector<double> top(g.n_theta);
    for (int j = 0; j < g.n_theta; ++j) top[j] = F.A_node(g.n_r - 1, j);
    double top_mean = 0.0;
    for (double v : top) top_mean += v;
    top_mean /= g.n_theta;
    std::vector<double> top_per(g.n_theta), prim(g.n_theta + 1, 0.0);
    static const double gt[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
    static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
    for (int j = 0; j < g.n_theta; ++j) {
        double cell = 0.0;
        for (int q = 0; q < 4; ++q)
            cell += 0.5 * gw[q] * interp::periodic(top.data(), g.n_theta, ht, ht * (j + 0.5 + 0.5 * gt[q]));
        prim[j + 1] = prim[j] + ht * cell;
    }
    const double slope = prim[g.n_theta] / kTwoPi;
    for (int j = 0; j < g.n_theta; ++j) top_per[j] = prim[j] - slope * g.theta_at(j);
    auto top_primitive = [&](double th) {
        return slope * th + interp::periodic(top_per.data(), g.n_theta, ht, th);
    };

    std::vector<double> sigma(g.size());
    std::vector<double> integrand(g.n_r);
    for (int j = 0; j < g.n_theta; ++j) {
        const auto kt = g.idx(g.n_r - 1, j);
        const double boundary = top_primitive(phi.Theta[kt]) - top_primitive(g.theta_at(j));
        for (int i = 0; i < g.n_r; ++i) {
            const auto k = g.idx(i, j);
            integrand[i] = F.A_at(phi.R[k], phi.Theta[k]) * gD.d_r[k];
        }
        auto c = interp::cumulative(integrand.data(), g.n_r, hr, 1, kROrder);
        for (int i = 0; i < g.n_r; ++i) sigma[g.idx(i, j)] = boundary - (c[g.n_r - 1] - c[i]);
    }
    return sigma;
}

// ------------------------------------------------------------ Phi -> W

GenFunW genfun_from_stripmap(const StripMap& phi, const AreaDensity& F, const GenFunOptions& opt,
                             double* curl_defect) {
    require_same_grid(phi.grid, F.grid(), "genfun_from_stripmap");
    const auto& g = phi.grid;
    int bi = -1, bj = -1;
    if (!compute_monotone(g, phi.R, &bi, &bj))
        throw HypothesisError("generating_functions", "strip map is not monotone at " + node_str(bi, bj));
    for (int j = 0; j < g.n_theta; ++j)
        if (std::abs(phi.R[g.idx(0, j)]) > 1e-8 || std::abs(phi.R[g.idx(g.n_r - 1, j)] - 1.0) > 1e-8)
            throw HypothesisError("generating_functions", "strip map does not preserve the boundary rows");
    const double defect = strip_area_defect(phi, F);
    if (defect > opt.area_tol)
        throw HypothesisError("generating_functions",
                              "strip map does not preserve the area form (defect " + std::to_string(defect) + ")");

    const double hr = 1.0 / (g.n_r - 1);
    const auto D = angle_shift(phi);
    std::vector<double> g1(g.size()), g2(g.size());
    parallel_for(static_cast<std::size_t>(g.n_theta), [&](std::size_t jj) {
        const int j = static_cast<int>(jj);
        const double th = g.theta_at(j);
        int bracket = 0;
        for (int k = 0; k < g.n_r; ++k) {
            const double rho = g.r_at(k);
            double r;
            if (k == 0) r = 0.0;
            else if (k == g.n_r - 1) r = 1.0;
            else {
                while (bracket < g.n_r - 2 && phi.R[g.idx(bracket + 1, j)] < rho) ++bracket;
                auto f = [&](double x, double& d) {
                    return interp::uniform_strided(&phi.R[j], g.n_r, g.n_theta, hr, x, kROrder, &d) - rho;
                };
                bool ok = false;
                r = solve_increasing(f, g.r_at(bracket), g.r_at(bracket + 1),
                                     g.r_at(bracket) + hr * 0.5, 1e-14, 80, &ok);
            }
            const double Theta = th + interp::uniform_strided(&D[j], g.n_r, g.n_theta, hr, r, kROrder);
            const auto idx = g.idx(k, j);
            g1[idx] = F.B_row(k, th) - F.B_row(k, Theta);
            g2[idx] = F.A_node(k, j) - F.A_col(j, r);
        }
    });

    // Mixed partials of the assembled gradient must agree.
    const auto d1 = grid_gradients(g, g1);
    const auto d2 = grid_gradients(g, g2);
    double curl = 0.0, scale = 1.0;
    for (double v : F.F()) scale = std::max(scale, std::abs(v));
    for (int i = 1; i < g.n_r - 1; ++i)
        for (int j = 0; j < g.n_theta; ++j) {
            const auto k = g.idx(i, j);
            curl = std::max(curl, std::abs(d1.d_theta[k] - d2.d_r[k]));
        }
    if (curl_defect) *curl_defect = curl;
    if (curl > opt.curl_tol * scale)
        throw InputError("inconsistent input: mixed partials of the generating function differ by " +
                         std::to_string(curl));

    GenFunW W;
    W.grid = g;
    W.W.assign(g.size(), 0.0);
    for (int j = 0; j < g.n_theta; ++j) {
        auto c = interp::cumulative(&g1[j], g.n_r, hr, g.n_theta, kROrder);
        for (int i = 0; i < g.n_r; ++i) W.W[g.idx(i, j)] = c[i] - c[g.n_r - 1];
    }
    return W;
}

// ------------------------------------------------------------ conditions

std::string ConditionReport::first_failure() const {
    const ConditionResult* cs[4] = {&c1, &c2, &c3, &c4};
    for (int k = 0; k < 4; ++k)
        if (!cs[k]->pass) {
            std::ostringstream os;
            os << "condition (" << (k + 1) << ") fails at " << node_str(cs[k]->i, cs[k]->j) << ", margin "
               << cs[k]->margin;
            return os.str();
        }
    return {};
}

ConditionReport check_genfun_conditions(const GenFunW& W, const AreaDensity& F, const ConditionOptions& opt) {
    require_same_grid(W.grid, F.grid(), "check_genfun_conditions");
    const auto& g = W.grid;
    const auto gw = grid_gradients(g, W.W);
    const double ht = kTwoPi / g.n_theta;
    std::vector<double> w12(g.size());
    for (int i = 0; i < g.n_r; ++i) {
        auto row = interp::periodic_derivative(&gw.d_r[g.idx(i, 0)], g.n_theta, ht);
        std::copy(row.begin(), row.end(), w12.begin() + g.idx(i, 0));
    }
    double wmax = 0.0;
    for (double v : W.W) wmax = std::max(wmax, std::abs(v));

    ConditionReport rep;
    rep.c1.margin = rep.c2.margin = std::numeric_limits<double>::infinity();
    for (int i = 1; i < g.n_r - 1; ++i)
        for (int j = 0; j < g.n_theta; ++j) {
            const auto k = g.idx(i, j);
            const double v = F.A()[k] - gw.d_theta[k];
            const double m1 = std::min(v, F.A_node(g.n_r - 1, j) - v);
            if (m1 < rep.c1.margin) rep.c1 = {true, m1, i, j};
            const double m2 = F.F()[k] - w12[k];
            if (m2 < rep.c2.margin) rep.c2 = {true, m2, i, j};
        }
    rep.c1.pass = rep.c1.margin > 0.0;
    rep.c2.pass = rep.c2.margin > 0.0;

    // (3): invariance under theta -> theta + 2 pi. The grid is periodic, so only the closure
    // of d W / d theta around each row is left to test.
    const double closure_tol = 1e-9 * std::max(1.0, wmax);
    rep.c3.margin = closure_tol;
    for (int i = 0; i < g.n_r; ++i) {
        double s = 0.0;
        for (int j = 0; j < g.n_theta; ++j) s += gw.d_theta[g.idx(i, j)] * ht;
        if (closure_tol - std::abs(s) < rep.c3.margin) rep.c3 = {true, closure_tol - std::abs(s), i, 0};
    }
    rep.c3.pass = rep.c3.margin >= 0.0;

    // (4): boundary forms. Least-squares fits against c1 + c2 A (inner band) and c3 (A(1) - A) (outer band).
    const int b = std::clamp(opt.band_rows, 1, g.n_r / 2);
    {
        double s1 = 0, sa = 0, saa = 0, sw = 0, saw = 0;
        for (int i = 0; i < b; ++i)
            for (int j = 0; j < g.n_theta; ++j) {
                const auto k = g.idx(i, j);
                const double a = F.A()[k], w = W.W[k];
                s1 += 1;
                sa += a;
                saa += a * a;
                sw += w;
                saw += a * w;
            }
        const double det = s1 * saa - sa * sa;
        if (std::abs(det) > 1e-300) {
            rep.fit_c1 = (saa * sw - sa * saw) / det;
            rep.fit_c2 = (s1 * saw - sa * sw) / det;
        } else {
            rep.fit_c1 = sw / s1;
            rep.fit_c2 = 0.0;
        }
        double num = 0, den = 0;
        for (int i = g.n_r - b; i < g.n_r; ++i)
            for (int j = 0; j < g.n_theta; ++j) {
                const auto k = g.idx(i, j);
                const double a = F.A_node(g.n_r - 1, j) - F.A()[k];
                num += a * W.W[k];
                den += a * a;
            }
        rep.fit_c3 = den > 0 ? num / den : 0.0;
    }
    const double fit_tol = opt.fit_tol * std::max(wmax, 1e-300);
    double worst_in = 0.0, worst_out = 0.0;
    int wi = -1, wj = -1;
    double worst = 0.0;
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < g.n_theta; ++j) {
            const auto k = g.idx(i, j);
            const double e = std::abs(W.W[k] - rep.fit_c1 - rep.fit_c2 * F.A()[k]);
            worst_in = std::max(worst_in, e);
        }
    for (int i = g.n_r - b; i < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j) {
            const auto k = g.idx(i, j);
            const double e = std::abs(W.W[k] - rep.fit_c3 * (F.A_node(g.n_r - 1, j) - F.A()[k]));
            worst_out = std::max(worst_out, e);
        }
    rep.fit_residual_inner = worst_in;
    rep.fit_residual_outer = worst_out;
    if (opt.band_mode == BandMode::translation) {
        for (int i = 0; i < g.n_r; ++i) {
            if (i >= b && i < g.n_r - b) continue;
            for (int j = 0; j < g.n_theta; ++j) {
                const auto k = g.idx(i, j);
                const double e = (i < b) ? std::abs(W.W[k] - rep.fit_c1 - rep.fit_c2 * F.A()[k])
                                         : std::abs(W.W[k] - rep.fit_c3 * (F.A_node(g.n_r - 1, j) - F.A()[k]));
                if (e > worst) {
                    worst = e;
                    wi = i;
                    wj = j;
                }
            }
        }
    } else {
        // Per-row rotation: W constant along every band row.
        for (int i = 0; i < g.n_r; ++i) {
            if (i >= b && i < g.n_r - b) continue;
            const double ref = W.W[g.idx(i, 0)];
            for (int j = 0; j < g.n_theta; ++j) {
                const double e = std::abs(W.W[g.idx(i, j)] - ref);
                if (e > worst) {
                    worst = e;
                    wi = i;
                    wj = j;
                }
            }
        }
    }
    rep.c4 = {worst <= fit_tol, fit_tol - worst, wi, wj};
    return rep;
}

// ------------------------------------------------------------ W -> Phi

namespace {

// Angles Theta solving B(R, Theta) = B(R, theta) - t dW/dR at every node (R = r_i, theta = theta_j).
std::vector<double> solve_angles(const GenFunW& W, const std::vector<double>& w_r, double t, const AreaDensity& F,
                                 const InversionOptions& opt) {
    const auto& g = W.grid;
    std::vector<double> D(g.size(), 0.0);
    parallel_for(static_cast<std::size_t>(g.n_r), [&](std::size_t ii) {
        const int i = static_cast<int>(ii);
        if (F.degenerate_row(i)) return;
        for (int j = 0; j < g.n_theta; ++j) {
            const auto k = g.idx(i, j);
            const double th = g.theta_at(j);
            const double step = t * w_r[k];
            if (step == 0.0) continue;
            const double target = F.B_row(i, th) - step;
            const double f0 = F.F()[k];
            const double guess = th - step / f0;
            D[k] = solve_row_angle(F, i, target, guess, opt, j) - th;
        }
    });
    fill_degenerate_rows(D, F);
    return D;
}

}  // namespace

StripMap stripmap_from_genfun(const GenFunW& W, const AreaDensity& F, const InversionOptions& opt) {
    require_same_grid(W.grid, F.grid(), "stripmap_from_genfun");
    const auto rep = check_genfun_conditions(W, F);
    if (!rep.all()) throw HypothesisError("generating_functions", rep.first_failure());

    const auto& g = W.grid;
    const double hr = 1.0 / (g.n_r - 1);
    const auto gw = grid_gradients(g, W.W);
    const auto D = solve_angles(W, gw.d_r, 1.0, F, opt);

    // Preimage radius for every node (R = r_i, theta_j).
    std::vector<double> rpre(g.size());
    parallel_for(static_cast<std::size_t>(g.n_theta), [&](std::size_t jj) {
        const int j = static_cast<int>(jj);
        const double a1 = F.A_node(g.n_r - 1, j);
        for (int i = 0; i < g.n_r; ++i) {
            const auto k = g.idx(i, j);
            const double target = F.A()[k] - gw.d_theta[k];
            if (i == 0 || target <= 0.0) {
                rpre[k] = 0.0;
                continue;
            }
            if (i == g.n_r - 1 || target >= a1) {
                rpre[k] = 1.0;
                continue;
            }
            auto f = [&](double x, double& d) { return F.A_col(j, x, &d) - target; };
            rpre[k] = solve_increasing(f, 0.0, 1.0, g.r_at(i), opt.tol, opt.max_iter);
        }
    });

    StripMap out;
    out.grid = g;
    out.R.assign(g.size(), 0.0);
    out.Theta.assign(g.size(), 0.0);
    for (int j = 0; j < g.n_theta; ++j) {
        for (int i = 0; i + 1 < g.n_r; ++i)
            if (!(rpre[g.idx(i + 1, j)] > rpre[g.idx(i, j)]))
                throw HypothesisError("generating_functions",
                                      "generated map is not monotone at " + node_str(i + 1, j));
    }
    parallel_for(static_cast<std::size_t>(g.n_theta), [&](std::size_t jj) {
        const int j = static_cast<int>(jj);
        const double th = g.theta_at(j);
        int bracket = 0;
        for (int k = 0; k < g.n_r; ++k) {
            const double target = g.r_at(k);
            double rho;
            if (k == 0) rho = 0.0;
            else if (k == g.n_r - 1) rho = 1.0;
            else {
                while (bracket < g.n_r - 2 && rpre[g.idx(bracket + 1, j)] < target) ++bracket;
                auto f = [&](double x, double& d) {
                    return interp::uniform_strided(&rpre[j], g.n_r, g.n_theta, hr, x, kROrder, &d) - target;
                };
                rho = solve_increasing(f, g.r_at(bracket), g.r_at(bracket + 1), g.r_at(bracket) + 0.5 * hr,
                                       1e-14, 80);
            }
            const auto idx = g.idx(k, j);
            out.R[idx] = rho;
            out.Theta[idx] = th + interp::uniform_strided(&D[j], g.n_r, g.n_theta, hr, rho, kROrder);
        }
    });
    out.monotone = compute_monotone(g, out.R);
    return out;
}

// ------------------------------------------------------------ critical and fixed points

namespace {

// Newton on a 2-vector field (f1, f2) given as grids; scans local minima of |f|^2 over interior rows.
std::vector<StripPoint> grid_zeros(const PolarGrid& g, const std::vector<double>& f1, const std::vector<double>& f2,
                                   double tol) {
    const double hr = 1.0 / (g.n_r - 1);
    std::vector<double> m(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) m[k] = f1[k] * f1[k] + f2[k] * f2[k];
    // Seeds: discrete minima of |f|^2, and centers of cells where both components change sign.
    std::vector<std::array<double, 2>> seeds;
    for (int i = 1; i < g.n_r - 1; ++i)
        for (int j = 0; j < g.n_theta; ++j) {
            const double v = m[g.idx(i, j)];
            bool is_min = true;
            for (int di = -1; di <= 1 && is_min; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const int jj = (j + dj + g.n_theta) % g.n_theta;
                    if (m[g.idx(i + di, jj)] < v) {
                        is_min = false;
                        break;
                    }
                }
            if (is_min) seeds.push_back({g.r_at(i), g.theta_at(j)});
        }
    auto mixed = [&](const std::vector<double>& f, int i, int j) {
        const int j1 = (j + 1) % g.n_theta;
        const double c[4] = {f[g.idx(i, j)], f[g.idx(i, j1)], f[g.idx(i + 1, j)], f[g.idx(i + 1, j1)]};
        bool neg = false, pos = false;
        for (double x : c) {
            neg |= x <= 0.0;
            pos |= x >= 0.0;
        }
        return neg && pos;
    };
    for (int i = 0; i < g.n_r - 1; ++i)
        for (int j = 0; j < g.n_theta; ++j)
            if (mixed(f1, i, j) && mixed(f2, i, j))
                seeds.push_back({g.r_at(i) + 0.5 * hr, g.theta_at(j) + 0.5 * kTwoPi / g.n_theta});

    std::vector<StripPoint> out;
    for (const auto& seed : seeds) {
        double r = seed[0], th = seed[1];
        bool ok = false;
        for (int it = 0; it < 40; ++it) {
            const auto a = interp::polar(f1.data(), g.n_r, g.n_theta, r, th);
            const auto b = interp::polar(f2.data(), g.n_r, g.n_theta, r, th);
            if (std::max(std::abs(a.value), std::abs(b.value)) <= tol) {
                ok = true;
                break;
            }
            const double det = a.d_r * b.d_theta - a.d_theta * b.d_r;
            if (std::abs(det) < 1e-300) break;
            double dr = -(b.d_theta * a.value - a.d_theta * b.value) / det;
            double dt = -(-b.d_r * a.value + a.d_r * b.value) / det;
            const double len = std::hypot(dr, dt);
            if (len > 2.0 * hr) {
                dr *= 2.0 * hr / len;
                dt *= 2.0 * hr / len;
            }
            r += dr;
            th += dt;
            if (r < 0.5 * hr || r > 1.0 - 0.5 * hr) break;
        }
        if (!ok || r < 0.5 * hr || r > 1.0 - 0.5 * hr) continue;
        th = std::fmod(th, kTwoPi);
        if (th < 0) th += kTwoPi;
        bool dup = false;
        for (const auto& p : out) {
            double dth = std::abs(p.theta - th);
            dth = std::min(dth, kTwoPi - dth);
            if (std::abs(p.r - r) < 1e-6 && dth < 1e-6) dup = true;
        }
        if (!dup) out.push_back({r, th, 0.0});
    }
    std::sort(out.begin(), out.end(), [](const StripPoint& a, const StripPoint& b) {
        return a.r < b.r || (a.r == b.r && a.theta < b.theta);
    });
    return out;
}

}  // namespace

std::vector<StripPoint> critical_points(const GenFunW& W, double tol) {
    const auto gw = grid_gradients(W.grid, W.W);
    double scale = 0.0;
    for (double v : W.W) scale = std::max(scale, std::abs(v));
    auto pts = grid_zeros(W.grid, gw.d_r, gw.d_theta, tol * std::max(1.0, scale));
    for (auto& p : pts) p.value = interp::polar(W.W.data(), W.grid.n_r, W.grid.n_theta, p.r, p.theta).value;
    return pts;
}

std::vector<StripPoint> strip_fixed_points(const StripMap& phi, double tol) {
    const auto& g = phi.grid;
    std::vector<double> f1(g.size());
    const auto D = angle_shift(phi);
    for (int i = 0; i < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j) f1[g.idx(i, j)] = phi.R[g.idx(i, j)] - g.r_at(i);
    return grid_zeros(g, f1, D, tol);
}

// ------------------------------------------------------------ positivity pipeline

PipelineResult positive_hamiltonian_pipeline(const StripMap& phi, const AreaDensity& F, const PipelineOptions& opt) {
    require_same_grid(phi.grid, F.grid(), "positive_hamiltonian_pipeline");
    if (opt.n_steps < 3) throw InputError("pipeline needs at least 3 time steps");
    const auto& g = phi.grid;
    int bi = -1, bj = -1;
    if (!compute_monotone(g, phi.R, &bi, &bj))
        throw HypothesisError("generating_functions", "strip map is not monotone at " + node_str(bi, bj));
    const double band = band_defect(phi, opt.band_rows, opt.band_mode);
    if (band > opt.band_tol)
        throw HypothesisError("generating_functions", "strip map is not a rotation on the boundary bands (defect " +
                                                          std::to_string(band) + ")");

    PipelineResult res;
    res.W = genfun_from_stripmap(phi, F);
    ConditionOptions copt;
    copt.band_rows = opt.band_rows;
    copt.band_mode = opt.band_mode;
    res.conditions = check_genfun_conditions(res.W, F, copt);
    if (!res.conditions.all()) throw HypothesisError("generating_functions", res.conditions.first_failure());

    {
        double w0 = std::numeric_limits<double>::infinity();
        for (int j = 0; j < g.n_theta; ++j) w0 = std::min(w0, res.W.W[g.idx(0, j)]);
        if (!(w0 > 0.0))
            throw HypothesisError("generating_functions", "W at the origin is not positive (" + std::to_string(w0) + ")");
    }
    const auto crit = critical_points(res.W);
    for (const auto& c : crit)
        if (!(c.value > 0.0)) {
            std::ostringstream os;
            os << "fixed point (r=" << c.r << ", theta=" << c.theta << ") has W = " << c.value << " <= 0";
            throw HypothesisError("generating_functions", os.str());
        }

    const auto D0 = angle_shift(phi);
    for (int j = 0; j < g.n_theta; ++j) {
        res.inner_rotation += D0[g.idx(0, j)] / g.n_theta;
        res.outer_rotation += D0[g.idx(g.n_r - 1, j)] / g.n_theta;
    }

    const int n_t = opt.n_steps + 1;
    res.n_t = n_t;
    const std::size_t N = g.size();
    const auto gw = grid_gradients(g, res.W.W);
    InversionOptions iopt;

    // Image angles Theta_t(R, theta) for every time node.
    std::vector<double> theta_t(static_cast<std::size_t>(n_t) * N);
    for (int k = 0; k < n_t; ++k) {
        const double t = static_cast<double>(k) / opt.n_steps;
        if (opt.check_conditions_each_step && k > 0 && k < n_t - 1) {
            GenFunW wt{g, res.W.W};
            for (double& v : wt.W) v *= t;
            const auto rep = check_genfun_conditions(wt, F, copt);
            if (!rep.all())
                throw ComputationError("generating_functions",
                                       "pipeline failed at t = " + std::to_string(t) + ": " + rep.first_failure());
        }
        const auto D = solve_angles(res.W, gw.d_r, t, F, iopt);
        std::copy(D.begin(), D.end(), theta_t.begin() + static_cast<std::ptrdiff_t>(k * N));
    }

    // H_t at image points (R, Theta_t) from the velocity field, then resampled on the grid.
    const double hr = 1.0 / (g.n_r - 1), ht = kTwoPi / g.n_theta, dt = 1.0 / opt.n_steps;
    res.H.assign(static_cast<std::size_t>(n_t) * N, 0.0);
    parallel_for(static_cast<std::size_t>(n_t), [&](std::size_t kk) {
        const int k = static_cast<int>(kk);
        const double t = k * dt;
        const double* Dk = &theta_t[kk * N];
        std::vector<double> himg(N), q(g.n_r);
        for (int j = 0; j < g.n_theta; ++j) {
            for (int i = 0; i < g.n_r; ++i) {
                const auto idx = g.idx(i, j);
                double vel = 0.0;
                interp::uniform_strided(&theta_t[idx], n_t, N, dt, t, 4, &vel);
                const double Th = g.theta_at(j) + Dk[idx];
                const double f = F.degenerate_row(i) ? 0.0 : interp::periodic(&F.F()[g.idx(i, 0)], g.n_theta, ht, Th);
                q[i] = f * vel;
            }
            auto c = interp::cumulative(q.data(), g.n_r, hr, 1, kROrder);
            for (int i = 0; i < g.n_r; ++i) himg[g.idx(i, j)] = c[g.n_r - 1] - c[i];
        }
        double* Hk = &res.H[kk * N];
        for (int i = 0; i < g.n_r; ++i) {
            const double* Drow = &Dk[g.idx(i, 0)];
            const double* hrow = &himg[g.idx(i, 0)];
            for (int m = 0; m < g.n_theta; ++m) {
                const double target = g.theta_at(m);
                double th = target - interp::periodic(Drow, g.n_theta, ht, target);
                for (int it = 0; it < 50; ++it) {
                    double dd = 0.0;
                    const double v = th + interp::periodic(Drow, g.n_theta, ht, th, 6, &dd) - target;
                    const double step = v / (1.0 + dd);
                    th -= step;
                    if (std::abs(step) < 1e-14) break;
                }
                Hk[g.idx(i, m)] = interp::periodic(hrow, g.n_theta, ht, th);
            }
        }
    });

    res.min_interior = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_t; ++k)
        for (int i = 1; i < g.n_r - 1; ++i)
            for (int j = 0; j < g.n_theta; ++j)
                res.min_interior = std::min(res.min_interior, res.H[k * N + g.idx(i, j)]);

    for (const auto& c : crit) {
        PipelineFixedPoint fp{c.r, c.theta, c.value, 0.0};
        for (int k = 0; k < n_t; ++k) {
            const double h = interp::polar(&res.H[k * N], g.n_r, g.n_theta, c.r, c.theta).value;
            fp.H_mismatch = std::max(fp.H_mismatch, std::abs(h - c.value));
        }
        res.max_identity_error = std::max(res.max_identity_error, fp.H_mismatch);
        res.fixed_points.push_back(fp);
    }
    // The origin row is fixed as a whole; H_t there must equal W(0).
    for (int k = 0; k < n_t; ++k)
        for (int j = 0; j < g.n_theta; ++j)
            res.max_identity_error =
                std::max(res.max_identity_error, std::abs(res.H[k * N + g.idx(0, j)] - res.W.W[g.idx(0, j)]));
    if (res.max_identity_error > opt.identity_tol)
        throw ComputationError("generating_functions", "extracted Hamiltonian misses W on the fixed set by " +
                                                           std::to_string(res.max_identity_error));

    res.time_one = stripmap_from_genfun(res.W, F);
    return res;
}

}  // namespace symcap
