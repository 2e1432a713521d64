#include "symcap/domain.hpp"

#include "symcap/errors.hpp"
#include "symcap/parallel.hpp"
#include "symcap/rng.hpp"
#include "symcap/simd.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace symcap {

using std::numbers::pi;

namespace {

double ipow(double x, int p) {
    double r = 1.0;
    for (int k = 0; k < p; ++k) r *= x;
    return r;
}

std::vector<double> parse_numbers(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw InputError("bad number '" + item + "'");
        } catch (const std::logic_error&) {
            throw InputError("bad number '" + item + "' in domain shorthand");
        }
    }
    return out;
}

}  // namespace

StarShapedDomain StarShapedDomain::ellipsoid(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
        throw InputError("ellipsoid widths must be positive and finite");
    StarShapedDomain d;
    d.kind_ = DomainKind::ellipsoid;
    d.a_ = a;
    d.b_ = b;
    return d;
}

StarShapedDomain StarShapedDomain::ball(double a) {
    StarShapedDomain d = ellipsoid(a, a);
    d.kind_ = DomainKind::ball;
    return d;
}

StarShapedDomain StarShapedDomain::radial(double epsilon, std::vector<Monomial> coeffs) {
    if (!std::isfinite(epsilon)) throw InputError("radial epsilon must be finite");
    double l1 = 0.0;
    for (const auto& m : coeffs) {
        int deg = 0;
        for (int p : m.powers) {
            if (p < 0) throw InputError("negative exponent in radial polynomial");
            deg += p;
        }
        if (deg > 4) throw InputError("radial polynomial degree exceeds 4");
        if (!std::isfinite(m.coeff)) throw InputError("non-finite radial coefficient");
        l1 += std::abs(m.coeff);
    }
    // |P| <= sum |c| on the unit sphere, so this bound guarantees rho > 0.
    if (std::abs(epsilon) * l1 >= 1.0)
        throw InputError("radial perturbation too large: need |eps| * sum|c| < 1");
    StarShapedDomain d;
    d.kind_ = DomainKind::radial;
    d.a_ = d.b_ = pi;
    d.eps_ = epsilon;
    d.coeffs_ = std::move(coeffs);
    return d;
}

std::vector<Monomial> StarShapedDomain::default_radial_polynomial() {
    return {{-0.3, {2, 0, 0, 0}}, {-0.3, {0, 2, 0, 0}}, {0.3, {0, 0, 2, 0}}, {0.3, {0, 0, 0, 2}}};
}

StarShapedDomain StarShapedDomain::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("type")) throw InputError("domain spec needs a \"type\" field");
    const std::string type = j.at("type").get<std::string>();
    auto num = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_number())
            throw InputError(std::string("domain spec: missing numeric field \"") + key + "\"");
        return j.at(key).get<double>();
    };
    auto reject_unknown = [&](std::initializer_list<const char*> keys) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool known = it.key() == "type";
            for (const char* k : keys) known = known || it.key() == k;
            if (!known) throw InputError("domain spec: unknown field \"" + it.key() + "\"");
        }
    };
    if (type == "ellipsoid") {
        reject_unknown({"a", "b"});
        return ellipsoid(num("a"), num("b"));
    }
    if (type == "ball") {
        reject_unknown({"a"});
        return ball(num("a"));
    }
    if (type == "radial") {
        reject_unknown({"epsilon", "coeffs"});
        std::vector<Monomial> coeffs;
        if (j.contains("coeffs")) {
            for (const auto& row : j.at("coeffs")) {
                if (!row.is_array() || row.size() != 5)
                    throw InputError("radial coeffs entries are [c, p_x1, p_y1, p_x2, p_y2]");
                Monomial m;
                m.coeff = row[0].get<double>();
                for (int k = 0; k < 4; ++k) m.powers[k] = row[k + 1].get<int>();
                coeffs.push_back(m);
            }
        } else {
            coeffs = default_radial_polynomial();
        }
        return radial(num("epsilon"), std::move(coeffs));
    }
    throw InputError("unknown domain type '" + type + "'");
}

nlohmann::json StarShapedDomain::to_json() const {
    nlohmann::ordered_json j;
    switch (kind_) {
        case DomainKind::ellipsoid: j = {{"type", "ellipsoid"}, {"a", a_}, {"b", b_}}; break;
        case DomainKind::ball: j = {{"type", "ball"}, {"a", a_}}; break;
        case DomainKind::radial: {
            nlohmann::json rows = nlohmann::json::array();
            for (const auto& m : coeffs_)
                rows.push_back({m.coeff, m.powers[0], m.powers[1], m.powers[2], m.powers[3]});
            j = {{"type", "radial"}, {"epsilon", eps_}, {"coeffs", rows}};
            break;
        }
    }
    return nlohmann::json::parse(j.dump());
}

StarShapedDomain StarShapedDomain::parse(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        std::ifstream in(text);
        if (!in) throw InputError("domain '" + text + "' is neither kind:params nor a readable JSON file");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw InputError("domain file '" + text + "': " + e.what());
        }
        return from_json(j);
    }
    const std::string kind = text.substr(0, colon);
    const auto vals = parse_numbers(text.substr(colon + 1));
    if (kind == "ellipsoid") {
        if (vals.size() != 2) throw InputError("ellipsoid shorthand needs two widths: ellipsoid:a,b");
        return ellipsoid(vals[0], vals[1]);
    }
    if (kind == "ball") {
        if (vals.size() != 1) throw InputError("ball shorthand needs one width: ball:a");
        return ball(vals[0]);
    }
    if (kind == "radial") {
        if (vals.size() != 1) throw InputError("radial shorthand needs epsilon: radial:eps");
        return radial(vals[0], default_radial_polynomial());
    }
    throw InputError("unknown domain kind '" + kind + "'");
}

std::string StarShapedDomain::describe() const {
    std::ostringstream os;
    os.precision(10);
    switch (kind_) {
        case DomainKind::ellipsoid: os << "ellipsoid(" << a_ << "," << b_ << ")"; break;
        case DomainKind::ball: os << "ball(" << a_ << ")"; break;
        case DomainKind::radial: os << "radial(eps=" << eps_ << ", " << coeffs_.size() << " terms)"; break;
    }
    return os.str();
}

bool StarShapedDomain::is_quadratic() const { return kind_ != DomainKind::radial || eps_ == 0.0; }

std::array<double, 2> StarShapedDomain::quadratic_weights() const {
    return {pi / a_, pi / b_};
}

double StarShapedDomain::poly(const Point4& u) const {
    double s = 0.0;
    for (const auto& m : coeffs_)
        s += m.coeff * ipow(u[0], m.powers[0]) * ipow(u[1], m.powers[1]) * ipow(u[2], m.powers[2]) *
             ipow(u[3], m.powers[3]);
    return s;
}

Point4 StarShapedDomain::poly_gradient(const Point4& u) const {
    Point4 g{0, 0, 0, 0};
    for (const auto& m : coeffs_) {
        for (int k = 0; k < 4; ++k) {
            if (m.powers[k] == 0) continue;
            double t = m.coeff * m.powers[k];
            for (int l = 0; l < 4; ++l) t *= ipow(u[l], l == k ? m.powers[l] - 1 : m.powers[l]);
            g[k] += t;
        }
    }
    return g;
}

double StarShapedDomain::rho(const Point4& u) const {
    if (kind_ != DomainKind::radial) return 1.0;
    return 1.0 + eps_ * poly(u);
}

double StarShapedDomain::value(const Point4& x) const {
    if (is_quadratic()) {
        return pi * (x[0] * x[0] + x[1] * x[1]) / a_ + pi * (x[2] * x[2] + x[3] * x[3]) / b_;
    }
    const double r2 = norm2(x);
    if (r2 == 0.0) return 0.0;
    const double r = std::sqrt(r2);
    return r2 / (1.0 + eps_ * poly((1.0 / r) * x));
}

Point4 StarShapedDomain::gradient(const Point4& x) const {
    if (is_quadratic()) {
        const double ca = 2.0 * pi / a_, cb = 2.0 * pi / b_;
        return {ca * x[0], ca * x[1], cb * x[2], cb * x[3]};
    }
    const double r2 = norm2(x);
    if (r2 == 0.0) return {0, 0, 0, 0};
    const double r = std::sqrt(r2);
    const Point4 u = (1.0 / r) * x;
    const double rh = 1.0 + eps_ * poly(u);
    const Point4 gp = poly_gradient(u);
    const double radial_part = dot(u, gp);
    const Point4 tangential = gp - radial_part * u;
    return (2.0 / rh) * x - (r * eps_ / (rh * rh)) * tangential;
}

Mat4 StarShapedDomain::hessian(const Point4& x) const {
    Mat4 h{};
    if (is_quadratic()) {
        const double ca = 2.0 * pi / a_, cb = 2.0 * pi / b_;
        h[0][0] = h[1][1] = ca;
        h[2][2] = h[3][3] = cb;
        return h;
    }
    const double step = 1e-5 * std::max(norm(x), 1e-3);
    for (int k = 0; k < 4; ++k) {
        Point4 xp = x, xm = x;
        xp[k] += step;
        xm[k] -= step;
        const Point4 gp = gradient(xp), gm = gradient(xm);
        for (int l = 0; l < 4; ++l) h[l][k] = (gp[l] - gm[l]) / (2.0 * step);
    }
    for (int k = 0; k < 4; ++k)
        for (int l = k + 1; l < 4; ++l) h[k][l] = h[l][k] = 0.5 * (h[k][l] + h[l][k]);
    return h;
}

double StarShapedDomain::radius_bound() const {
    if (is_quadratic()) return std::sqrt(std::max(a_, b_) / pi);
    double l1 = 0.0;
    for (const auto& m : coeffs_) l1 += std::abs(m.coeff);
    return std::sqrt(1.0 + std::abs(eps_) * l1);
}

Point4 StarShapedDomain::project_to_boundary(const Point4& x) const {
    const double g0 = value(x);
    if (!(g0 > 0.0) || !std::isfinite(g0))
        throw ComputationError("core_geometry", "cannot project the origin or a non-finite point to the boundary");
    double s = 1.0 / std::sqrt(g0);  // exact for 2-homogeneous G
    for (int it = 0; it < 50; ++it) {
        const Point4 y = s * x;
        const double f = value(y) - 1.0;
        if (std::abs(f) <= 1e-15) return y;
        const double df = dot(x, gradient(y));
        if (!(df > 0.0)) throw ComputationError("core_geometry", "ray is not transverse to the boundary");
        s -= f / df;
    }
    const Point4 y = s * x;
    if (std::abs(value(y) - 1.0) > 1e-12)
        throw ComputationError("core_geometry", "radial projection did not converge");
    return y;
}

Classification domain_classify(const StarShapedDomain& dom, const Point4& x, double tol) {
    Classification c;
    c.value = dom.value(x);
    c.gradient = dom.gradient(x);
    if (!std::isfinite(c.value) || !std::isfinite(norm2(c.gradient)))
        throw ComputationError("core_geometry", "malformed domain: non-finite defining function");
    if (c.value < 1.0 - tol)
        c.region = Region::inside;
    else if (std::abs(c.value - 1.0) <= tol)
        c.region = Region::boundary;
    else
        c.region = Region::outside;
    return c;
}

VolumeEstimate domain_volume(const StarShapedDomain& dom, std::uint64_t samples, std::uint64_t seed) {
    if (samples < 10000) throw InputError("domain_volume needs at least 1e4 samples");
    const double h = dom.radius_bound();
    constexpr std::uint64_t kShard = 1u << 16;
    const std::uint64_t shards = (samples + kShard - 1) / kShard;
    std::vector<std::uint64_t> hits(shards, 0);
    const bool quad = dom.is_quadratic();
    const auto w = dom.quadratic_weights();
    parallel_for(shards, [&](std::size_t s) {
        const std::uint64_t first = s * kShard;
        const std::uint64_t n = std::min<std::uint64_t>(kShard, samples - first);
        if (quad) {
            hits[s] = simd::count_quadratic_hits(seed, first, n, h, w[0], w[1]);
            return;
        }
        std::uint64_t c = 0;
        for (std::uint64_t k = first; k < first + n; ++k) {
            Point4 x;
            for (int j = 0; j < 4; ++j) x[j] = h * (2.0 * counter_uniform(seed, 4 * k + j) - 1.0);
            if (dom.value(x) <= 1.0) ++c;
        }
        hits[s] = c;
    });
    std::uint64_t total = 0;
    for (auto v : hits) total += v;
    const double box = std::pow(2.0 * h, 4);
    const double p = static_cast<double>(total) / static_cast<double>(samples);
    return {box * p, box * std::sqrt(p * (1.0 - p) / static_cast<double>(samples))};
}

std::vector<Point4> sample_boundary(const StarShapedDomain& dom, std::size_t n, std::uint64_t seed) {
    std::vector<Point4> out;
    out.reserve(n);
    CounterRng rng(seed);
    while (out.size() < n) {
        Point4 g{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
        const double len = norm(g);
        if (len < 1e-12) continue;
        out.push_back(dom.project_to_boundary((1.0 / len) * g));
    }
    return out;
}

ModelRegion::ModelRegion(ModelKind k, double width) : kind(k), a(width) {
    if (!(width > 0.0)) throw InputError("model region width must be positive");
}

bool ModelRegion::contains(const Point4& p) const {
    const double q1 = p[0] * p[0] + p[1] * p[1];
    if (kind == ModelKind::cylinder) return pi * q1 <= a;
    return pi * (q1 + p[2] * p[2] + p[3] * p[3]) <= a;
}

}  // namespace symcap
