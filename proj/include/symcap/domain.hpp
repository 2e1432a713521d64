#pragma once
#include "symcap/point4.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace symcap {

using Mat4 = std::array<std::array<double, 4>, 4>;

inline constexpr double kBoundaryTol = 1e-9;

enum class DomainKind { ellipsoid, ball, radial };
enum class Region { inside, boundary, outside };

/// c * x1^p0 y1^p1 x2^p2 y2^p3, evaluated on the unit sphere.
struct Monomial {
    double coeff = 0.0;
    std::array<int, 4> powers{0, 0, 0, 0};
};

struct Classification {
    double value = 0.0;
    Point4 gradient{};
    Region region = Region::inside;
};

/// Star-shaped domain {G <= 1} with a 2-homogeneous defining function G.
///   ellipsoid(a,b): G = pi|z1|^2/a + pi|z2|^2/b
///   ball(a):        ellipsoid(a,a)
///   radial(eps,P):  G = |x|^2 / rho(x/|x|), rho = 1 + eps*P, so eps = 0 is ball(pi)
class StarShapedDomain {
public:
    static StarShapedDomain ellipsoid(double a, double b);
    static StarShapedDomain ball(double a);
    static StarShapedDomain radial(double epsilon, std::vector<Monomial> coeffs);

    /// Polynomial used by the `radial:EPS` shorthand: 0.3*(|u2|^2 - |u1|^2).
    static std::vector<Monomial> default_radial_polynomial();

    /// Accepts `ellipsoid:a,b`, `ball:a`, `radial:eps`, or a path to a JSON spec.
    static StarShapedDomain parse(const std::string& text);
    static StarShapedDomain from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    std::string describe() const;

    DomainKind kind() const { return kind_; }
    double a() const { return a_; }
    double b() const { return b_; }
    double epsilon() const { return eps_; }
    const std::vector<Monomial>& coeffs() const { return coeffs_; }

    /// True for ellipsoid and ball, and for radial with epsilon == 0.
    bool is_quadratic() const;
    /// Coefficients (w1, w2) with G = w1|z1|^2 + w2|z2|^2 when is_quadratic().
    std::array<double, 2> quadratic_weights() const;

    double value(const Point4& x) const;
    Point4 gradient(const Point4& x) const;
    Mat4 hessian(const Point4& x) const;

    /// rho(u) and its ambient gradient for the radial family (1 and 0 otherwise).
    double rho(const Point4& u) const;

    /// Upper bound for |x| over the domain.
    double radius_bound() const;

    /// Scales x along its ray onto {G = 1} by Newton on s -> G(s x) - 1.
    Point4 project_to_boundary(const Point4& x) const;

private:
    DomainKind kind_ = DomainKind::ball;
    double a_ = 0.0, b_ = 0.0, eps_ = 0.0;
    std::vector<Monomial> coeffs_;

    double poly(const Point4& u) const;
    Point4 poly_gradient(const Point4& u) const;
};

Classification domain_classify(const StarShapedDomain& dom, const Point4& x, double tol = kBoundaryTol);

struct VolumeEstimate {
    double volume = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo volume over the box [-r,r]^4, r = radius_bound(). Deterministic in seed.
VolumeEstimate domain_volume(const StarShapedDomain& dom, std::uint64_t samples, std::uint64_t seed = 0x5EED);

/// Uniformly random directions on S^3 pushed radially onto the boundary.
std::vector<Point4> sample_boundary(const StarShapedDomain& dom, std::size_t n, std::uint64_t seed);

enum class ModelKind { ball, cylinder };

/// B(a) = {pi|z|^2 <= a} or Z(a) = {pi|z1|^2 <= a}.
struct ModelRegion {
    ModelKind kind = ModelKind::ball;
    double a = 1.0;
    ModelRegion(ModelKind k, double width);
    bool contains(const Point4& p) const;
};

}  // namespace symcap
