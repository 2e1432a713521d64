#pragma once
#include "symcap/domain.hpp"
#include "symcap/sp2.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace symcap {

/// Reeb field J0 grad G / (1/2 <x, grad G>) at a boundary point. Throws if x is
/// further than tol from {G = 1}.
Point4 reeb_vector(const StarShapedDomain& dom, const Point4& x, double tol = kBoundaryTol);

/// Same formula without the boundary check (used inside integrator stages).
Point4 reeb_field(const StarShapedDomain& dom, const Point4& x);

/// Jacobian of reeb_field.
Mat4 reeb_jacobian(const StarShapedDomain& dom, const Point4& x);

/// Typical period scale used to pick default step sizes: the smallest
/// closed-form orbit action for quadratic domains, pi * min rho otherwise.
double period_scale(const StarShapedDomain& dom);
inline constexpr int kStepsPerPeriod = 4096;

/// One RK4 step of size dt followed by radial projection.
Point4 reeb_step(const StarShapedDomain& dom, const Point4& x, double dt);

/// RK4 step of the pair (x, v) with v' = DR(x) v; x is projected afterwards.
std::pair<Point4, Point4> reeb_tangent_step(const StarShapedDomain& dom, const Point4& x, const Point4& v, double dt);

struct Trajectory {
    std::vector<double> times;
    std::vector<Point4> points;
    double max_drift = 0.0;  ///< largest |G - 1| seen before a projection
};

/// RK4 on the Reeb field with radial projection onto {G = 1} after every step.
/// h <= 0 selects period_scale(dom) / 4096; the last step is shortened to hit T.
Trajectory integrate_flow(const StarShapedDomain& dom, const Point4& x0, double T, double h = 0.0);

/// Flow end point together with the linearized flow (4x4, row-major in Mat4).
struct FlowJet {
    Point4 end{};
    Mat4 jacobian{};
};
FlowJet flow_with_jacobian(const StarShapedDomain& dom, const Point4& x0, double T, double h = 0.0,
                           Trajectory* samples = nullptr, std::vector<Mat4>* jacobians = nullptr);

enum class OrbitType { elliptic, pos_hyperbolic, neg_hyperbolic, degenerate, foliated_family };
std::string orbit_type_name(OrbitType t);

struct ReebOrbit {
    Point4 initial_point{};
    double period = 0.0;
    double action = 0.0;
    std::vector<Point4> samples;
    Mat2 monodromy = mat2_identity();
    double rotation_number = 0.0;
    int cz_index = 0;
    OrbitType type = OrbitType::elliptic;
    bool degenerate_warning = false;
    bool has_invariants = false;
};

struct OrbitSearchOptions {
    std::size_t seeds = 64;
    double max_period = 0.0;          ///< <= 0 picks 2.5 * pi * radius_bound^2
    std::uint64_t seed = 0x5EED;
    double near_return = 1e-3;        ///< a seed within this of its own refined orbit "closes up"
    double dedup_tol = 1e-6;
    double newton_tol = 1e-10;
    double foliated_fraction = 0.99;
    std::size_t max_candidates = 12;  ///< near-return minima refined per seed
};

struct OrbitSearchResult {
    std::vector<ReebOrbit> orbits;
    bool foliated = false;
    std::size_t seeds_skipped = 0;
    std::vector<std::string> diagnostics;
};

/// Shooting search: near-returns along each seed trajectory are refined by
/// Newton on a transverse hyperplane, reduced to simple orbits and deduplicated.
OrbitSearchResult find_closed_orbits(const StarShapedDomain& dom, const OrbitSearchOptions& opt = {});

/// Linearized flow on ker(alpha) in the projected quaternionic frame over one
/// period; fills monodromy, rotation number, CZ index and type.
ReebOrbit orbit_invariants(const StarShapedDomain& dom, ReebOrbit orbit);

/// The Sp(2) arc of the linearized flow (times normalized to [0,1]).
Sp2Arc linearized_arc(const StarShapedDomain& dom, const Point4& x0, double period);

/// Symplectic frame (e1, e2) of ker(alpha) at a boundary point, omega(e1,e2) = 1.
std::array<Point4, 2> contact_frame(const StarShapedDomain& dom, const Point4& x);

/// Closed polygon quadrature of lambda_0 along uniformly time-sampled points.
double action_integral(const StarShapedDomain& dom, const std::vector<Point4>& samples, double period);

}  // namespace symcap
