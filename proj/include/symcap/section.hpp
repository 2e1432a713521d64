#pragma once
#include "symcap/domain.hpp"

#include <vector>

namespace symcap {

/// Return data of the disk {arg z2 = 0} (radially projected model page) on the
/// polar grid r_i = i/(n_r-1), theta_j = 2 pi j / n_theta. Arrays are indexed
/// i * n_theta + j.
struct SectionReturnData {
    int n_r = 0;
    int n_theta = 0;
    std::vector<double> ret_r;       ///< model radius of the return point
    std::vector<double> ret_theta;   ///< model angle of the return point in [0, 2 pi)
    std::vector<double> sigma;       ///< first return time
    std::vector<double> theta_lift;  ///< degree-1 lifted angle
    std::vector<double> primitive;   ///< h with lambda_0 pulled back = h dtheta
    std::vector<double> density;     ///< F = dh/dr, the area density
    double boundary_action = 0.0;    ///< period of the boundary orbit {z2 = 0}
    /// Rotation number of the linearized flow along the binding, measured
    /// against the page framing (global frame value minus one). Positive is
    /// the stand-in for the section surviving the blow-up at the binding.
    double binding_rotation = 0.0;

    double r_at(int i) const { return static_cast<double>(i) / (n_r - 1); }
    double theta_at(int j) const;
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_theta + j; }
};

struct SectionOptions {
    double bisection_tol = 1e-10;
    double time_budget = 4.0;  ///< in units of the period scale
    double step = 0.0;         ///< <= 0: period scale / 4096
};

/// Model disk point (sin(pi r/2) e^{i theta}, cos(pi r/2)) pushed onto the boundary.
Point4 section_point(const StarShapedDomain& dom, double r, double theta);

/// Model coordinates (r, theta, t) of a nonzero point.
std::array<double, 3> model_coordinates(const Point4& x);

SectionReturnData section_return_map(const StarShapedDomain& dom, int n_r, int n_theta,
                                     const SectionOptions& opt = {});

}  // namespace symcap
