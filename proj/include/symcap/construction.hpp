#pragma once
#include "symcap/disk_maps.hpp"
#include "symcap/point4.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace symcap {

/// Where positivity and the collar form are checked.
struct BuildOptions {
    int n_r = 65;
    int n_theta = 128;
    int n_t = 32;
    double collar_tol = 1e-9;
};

/// The domain A(a, H) in C^2: pairs (z1, z2) with pi|z1|^2 <= a and
/// pi|z2|^2 <= H(arg(z2)/2pi, z1). H lives on R/Z x B^2(a) (radius sqrt(a/pi))
/// and must equal C (a - pi|z|^2) on the collar pi|z|^2 >= collar * a.
class DomainAaH {
public:
    static DomainAaH build(double a, HamiltonianPtr H, double C, double collar = 0.9, const BuildOptions& opt = {});
    /// H = C (a - pi|z|^2); A(a, H) is the ellipsoid E(a, C a).
    static DomainAaH quadratic(double a, double C, double collar = 0.9);
    /// {"a","C","collar","analytic":"quadratic","bumps":[...]} or
    /// {"a","C","collar","grid":{"nr","nt","ntheta"},"values":"ham.csv"}; paths relative to base_dir.
    static DomainAaH from_json(const nlohmann::json& j, const std::string& base_dir = ".");
    static DomainAaH from_file(const std::string& path);

    double a() const { return a_; }
    double C() const { return C_; }
    double collar() const { return collar_; }
    double radius() const;
    const HamiltonianPtr& hamiltonian() const { return H_; }
    /// Pure C(a - pi|z|^2) without perturbations (enables the closed-form/SIMD paths).
    bool is_quadratic() const { return quadratic_; }
    /// Largest H over the check grid (bounds |z2| on the domain).
    double max_H() const { return max_H_; }
    nlohmann::json describe() const;

    double H(double t, double x, double y) const { return H_->value(t, x, y); }
    bool contains(const Point4& p) const;

    /// Nodes (t_k, r_i, theta_j) used for pointwise checks: a 4x refinement of the
    /// Hamiltonian's own grid when it has one, otherwise the build grid.
    struct CheckGrid {
        int n_t = 0;
        PolarGrid grid;
    };
    CheckGrid check_grid() const;

private:
    double a_ = 0.0, C_ = 0.0, collar_ = 0.9;
    HamiltonianPtr H_;
    bool quadratic_ = false;
    double max_H_ = 0.0;
    BuildOptions opt_;
    nlohmann::json spec_;
};

struct SandwichOptions {
    std::uint64_t samples = 100000;
    std::uint64_t seed = 0x5EED;
    double pointwise_tol = 1e-12;  ///< relative to a
};
struct SandwichReport {
    bool subset_cylinder = true;
    bool contains_ball = false;
    double worst_margin = 0.0;            ///< min over nodes of H - (a - pi|z|^2)
    std::uint64_t cylinder_violations = 0;
    std::uint64_t ball_violations = 0;    ///< sampled points of B(a) outside A
    std::uint64_t domain_hits = 0;
    std::uint64_t samples = 0;
};
/// Throws ComputationError when the pointwise test and membership sampling disagree.
SandwichReport sandwich_check(const DomainAaH& dom, const SandwichOptions& opt = {});

struct VolumeOptions {
    std::uint64_t mc_samples = 1000000;
    std::uint64_t seed = 0x5EED;
    double agreement = 5e-3;
};
struct VolumeReport {
    double quadrature = 0.0;
    double monte_carlo = 0.0;
    double mc_std_error = 0.0;
    double relative_difference = 0.0;
};
/// int_0^1 int_{B^2(a)} H dA dt, cross-checked by Monte Carlo membership.
VolumeReport volume(const DomainAaH& dom, const VolumeOptions& opt = {});
double volume_quadrature(const DomainAaH& dom);

struct GraphFlowOptions {
    int steps = 300;            ///< RK4 steps on t in [0,1]
    int reference_steps = 256;  ///< steps for the flow_from_hamiltonian comparison
    double tolerance = 1e-4;
};
struct GraphReturnMap {
    DiskMapLift lift;                 ///< degree-0 lift from the graph trivialization
    std::vector<double> return_time;  ///< graph time of the first return (1 everywhere)
    double max_mismatch = 0.0;        ///< vs flow_from_hamiltonian, Cartesian sup-norm
    double max_graph_drift = 0.0;     ///< |s - H(t, z)| along the characteristic
};
/// Integrates X_{H_t} + d/dt + (dH/dt) d/ds on the graph from the t = 0 disk to t = 1.
GraphReturnMap graph_section_return_map(const DomainAaH& dom, const PolarGrid& grid, const GraphFlowOptions& opt = {});

/// Certificate for c_Z <= a and, when B(a) fits inside, c_G = c_Z = a.
nlohmann::json embedding_report(const DomainAaH& dom, const SandwichReport& sandwich, const VolumeReport& vol);

}  // namespace symcap
