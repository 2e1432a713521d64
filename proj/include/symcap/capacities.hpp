#pragma once
#include "symcap/domain.hpp"
#include "symcap/reeb.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace symcap {

struct EllipsoidCapacities {
    std::vector<double> spectrum;  ///< first N of {m a + n b : m, n >= 0, m + n >= 1}, sorted
    double A_min = 0.0;
    double gromov = 0.0, cylindrical = 0.0, ech1 = 0.0;
    double volume = 0.0;
};
/// Closed forms for E(a, b). Throws InputError for a, b <= 0 or N < 1.
EllipsoidCapacities ellipsoid_oracle(double a, double b, int N);

struct ViterboResult {
    bool holds = false;
    double margin = 0.0;  ///< sqrt(2 vol) - c
};
ViterboResult viterbo_check(double c, double volume);

struct CapacityBudget {
    std::size_t initial_seeds = 64;
    std::size_t max_seeds = 256;  ///< seeds double until an orbit shows up or this is reached
    double max_period = 0.0;      ///< <= 0: search default
    std::uint64_t seed = 0x5EED;
    std::uint64_t volume_samples = 1000000;
    int sphere_nodes = 64;  ///< angle nodes per circle for the radial-domain sphere scan
};

struct CapacityReport {
    std::string status;  ///< "non-certified" or "inconclusive"
    std::optional<double> A_min;
    std::optional<ReebOrbit> A_min_orbit;
    std::optional<double> A_hopf;  ///< only when the domain is an ellipsoid or ball
    double cZ_upper = 0.0, ball_lower = 0.0;
    bool bounds_exact = false;     ///< closed form, otherwise from a sphere grid
    double volume = 0.0;           ///< closed form or sphere quadrature
    double volume_monte_carlo = 0.0;
    double volume_std_error = 0.0;
    double viterbo_lhs = 0.0, viterbo_rhs = 0.0;
    double systolic_ratio = 0.0;
    std::size_t seeds_used = 0;
    std::size_t orbits_found = 0;
    std::vector<std::string> diagnostics;
};

/// Minimal action over orbits found by the shooting search (an upper bound for
/// A_min), bounds, volume and the Viterbo quantities.
CapacityReport a_min_pipeline(const StarShapedDomain& dom, const CapacityBudget& budget = {});

nlohmann::json to_json(const CapacityReport& r);

}  // namespace symcap
