#pragma once
#include "symcap/disk_maps.hpp"

#include <cstdint>

namespace symcap {

/// Twist plus small annular perturbation on the unit disk. Its time-one map is
/// monotone on the strip, rotates rigidly near both boundary circles and has
/// only positive-action fixed points. seed 0 gives a fixed reference member;
/// other seeds draw rates, collar radii and perturbation modes.
HamiltonianPtr demo_twist_hamiltonian(std::uint64_t seed = 0);

/// Rigid rotation by -rate (rate > 0): the center is a fixed point with negative action.
HamiltonianPtr demo_negative_hamiltonian(double rate = 0.5);

}  // namespace symcap
