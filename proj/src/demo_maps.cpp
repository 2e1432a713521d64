#include "symcap/demo_maps.hpp"

#include "symcap/rng.hpp"

namespace symcap {

HamiltonianPtr demo_twist_hamiltonian(std::uint64_t seed) {
    if (seed == 0)
        return make_sum_hamiltonian(make_twist_hamiltonian(1.0, -0.4, 0.5, 0.12, 0.88),
                                    make_annular_perturbation(1.0, 0.2, 0.8, {{0.004, 2, 0.3, 0}, {0.003, 3, 1.0, 1}}));
    CounterRng rng(seed, 0);
    auto in = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
    const double inner = in(-0.5, -0.2), outer = in(0.3, 0.6);
    const double r0 = in(0.12, 0.2), r1 = in(0.8, 0.88);
    // The first mode is autonomous: time-dependent modes average out over a period
    // and would leave an almost degenerate circle of fixed points.
    std::vector<AngularMode> modes;
    for (int q = 0; q < 2; ++q) {
        AngularMode m;
        m.amp = q == 0 ? in(0.003, 0.005) : in(0.001, 0.003);
        m.k = 1 + static_cast<int>(3 * rng.uniform());
        m.phase = in(0.0, 6.283185307179586);
        m.m = q;
        modes.push_back(m);
    }
    return make_sum_hamiltonian(make_twist_hamiltonian(1.0, inner, outer, r0, r1),
                                make_annular_perturbation(1.0, 0.2, 0.8, modes));
}

HamiltonianPtr demo_negative_hamiltonian(double rate) { return make_rotation_hamiltonian(1.0, -rate); }

}  // namespace symcap
