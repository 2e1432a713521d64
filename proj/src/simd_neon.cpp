#include "symcap/simd.hpp"
#include "symcap/rng.hpp"

#include <arm_neon.h>

namespace symcap::simd::detail {

// NEON has no 64-bit lane multiply, so the counter stream is produced in
// scalar code and only the classification runs two points per vector.
std::uint64_t count_quadratic_hits_neon(std::uint64_t seed, std::uint64_t first, std::uint64_t n,
                                        double h, double w1, double w2) {
    const float64x2_t vh = vdupq_n_f64(h), two = vdupq_n_f64(2.0), one = vdupq_n_f64(1.0);
    const float64x2_t vw1 = vdupq_n_f64(w1), vw2 = vdupq_n_f64(w2);
    std::uint64_t hits = 0;
    std::uint64_t k = first;
    const std::uint64_t end = first + n;
    for (; k + 2 <= end; k += 2) {
        float64x2_t x[4];
        for (int c = 0; c < 4; ++c) {
            const double u[2] = {counter_uniform(seed, 4 * k + c), counter_uniform(seed, 4 * (k + 1) + c)};
            x[c] = vmulq_f64(vh, vsubq_f64(vmulq_f64(two, vld1q_f64(u)), one));
        }
        const float64x2_t q1 = vaddq_f64(vmulq_f64(x[0], x[0]), vmulq_f64(x[1], x[1]));
        const float64x2_t q2 = vaddq_f64(vmulq_f64(x[2], x[2]), vmulq_f64(x[3], x[3]));
        const float64x2_t g = vaddq_f64(vmulq_f64(vw1, q1), vmulq_f64(vw2, q2));
        const uint64x2_t le = vcleq_f64(g, one);
        hits += (vgetq_lane_u64(le, 0) & 1u) + (vgetq_lane_u64(le, 1) & 1u);
    }
    if (k < end) hits += count_quadratic_hits_scalar(seed, k, end - k, h, w1, w2);
    return hits;
}

double weighted_sum_neon(const double* w, const double* v, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(w + k), vld1q_f64(v + k)));
    double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; k < n; ++k) s += w[k] * v[k];
    return s;
}

}  // namespace symcap::simd::detail
