#pragma once
#include <cstddef>
#include <cstdint>
#include <string>

namespace symcap::simd {

enum class Isa { scalar, avx2, neon };

/// Best instruction set usable on this machine; SYMCAP_FORCE_SCALAR=1 pins scalar.
Isa active_isa();
std::string isa_name(Isa isa);

/// Box sampling for quadratic forms: draws n points uniformly in [-h,h]^4 from
/// the counter stream (seed, 4*(first+k)+c) and counts those with
/// w1*|z1|^2 + w2*|z2|^2 <= 1.
std::uint64_t count_quadratic_hits(Isa isa, std::uint64_t seed, std::uint64_t first, std::uint64_t n,
                                   double half_width, double w1, double w2);

/// sum_k w[k]*v[k]. Vector variants use a fixed lane-blocked summation order.
double weighted_sum(Isa isa, const double* w, const double* v, std::size_t n);

inline std::uint64_t count_quadratic_hits(std::uint64_t seed, std::uint64_t first, std::uint64_t n,
                                          double half_width, double w1, double w2) {
    return count_quadratic_hits(active_isa(), seed, first, n, half_width, w1, w2);
}
inline double weighted_sum(const double* w, const double* v, std::size_t n) {
    return weighted_sum(active_isa(), w, v, n);
}

namespace detail {
std::uint64_t count_quadratic_hits_scalar(std::uint64_t, std::uint64_t, std::uint64_t, double, double, double);
double weighted_sum_scalar(const double*, const double*, std::size_t);
std::uint64_t count_quadratic_hits_avx2(std::uint64_t, std::uint64_t, std::uint64_t, double, double, double);
double weighted_sum_avx2(const double*, const double*, std::size_t);
std::uint64_t count_quadratic_hits_neon(std::uint64_t, std::uint64_t, std::uint64_t, double, double, double);
double weighted_sum_neon(const double*, const double*, std::size_t);
}  // namespace detail

}  // namespace symcap::simd
