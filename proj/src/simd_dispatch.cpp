#include "symcap/simd.hpp"
#include "symcap/rng.hpp"

#include <cstdlib>

namespace symcap::simd {

namespace detail {

std::uint64_t count_quadratic_hits_scalar(std::uint64_t seed, std::uint64_t first, std::uint64_t n,
                                          double h, double w1, double w2) {
    std::uint64_t hits = 0;
    for (std::uint64_t k = first; k < first + n; ++k) {
        double x[4];
        for (int c = 0; c < 4; ++c) x[c] = h * (2.0 * counter_uniform(seed, 4 * k + c) - 1.0);
        const double q1 = x[0] * x[0] + x[1] * x[1];
        const double q2 = x[2] * x[2] + x[3] * x[3];
        if (w1 * q1 + w2 * q2 <= 1.0) ++hits;
    }
    return hits;
}

double weighted_sum_scalar(const double* w, const double* v, std::size_t n) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += w[k] * v[k];
    return s;
}

}  // namespace detail

namespace {

Isa detect() {
    if (const char* env = std::getenv("SYMCAP_FORCE_SCALAR"); env && env[0] == '1') return Isa::scalar;
#if defined(SYMCAP_HAVE_AVX2)
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2")) return Isa::avx2;
#endif
#if defined(SYMCAP_HAVE_NEON)
    return Isa::neon;
#endif
    return Isa::scalar;
}

}  // namespace

Isa active_isa() {
    static const Isa isa = detect();
    return isa;
}

std::string isa_name(Isa isa) {
    switch (isa) {
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
        default: return "scalar";
    }
}

std::uint64_t count_quadratic_hits(Isa isa, std::uint64_t seed, std::uint64_t first, std::uint64_t n,
                                   double h, double w1, double w2) {
#if defined(SYMCAP_HAVE_AVX2)
    if (isa == Isa::avx2) return detail::count_quadratic_hits_avx2(seed, first, n, h, w1, w2);
#endif
#if defined(SYMCAP_HAVE_NEON)
    if (isa == Isa::neon) return detail::count_quadratic_hits_neon(seed, first, n, h, w1, w2);
#endif
    (void)isa;
    return detail::count_quadratic_hits_scalar(seed, first, n, h, w1, w2);
}

double weighted_sum(Isa isa, const double* w, const double* v, std::size_t n) {
#if defined(SYMCAP_HAVE_AVX2)
    if (isa == Isa::avx2) return detail::weighted_sum_avx2(w, v, n);
#endif
#if defined(SYMCAP_HAVE_NEON)
    if (isa == Isa::neon) return detail::weighted_sum_neon(w, v, n);
#endif
    (void)isa;
    return detail::weighted_sum_scalar(w, v, n);
}

}  // namespace symcap::simd
