#include "symcap/simd.hpp"
#include "symcap/rng.hpp"

#include <immintrin.h>

namespace symcap::simd::detail {

namespace {

// Low 64 bits of a*b per lane, built from 32x32->64 partial products.
inline __m256i mul64(__m256i a, __m256i b) {
    const __m256i lo = _mm256_mul_epu32(a, b);
    const __m256i ahi_b = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), b);
    const __m256i a_bhi = _mm256_mul_epu32(a, _mm256_srli_epi64(b, 32));
    return _mm256_add_epi64(lo, _mm256_slli_epi64(_mm256_add_epi64(ahi_b, a_bhi), 32));
}

inline __m256i splitmix(__m256i z) {
    const __m256i m1 = _mm256_set1_epi64x(static_cast<long long>(0xBF58476D1CE4E5B9ull));
    const __m256i m2 = _mm256_set1_epi64x(static_cast<long long>(0x94D049BB133111EBull));
    z = mul64(_mm256_xor_si256(z, _mm256_srli_epi64(z, 30)), m1);
    z = mul64(_mm256_xor_si256(z, _mm256_srli_epi64(z, 27)), m2);
    return _mm256_xor_si256(z, _mm256_srli_epi64(z, 31));
}

// Exact conversion of integers below 2^53: split into 21 high and 32 low bits.
inline __m256d u53_to_double(__m256i v) {
    const __m256i magic_bits = _mm256_set1_epi64x(0x4330000000000000ll);
    const __m256d magic = _mm256_set1_pd(0x1.0p52);
    const __m256i lo = _mm256_and_si256(v, _mm256_set1_epi64x(0xFFFFFFFFll));
    const __m256i hi = _mm256_srli_epi64(v, 32);
    const __m256d dlo = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(lo, magic_bits)), magic);
    const __m256d dhi = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(hi, magic_bits)), magic);
    return _mm256_add_pd(_mm256_mul_pd(dhi, _mm256_set1_pd(0x1.0p32)), dlo);
}

}  // namespace

std::uint64_t count_quadratic_hits_avx2(std::uint64_t seed, std::uint64_t first, std::uint64_t n,
                                        double h, double w1, double w2) {
    const __m256i golden = _mm256_set1_epi64x(static_cast<long long>(0x9E3779B97F4A7C15ull));
    const __m256i vseed = _mm256_set1_epi64x(static_cast<long long>(seed));
    const __m256d vh = _mm256_set1_pd(h), two = _mm256_set1_pd(2.0), one = _mm256_set1_pd(1.0);
    const __m256d scale = _mm256_set1_pd(0x1.0p-53);
    const __m256d vw1 = _mm256_set1_pd(w1), vw2 = _mm256_set1_pd(w2);
    std::uint64_t hits = 0;
    std::uint64_t k = first;
    const std::uint64_t end = first + n;
    for (; k + 4 <= end; k += 4) {
        __m256d x[4];
        for (int c = 0; c < 4; ++c) {
            const __m256i ctr = _mm256_set_epi64x(static_cast<long long>(4 * (k + 3) + c),
                                                  static_cast<long long>(4 * (k + 2) + c),
                                                  static_cast<long long>(4 * (k + 1) + c),
                                                  static_cast<long long>(4 * k + c));
            const __m256i z = splitmix(_mm256_add_epi64(vseed, mul64(ctr, golden)));
            const __m256d u = _mm256_mul_pd(u53_to_double(_mm256_srli_epi64(z, 11)), scale);
            x[c] = _mm256_mul_pd(vh, _mm256_sub_pd(_mm256_mul_pd(two, u), one));
        }
        const __m256d q1 = _mm256_add_pd(_mm256_mul_pd(x[0], x[0]), _mm256_mul_pd(x[1], x[1]));
        const __m256d q2 = _mm256_add_pd(_mm256_mul_pd(x[2], x[2]), _mm256_mul_pd(x[3], x[3]));
        const __m256d g = _mm256_add_pd(_mm256_mul_pd(vw1, q1), _mm256_mul_pd(vw2, q2));
        const int mask = _mm256_movemask_pd(_mm256_cmp_pd(g, one, _CMP_LE_OQ));
        hits += static_cast<std::uint64_t>(__builtin_popcount(static_cast<unsigned>(mask)));
    }
    if (k < end) hits += count_quadratic_hits_scalar(seed, k, end - k, h, w1, w2);
    return hits;
}

double weighted_sum_avx2(const double* w, const double* v, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + k), _mm256_loadu_pd(v + k)));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; k < n; ++k) s += w[k] * v[k];
    return s;
}

}  // namespace symcap::simd::detail
