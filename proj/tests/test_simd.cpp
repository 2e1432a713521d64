#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symcap/rng.hpp"
#include "symcap/simd.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace symcap;
using simd::Isa;

namespace {

std::vector<Isa> vector_isas() { return {Isa::avx2, Isa::neon, simd::active_isa()}; }

}  // namespace

TEST_CASE("dispatcher reports an isa") {
    MESSAGE("active isa: " << simd::isa_name(simd::active_isa()));
    CHECK(!simd::isa_name(simd::active_isa()).empty());
}

TEST_CASE("hit counts are identical across kernels") {
    struct Case {
        std::uint64_t seed, first, n;
        double h, w1, w2;
    };
    const double pi = std::numbers::pi;
    const std::vector<Case> cases = {
        {0x5EED, 0, 100000, 1.0, pi, pi},
        {0x5EED, 3, 99997, 0.8, pi, pi / 2},
        {7, 1, 1, 1.0, 1.0, 1.0},
        {7, 0, 3, 1.0, 1.0, 1.0},
        {7, 5, 0, 1.0, 1.0, 1.0},
        {123456789, 1000003, 65537, 1.3, 0.7, 2.9},
        {42, 0, 50001, 2.0, 0.25, 0.25},
    };
    for (const auto& c : cases) {
        const auto ref = simd::count_quadratic_hits(Isa::scalar, c.seed, c.first, c.n, c.h, c.w1, c.w2);
        for (Isa isa : vector_isas())
            CHECK(simd::count_quadratic_hits(isa, c.seed, c.first, c.n, c.h, c.w1, c.w2) == ref);
    }
}

TEST_CASE("hit counts split over shards add up") {
    const auto whole = simd::count_quadratic_hits(Isa::scalar, 9, 0, 40000, 1.0, 2.0, 3.0);
    std::uint64_t parts = 0;
    for (std::uint64_t b = 0; b < 40000; b += 4093)
        parts += simd::count_quadratic_hits(9, b, std::min<std::uint64_t>(4093, 40000 - b), 1.0, 2.0, 3.0);
    CHECK(parts == whole);
}

TEST_CASE("hit fraction estimates the ellipsoid volume") {
    // E(1,2) has volume 1; the box [-h,h]^4 with h = 0.8 has volume 16 h^4.
    const double pi = std::numbers::pi, h = 0.8;
    const std::uint64_t n = 400000;
    const auto hits = simd::count_quadratic_hits(0x5EED, 0, n, h, pi, pi / 2);
    const double p = static_cast<double>(hits) / n, box = 16 * std::pow(h, 4);
    const double se = box * std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(box * p - 1.0) < 4 * se);
}

TEST_CASE("weighted sums agree across kernels") {
    CounterRng rng(11);
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 33u, 1000u, 100001u}) {
        std::vector<double> w(n), v(n);
        double mag = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            w[k] = rng.uniform(0.0, 1.0);
            v[k] = rng.uniform(-1.0, 3.0);
            mag += std::abs(w[k] * v[k]);
        }
        const double ref = simd::weighted_sum(Isa::scalar, w.data(), v.data(), n);
        for (Isa isa : vector_isas()) {
            const double s = simd::weighted_sum(isa, w.data(), v.data(), n);
            CHECK(std::abs(s - ref) <= 1e-12 * std::max(1.0, mag));
            // fixed summation order: repeat calls are bit-identical
            CHECK(simd::weighted_sum(isa, w.data(), v.data(), n) == s);
        }
    }
}

TEST_CASE("weighted sum of exact values") {
    std::vector<double> w(13, 0.5), v(13);
    for (int k = 0; k < 13; ++k) v[k] = k;
    for (Isa isa : vector_isas()) CHECK(simd::weighted_sum(isa, w.data(), v.data(), 13) == 39.0);
}
