#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "vpme/simd.hpp"

using namespace vpme;

namespace {

struct Case {
    std::vector<double> w, a, b;
    double h = 0.37;
    std::size_t K = 3 * simd::block + 17;
};

Case make_case(std::size_t nodes) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Case c;
    for (std::size_t j = 0; j < nodes; ++j) {
        c.w.push_back(3.0 * u(rng));
        c.a.push_back(u(rng) - 0.5);
        c.b.push_back(u(rng) - 0.5);
    }
    return c;
}

// direct evaluation with libm
void reference(const Case& c, std::vector<double>& V, std::vector<double>& W) {
    V.assign(c.K, 0.0);
    W.assign(c.K, 0.0);
    for (std::size_t k = 0; k < c.K; ++k)
        for (std::size_t j = 0; j < c.w.size(); ++j) {
            const double x = c.w[j] * double(k) * c.h / 2;
            V[k] += c.a[j] * std::sin(x) * std::sin(x);
            W[k] += c.b[j] * std::sin(x) * std::cos(x);
        }
}

double scale(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += std::abs(x);
    return s;
}

void check_kernel(simd::HalfAngleKernel kernel, std::size_t nodes) {
    const Case c = make_case(nodes);
    std::vector<double> V(c.K), W(c.K), Vr, Wr;
    kernel(c.w.data(), c.a.data(), c.b.data(), nodes, c.h, c.K, V.data(), W.data());
    reference(c, Vr, Wr);
    double err = 0;
    for (std::size_t k = 0; k < c.K; ++k) err = std::max({err, std::abs(V[k] - Vr[k]), std::abs(W[k] - Wr[k])});
    CHECK(err < 1e-12 * std::max(scale(c.a), scale(c.b)));
}

bool has(const char* isa) { return std::strcmp(simd::active_isa(), isa) == 0; }

}  // namespace

TEST_CASE("scalar kernel against libm") {
    for (std::size_t n : {1u, 3u, 8u, 101u}) check_kernel(simd::half_angle_sums_scalar, n);
}

TEST_CASE("dispatched kernel against libm including ragged node counts") {
    INFO("active ISA: " << simd::active_isa());
    for (std::size_t n : {1u, 3u, 5u, 8u, 101u}) check_kernel(simd::half_angle_sums, n);
}

TEST_CASE("vector kernel agrees with scalar when available") {
#if defined(__x86_64__) || defined(__i386__)
    if (has("avx2")) {
        for (std::size_t n : {4u, 7u, 64u}) check_kernel(simd::half_angle_sums_avx2, n);
        return;
    }
#endif
#if defined(__aarch64__)
    if (has("neon")) {
        for (std::size_t n : {2u, 7u, 64u}) check_kernel(simd::half_angle_sums_neon, n);
        return;
    }
#endif
    MESSAGE("no vector unit, scalar only");
}

TEST_CASE("zero step gives zero sums") {
    const Case c = make_case(9);
    std::vector<double> V(16, 1.0), W(16, 1.0);
    simd::half_angle_sums(c.w.data(), c.a.data(), c.b.data(), 9, 0.0, 16, V.data(), W.data());
    for (std::size_t k = 0; k < 16; ++k) {
        CHECK(V[k] == 0.0);
        CHECK(W[k] == 0.0);
    }
}
