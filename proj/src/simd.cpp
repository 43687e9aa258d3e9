#include "vpme/simd.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#endif
#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace vpme::simd {

void half_angle_sums_scalar(const double* w, const double* a, const double* b, std::size_t nodes,
                            double h, std::size_t K, double* V, double* W) {
    std::fill(V, V + K, 0.0);
    std::fill(W, W + K, 0.0);
    for (std::size_t k0 = 0; k0 < K; k0 += block) {
        const std::size_t n = std::min(block, K - k0);
        for (std::size_t j = 0; j < nodes; ++j) {
            const double th = 0.5 * w[j] * h;
            double c = std::cos(th * double(k0)), s = std::sin(th * double(k0));
            const double cr = std::cos(th), sr = std::sin(th);
            const double aj = a[j], bj = b[j];
            for (std::size_t m = 0; m < n; ++m) {
                V[k0 + m] += aj * s * s;
                W[k0 + m] += bj * s * c;
                const double cn = c * cr - s * sr;
                s = s * cr + c * sr;
                c = cn;
            }
        }
    }
}

namespace {

// per-node lane offsets cos/sin(th m) for m < lanes and the lane-group step cos/sin(th lanes)
struct LaneTables {
    std::vector<double> offc, offs, stepc, steps;
    LaneTables(const double* w, std::size_t nodes, double h, std::size_t lanes)
        : offc(nodes * lanes), offs(nodes * lanes), stepc(nodes), steps(nodes) {
        for (std::size_t j = 0; j < nodes; ++j) {
            const double th = 0.5 * w[j] * h;
            for (std::size_t m = 0; m < lanes; ++m) {
                offc[j * lanes + m] = std::cos(th * double(m));
                offs[j * lanes + m] = std::sin(th * double(m));
            }
            stepc[j] = std::cos(th * double(lanes));
            steps[j] = std::sin(th * double(lanes));
        }
    }
};

// remainder samples of a block that do not fill a full lane group
void scalar_tail(const double* w, const double* a, const double* b, std::size_t nodes, double h,
                 std::size_t from, std::size_t to, double* V, double* W) {
    for (std::size_t j = 0; j < nodes; ++j) {
        const double th = 0.5 * w[j] * h;
        for (std::size_t k = from; k < to; ++k) {
            const double s = std::sin(th * double(k)), c = std::cos(th * double(k));
            V[k] += a[j] * s * s;
            W[k] += b[j] * s * c;
        }
    }
}

}  // namespace

#if defined(__x86_64__) || defined(__i386__)
__attribute__((target("avx2,fma"))) void half_angle_sums_avx2(const double* w, const double* a,
                                                              const double* b, std::size_t nodes,
                                                              double h, std::size_t K, double* V,
                                                              double* W) {
    std::fill(V, V + K, 0.0);
    std::fill(W, W + K, 0.0);
    constexpr std::size_t L = 4;
    LaneTables tab(w, nodes, h, L);
    for (std::size_t k0 = 0; k0 < K; k0 += block) {
        const std::size_t n = std::min(block, K - k0);
        const std::size_t groups = n / L;
        std::size_t j = 0;
        // two nodes at a time keeps two independent rotation chains in flight
        for (; j + 1 < nodes; j += 2) {
            const double th0 = 0.5 * w[j] * h, th1 = 0.5 * w[j + 1] * h;
            const double c00 = std::cos(th0 * double(k0)), s00 = std::sin(th0 * double(k0));
            const double c10 = std::cos(th1 * double(k0)), s10 = std::sin(th1 * double(k0));
            const __m256d oc0 = _mm256_loadu_pd(&tab.offc[j * L]), os0 = _mm256_loadu_pd(&tab.offs[j * L]);
            const __m256d oc1 = _mm256_loadu_pd(&tab.offc[(j + 1) * L]),
                          os1 = _mm256_loadu_pd(&tab.offs[(j + 1) * L]);
            __m256d c0 = _mm256_fmsub_pd(_mm256_set1_pd(c00), oc0, _mm256_mul_pd(_mm256_set1_pd(s00), os0));
            __m256d s0 = _mm256_fmadd_pd(_mm256_set1_pd(s00), oc0, _mm256_mul_pd(_mm256_set1_pd(c00), os0));
            __m256d c1 = _mm256_fmsub_pd(_mm256_set1_pd(c10), oc1, _mm256_mul_pd(_mm256_set1_pd(s10), os1));
            __m256d s1 = _mm256_fmadd_pd(_mm256_set1_pd(s10), oc1, _mm256_mul_pd(_mm256_set1_pd(c10), os1));
            const __m256d rc0 = _mm256_set1_pd(tab.stepc[j]), rs0 = _mm256_set1_pd(tab.steps[j]);
            const __m256d rc1 = _mm256_set1_pd(tab.stepc[j + 1]), rs1 = _mm256_set1_pd(tab.steps[j + 1]);
            const __m256d a0 = _mm256_set1_pd(a[j]), b0 = _mm256_set1_pd(b[j]);
            const __m256d a1 = _mm256_set1_pd(a[j + 1]), b1 = _mm256_set1_pd(b[j + 1]);
            double* Vb = V + k0;
            double* Wb = W + k0;
            for (std::size_t g = 0; g < groups; ++g) {
                __m256d v = _mm256_loadu_pd(Vb + g * L);
                __m256d u = _mm256_loadu_pd(Wb + g * L);
                v = _mm256_fmadd_pd(_mm256_mul_pd(a0, s0), s0, v);
                u = _mm256_fmadd_pd(_mm256_mul_pd(b0, s0), c0, u);
                v = _mm256_fmadd_pd(_mm256_mul_pd(a1, s1), s1, v);
                u = _mm256_fmadd_pd(_mm256_mul_pd(b1, s1), c1, u);
                _mm256_storeu_pd(Vb + g * L, v);
                _mm256_storeu_pd(Wb + g * L, u);
                const __m256d cn0 = _mm256_fmsub_pd(c0, rc0, _mm256_mul_pd(s0, rs0));
                s0 = _mm256_fmadd_pd(s0, rc0, _mm256_mul_pd(c0, rs0));
                c0 = cn0;
                const __m256d cn1 = _mm256_fmsub_pd(c1, rc1, _mm256_mul_pd(s1, rs1));
                s1 = _mm256_fmadd_pd(s1, rc1, _mm256_mul_pd(c1, rs1));
                c1 = cn1;
            }
        }
        for (; j < nodes; ++j) {
            const double th = 0.5 * w[j] * h;
            const double cj = std::cos(th * double(k0)), sj = std::sin(th * double(k0));
            const __m256d oc = _mm256_loadu_pd(&tab.offc[j * L]), os = _mm256_loadu_pd(&tab.offs[j * L]);
            __m256d c = _mm256_fmsub_pd(_mm256_set1_pd(cj), oc, _mm256_mul_pd(_mm256_set1_pd(sj), os));
            __m256d s = _mm256_fmadd_pd(_mm256_set1_pd(sj), oc, _mm256_mul_pd(_mm256_set1_pd(cj), os));
            const __m256d rc = _mm256_set1_pd(tab.stepc[j]), rs = _mm256_set1_pd(tab.steps[j]);
            const __m256d av = _mm256_set1_pd(a[j]), bv = _mm256_set1_pd(b[j]);
            for (std::size_t g = 0; g < groups; ++g) {
                double* vp = V + k0 + g * L;
                double* wp = W + k0 + g * L;
                _mm256_storeu_pd(vp, _mm256_fmadd_pd(_mm256_mul_pd(av, s), s, _mm256_loadu_pd(vp)));
                _mm256_storeu_pd(wp, _mm256_fmadd_pd(_mm256_mul_pd(bv, s), c, _mm256_loadu_pd(wp)));
                const __m256d cn = _mm256_fmsub_pd(c, rc, _mm256_mul_pd(s, rs));
                s = _mm256_fmadd_pd(s, rc, _mm256_mul_pd(c, rs));
                c = cn;
            }
        }
        if (groups * L < n) scalar_tail(w, a, b, nodes, h, k0 + groups * L, k0 + n, V, W);
    }
}
#endif

#if defined(__aarch64__)
void half_angle_sums_neon(const double* w, const double* a, const double* b, std::size_t nodes, double h,
                          std::size_t K, double* V, double* W) {
    std::fill(V, V + K, 0.0);
    std::fill(W, W + K, 0.0);
    constexpr std::size_t L = 2;
    LaneTables tab(w, nodes, h, L);
    for (std::size_t k0 = 0; k0 < K; k0 += block) {
        const std::size_t n = std::min(block, K - k0);
        const std::size_t groups = n / L;
        for (std::size_t j = 0; j < nodes; ++j) {
            const double th = 0.5 * w[j] * h;
            const double cj = std::cos(th * double(k0)), sj = std::sin(th * double(k0));
            const float64x2_t oc = vld1q_f64(&tab.offc[j * L]), os = vld1q_f64(&tab.offs[j * L]);
            float64x2_t c = vfmsq_f64(vmulq_n_f64(oc, cj), os, vdupq_n_f64(sj));
            float64x2_t s = vfmaq_f64(vmulq_n_f64(oc, sj), os, vdupq_n_f64(cj));
            const float64x2_t rc = vdupq_n_f64(tab.stepc[j]), rs = vdupq_n_f64(tab.steps[j]);
            const float64x2_t av = vdupq_n_f64(a[j]), bv = vdupq_n_f64(b[j]);
            for (std::size_t g = 0; g < groups; ++g) {
                double* vp = V + k0 + g * L;
                double* wp = W + k0 + g * L;
                vst1q_f64(vp, vfmaq_f64(vld1q_f64(vp), vmulq_f64(av, s), s));
                vst1q_f64(wp, vfmaq_f64(vld1q_f64(wp), vmulq_f64(bv, s), c));
                const float64x2_t cn = vfmsq_f64(vmulq_f64(c, rc), s, rs);
                s = vfmaq_f64(vmulq_f64(s, rc), c, rs);
                c = cn;
            }
        }
        if (groups * L < n) scalar_tail(w, a, b, nodes, h, k0 + groups * L, k0 + n, V, W);
    }
}
#endif

namespace {

struct Dispatch {
    HalfAngleKernel fn = &half_angle_sums_scalar;
    const char* name = "scalar";
    Dispatch() {
#if defined(__x86_64__) || defined(__i386__)
        __builtin_cpu_init();
        if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
            fn = &half_angle_sums_avx2;
            name = "avx2";
        }
#elif defined(__aarch64__)
        fn = &half_angle_sums_neon;
        name = "neon";
#endif
    }
};

const Dispatch& dispatch() {
    static const Dispatch d;
    return d;
}

}  // namespace

void half_angle_sums(const double* w, const double* a, const double* b, std::size_t nodes, double h,
                     std::size_t K, double* V, double* W) {
    dispatch().fn(w, a, b, nodes, h, K, V, W);
}

const char* active_isa() { return dispatch().name; }

}  // namespace vpme::simd
