#ifndef VPME_SIMD_HPP
#define VPME_SIMD_HPP

#include <cstddef>

namespace vpme::simd {

// Half-angle propagator sums over frequency nodes. For k < K and x_j = w_j k h / 2:
//   V[k] = sum_j a_j sin(x_j)^2
//   W[k] = sum_j b_j sin(x_j) cos(x_j)
// so that sum a cos(w t) = sum a - 2 V and sum b sin(w t) = 2 W without cancellation at
// small w t. Outputs are overwritten.
using HalfAngleKernel = void (*)(const double* w, const double* a, const double* b, std::size_t nodes,
                                 double h, std::size_t K, double* V, double* W);

void half_angle_sums_scalar(const double* w, const double* a, const double* b, std::size_t nodes,
                            double h, std::size_t K, double* V, double* W);
#if defined(__x86_64__) || defined(__i386__)
void half_angle_sums_avx2(const double* w, const double* a, const double* b, std::size_t nodes,
                          double h, std::size_t K, double* V, double* W);
#endif
#if defined(__aarch64__)
void half_angle_sums_neon(const double* w, const double* a, const double* b, std::size_t nodes,
                          double h, std::size_t K, double* V, double* W);
#endif

// best kernel for the running CPU, chosen once
void half_angle_sums(const double* w, const double* a, const double* b, std::size_t nodes, double h,
                     std::size_t K, double* V, double* W);
const char* active_isa();

// samples per re-seed block; recurrence drift is bounded by this length
inline constexpr std::size_t block = 256;

}  // namespace vpme::simd

#endif
