#ifndef VPME_QUADRATURE_HPP
#define VPME_QUADRATURE_HPP

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vpme {

using cplx = std::complex<double>;
using RealFn = std::function<double(double)>;

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuadratureConfig {
    double rel_tol = 1e-9;
    double abs_tol = 1e-14;
    std::size_t max_subdivisions = 4000;
    std::size_t max_halvings = 200;   // dyadic descent towards zero
    double tau_max = 0.0;             // 0 selects the propagator default
    std::size_t samples = 1u << 16;   // power of two
    void validate() const;
};

// int_a^b f, adaptive Gauss-Kronrod with extrapolation
double integrate(const RealFn& f, double a, double b, const QuadratureConfig& cfg = {});

// int_0^inf f. Interior breakpoints split the domain; [0, smallest] is covered by
// dyadic descent, [largest, inf) by a mapped rule. Throws on non-convergence.
double integrate_semiinfinite(const RealFn& f, const QuadratureConfig& cfg = {},
                              std::vector<double> breakpoints = {});

// P int_0^inf f(w) / (pole - w) dw by singularity subtraction on a symmetric window
double principal_value(const RealFn& f, double pole, const QuadratureConfig& cfg = {},
                       std::vector<double> breakpoints = {});

// Gamma(nu) = int_0^inf e^{i nu tau} f(tau) dtau sampled on a uniform grid
struct HalfFourier {
    double nu = 0;
    cplx value{0, 0};
    double delta_spike = 0;  // weight w of a w * delta(nu) term reported separately
    double rate() const { return 2.0 * value.real(); }
    double shift() const { return value.imag(); }
};

struct FourierTailInfo {
    cplx f_inf{0, 0};
    double tail_variation = 0;  // max |f - f_inf| over the last tenth, relative to max |f|
};

// samples f_k = f(k * dtau), k = 0..K-1. The asymptotic constant is estimated from the
// last twentieth of the grid, subtracted, and its transform added analytically; the
// remainder is tapered to zero over the last tenth.
std::vector<HalfFourier> half_line_fourier(const std::vector<cplx>& f, double dtau,
                                           const std::vector<double>& nu_grid,
                                           FourierTailInfo* info = nullptr,
                                           double tail_tolerance = 5e-2);

// Gauss-Legendre nodes on [a, b] appended to (x, w)
void gauss_legendre_panel(double a, double b, std::size_t n, std::vector<double>& x,
                          std::vector<double>& w);

}  // namespace vpme

#endif
