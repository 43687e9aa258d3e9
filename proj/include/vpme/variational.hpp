#ifndef VPME_VARIATIONAL_HPP
#define VPME_VARIATIONAL_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "vpme/params.hpp"
#include "vpme/quadrature.hpp"
#include "vpme/spectral_density.hpp"

namespace vpme {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverConfig {
    QuadratureConfig quad;
    RegimeConfig regime;
    double damping = 0.5;
    std::size_t max_iterations = 400;
    double tolerance = 1e-10;       // relative fixed-point residual
    std::size_t scan_points = 64;
    double scan_lo = 1e-30;          // eV
    double scan_hi_factor = 1e3;     // times the bare collective coupling
};

struct VariationalSolution {
    double gbar = 0;
    double frak_b = 1;
    double log_frak_b = 0;
    double delta = 0;
    double lambda_v = 0;
    double omega_r = 0;
    double theta = 0;
    double f_fbp = 0;
    double residual = 0;
    std::size_t iterations = 0;
    bool converged = false;
    Regime regime{RegimeTag::HighT_WeakLM, true};
    std::vector<double> candidate_roots;  // all refined fixed points, for diagnostics
};

// G(w) = w / (w + gbar coth(beta w / 2)); gbar = 0 gives 1, gbar = inf gives 0
double g_of_omega(double gbar, double beta, double omega);
// 1 - G without cancellation
double one_minus_g(double gbar, double beta, double omega);
GFunction make_gfun(double gbar, double beta);
// frequencies where G changes character, used as quadrature breakpoints
std::vector<double> g_breakpoints(const SpectralDensity& sd, double gbar, double beta);

double log_frak_b(const SpectralDensity& sd, double gbar, double beta, const QuadratureConfig& cfg = {});
double frak_b(const SpectralDensity& sd, double gbar, double beta, const QuadratureConfig& cfg = {});
double lambda_v(const SpectralDensity& sd, double gbar, double beta, const QuadratureConfig& cfg = {});
// int J/w (1-G)^2, the measured-convention detuning
double delta_measured(const SpectralDensity& sd, double gbar, double beta, const QuadratureConfig& cfg = {});
double detuning(const SpectralDensity& sd, const PhysicalParams& params, double gbar,
                const QuadratureConfig& cfg = {});

double gbar_update(const SpectralDensity& sd, const PhysicalParams& params, double gbar_in,
                   const QuadratureConfig& cfg = {});
double free_energy_fbp(const SpectralDensity& sd, const PhysicalParams& params, double gbar,
                       const QuadratureConfig& cfg = {});
// F from precomputed scales, reported relative to the gbar-independent constants
double free_energy_from(double beta, double N, double delta, double theta);

// 2 g_r^2 beta / (2 + g_r^2 beta^2), g_r = g B
double gbar0_resonant(double g, double frak_b, double beta);
// Delta / (1 + (Delta^2/(g B)^2 - beta Delta) n_B(Delta)), resonant form at Delta = 0
double gbar0_full(double g, double frak_b, double beta, double delta);

// every derived quantity at a fixed gbar (used for forced G = 0 or G = 1 studies)
VariationalSolution solution_at(const SpectralDensity& sd, const PhysicalParams& params, double gbar,
                                const SolverConfig& cfg = {});

VariationalSolution solve_self_consistent(const SpectralDensity& sd, const PhysicalParams& params,
                                          const SolverConfig& cfg = {});

}  // namespace vpme

#endif
