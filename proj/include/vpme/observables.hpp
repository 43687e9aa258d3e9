#ifndef VPME_OBSERVABLES_HPP
#define VPME_OBSERVABLES_HPP

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "vpme/correlations.hpp"
#include "vpme/rates.hpp"

namespace vpme {

struct SpectrumPeak {
    int level = plus;
    double center = 0;         // Lamb shifted Delta_{pG} minus the origin
    double half_width = 0;     // Re R_{pG}
    double center_found = 0;   // maximum of the summed lineshape, minus the origin
    double fwhm_found = 0;     // measured on the summed lineshape
    double height = 0;
    bool delta_line = false;   // Re R = 0
};

struct SpectrumResult {
    Theory theory = Theory::vpme;
    double a0 = 1;
    double origin = 0;                          // omega_c
    std::vector<double> offset, omega, intensity;  // omega = origin + offset
    std::array<SpectrumPeak, 2> peaks;
    double area_grid = 0;  // trapezoid over the sampled grid
    double area_tail = 0;  // analytic Lorentzian weight outside the grid
    double area() const { return area_grid + area_tail; }
    double area_ratio() const;  // area / (pi A0)
};

// Default: the range spans 40 half-widths beyond the outer peaks; each peak contributes
// points equidistant in arctan((w - center)/half_width), which is uniform in Lorentzian weight.
struct SpectrumGrid {
    double span_half_widths = 40;
    std::size_t points_per_peak = 4001;
    double lo = 0, hi = 0;   // explicit absolute range when hi > lo
    std::size_t points = 0;  // uniform grid on [lo, hi]
};

// A(origin + x)
double lineshape_offset(const CoherenceMatrix& coh, double x, double a0 = 1.0);
double lineshape(const CoherenceMatrix& coh, double omega, double a0 = 1.0);

SpectrumResult absorption_spectrum(const CoherenceMatrix& coh, Theory theory = Theory::vpme,
                                   const SpectrumGrid& grid = {}, double a0 = 1.0);

// populations of {+, -, dark aggregate, G}
using Populations = std::array<double, n_levels>;

struct InitialState {
    Populations pop{1.0, 0.0, 0.0, 0.0};
    std::array<cplx, 3> coherence{};  // rho_{+G}, rho_{-G}, rho_{+-}
};

struct PopulationTrajectory {
    std::vector<double> t;
    std::vector<Populations> pop;
    std::vector<std::array<double, 3>> coherence;  // |rho_{+G}|, |rho_{-G}|, |rho_{+-}|
    double max_trace_error = 0;
    double min_population = 0;
};

struct DynamicsOptions {
    // multiply gamma_1(0)-carrying coherences by D_{a,N}(t) from this displacement grid
    const PropagatorGrid* decoherence_grid = nullptr;
};

// dark-aggregated Pauli rate matrix, columns are source states
Eigen::Matrix4d rate_matrix(const RateSet& rates);

PopulationTrajectory secular_dynamics(const RateSet& rates, const CoherenceMatrix& coh, const InitialState& init,
                                      const std::vector<double>& t_grid, const DynamicsOptions& opt = {});

// null vector of the excited block normalised to unit excited population
Populations stationary_state(const RateSet& rates);
// Boltzmann weights over {w+, w-, w_d x (N-1)} normalised to one, ground 0
Populations boltzmann_excited(const RateSet& rates);

// per-dark-state dynamics for small N; levels {+, -, d_1..d_{N-1}, G}
std::vector<std::vector<double>> per_state_dynamics(const RateSet& rates, const std::vector<double>& p0,
                                                    const std::vector<double>& t_grid);

}  // namespace vpme

#endif
