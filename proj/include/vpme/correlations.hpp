#ifndef VPME_CORRELATIONS_HPP
#define VPME_CORRELATIONS_HPP

#include <map>
#include <mutex>
#include <vector>

#include "vpme/quadrature.hpp"
#include "vpme/spectral_density.hpp"

namespace vpme {

// Variational displacement profile G(w) parameterised by gbar; gbar = 0 is the full polaron
// limit G = 1 and gbar = inf leaves the bath untransformed (G = 0).
struct GProfile {
    double gbar = 0;
    double beta = 1;
    double G(double omega) const;
    double one_minus(double omega) const;
    static GProfile full_polaron(double beta);
    static GProfile untransformed(double beta);
};

enum class ZeroTag { zero, finite, divergent };
struct ZeroLimit {
    ZeroTag tag = ZeroTag::zero;
    double value = 0;  // rate at nu = 0 when finite
};
const char* to_string(ZeroTag t);

// (2 pi / beta) lim F(w)/w, classified by inspecting F(w)/w deep in the infrared
ZeroLimit rate_at_zero(const RealFn& F, double beta, double scale);

struct FrequencyNodes {
    std::vector<double> omega, weight;
};
// composite Gauss-Legendre nodes on [0, upper] resolving exp(i w tau) up to tau_max
FrequencyNodes frequency_nodes(const SpectralDensity& sd, const GProfile& gp, double tau_max,
                               std::vector<double> extra_breaks = {});

struct PropagatorGrid {
    double dtau = 0;
    std::vector<double> tau;
    std::vector<cplx> phi;          // polaron-type propagator
    std::vector<cplx> phi_d;        // displacement-type propagator
    std::vector<double> phi_d_re_diff;  // Re[phi_D(tau) - phi_D(0)], finite even when phi_D(0) is not
    cplx phi_infinity{0, 0};
    cplx phi_d_infinity{0, 0};
    double phi0 = 0;
    double phi_d0 = 0;
    bool phi_d_divergent = false;
    // frequency nodes and weight_j J_P(w_j), kept for transforms on shifted time contours
    FrequencyNodes nodes;
    std::vector<double> phi_weight;
    double beta = 0;
    bool has_phi() const { return !phi.empty(); }
    bool has_phi_d() const { return !phi_d.empty(); }
};

// 80 cutoff periods or 80 thermal times, whichever is longer
double default_tau_max(const SpectralDensity& sd, double beta);

PropagatorGrid phi_propagator(const SpectralDensity& sd, const GProfile& gp, const QuadratureConfig& cfg = {});
PropagatorGrid phi_displacement(const SpectralDensity& sd, const GProfile& gp, const QuadratureConfig& cfg = {});
PropagatorGrid propagators(const SpectralDensity& sd, const GProfile& gp, const QuadratureConfig& cfg = {});

// Gamma_1(nu) = gamma_1/2 + i S_1 for an effective density F. At nu = 0 the real part follows
// the zero-frequency limit; a divergent limit yields +inf and tag divergent.
HalfFourier gamma1_s1(const RealFn& F, double beta, double nu, const QuadratureConfig& cfg = {},
                      std::vector<double> breakpoints = {}, ZeroLimit* zero = nullptr);
HalfFourier gamma1_s1(const SpectralDensity& sd, double beta, double nu, const QuadratureConfig& cfg = {},
                      ZeroLimit* zero = nullptr);
// single-phonon shift with the variational weight (1 + (nu/w - 1) G)^2
double s1v(const SpectralDensity& sd, const GProfile& gp, double nu, const QuadratureConfig& cfg = {});
// M(+/-)[F](nu); M(+)[J] = Gamma_1
cplx m_functional(const RealFn& F, double beta, double nu, int sign, const QuadratureConfig& cfg = {},
                  std::vector<double> breakpoints = {});

// Re Phi_m(nu) as half the full-line transform taken along tau = t + i sigma, with sigma at the
// saddle of e^{-nu sigma} phi(i sigma)^m; free of cancellation deep in the spectral tails
double re_phi_power_shifted(const PropagatorGrid& grid, int m, double nu, std::size_t samples = 1u << 14);

// Phi_m(nu) = int_0^inf e^{i nu tau} phi^m, result[i][j] for m_list[i], nu_grid[j]. The real part
// comes from the shifted contour, the imaginary part and any delta weight from the real axis.
std::vector<std::vector<HalfFourier>> phi_power_fourier(const PropagatorGrid& grid, const std::vector<int>& m_list,
                                                        const std::vector<double>& nu_grid,
                                                        double tail_tolerance = 5e-2);
// the three two-phonon channels at nu > 0: emission of both phonons, absorption of w then emission
// of nu + w, and emission of nu + w then absorption of w (equal to the second by symmetry)
struct TwoPhononTerms {
    double emit_emit = 0, absorb_emit = 0, emit_absorb = 0;
    double total() const { return emit_emit + absorb_emit + emit_absorb; }
};
TwoPhononTerms two_phonon_terms(const SpectralDensity& sd, const GProfile& gp, double nu,
                                const QuadratureConfig& cfg = {});
// Re Phi_2(nu) / pi from the three convolution integrals over J_P
double two_phonon_direct(const SpectralDensity& sd, const GProfile& gp, double nu, const QuadratureConfig& cfg = {});

enum class TransitionClass { polariton_dark, polariton_polariton };

struct MultiPhonon {
    cplx even{0, 0};  // prefactor times sum over even m >= 2
    cplx odd{0, 0};   // prefactor times sum over odd m >= 3
    double tail_ratio = 0;  // |M-th term| / |partial sum of the full series|
    bool converged = true;
    int max_m = 0;
};
// Omega_r^2 sum Phi_m / m! split by parity
MultiPhonon gamma_multi_parity(const PropagatorGrid& grid, double omega_r, double nu, int max_m = 6,
                               double truncation_tol = 0.01);
// nu^2 sum over the m-set of the transition class
HalfFourier gamma_multi(const PropagatorGrid& grid, double nu, TransitionClass cls, int max_m = 6,
                        bool* converged = nullptr);

// Gamma^phi(0) = g^2 B^2 int_0^inf (cosh phi - 1)
HalfFourier gamma_phi_multi(const PropagatorGrid& grid, double g, double frak_b);
// leading even-order rate 2 pi g^2 B^2 int J_P^2 n (1 + n)
double gamma_phi_leading(const SpectralDensity& sd, const GProfile& gp, double g, double frak_b,
                         const QuadratureConfig& cfg = {});

// gamma_1(0, tau) = 2 int J (1-G)^2 coth(beta w/2) sin(w tau)/w
double gamma1_nonmarkov(const SpectralDensity& sd, const GProfile& gp, double tau);
// int_0^t gamma_1(0, tau) dtau by quadrature in tau
double gamma1_nonmarkov_integral(const SpectralDensity& sd, const GProfile& gp, double t);
// exp(-(1/(a N)) int_0^t gamma_1(0, tau)) evaluated from the displacement propagator grid
double decoherence_factor(double a, double N, double t, const PropagatorGrid& grid);
// Re[phi_D(t) - phi_D(0)] interpolated on the grid (plateau value beyond it)
double phi_d_re_diff_at(const PropagatorGrid& grid, double t);

// Bath correlations of one solved point with caching of the multi-phonon transforms.
class Correlations {
public:
    Correlations(SpectralDensity sd, GProfile gp, double g, double frak_b, double omega_r,
                 QuadratureConfig cfg = {}, int max_phonons = 6);

    const SpectralDensity& density() const { return sd_; }
    const GProfile& profile() const { return gp_; }
    double beta() const { return gp_.beta; }
    double omega_r() const { return omega_r_; }
    const PropagatorGrid& grid() const { return grid_; }
    int max_phonons() const { return max_m_; }

    // single-phonon Gamma_1 of J (on-shell variational rate)
    HalfFourier gamma1(double nu) const;
    // gamma_1(0) of J_D with its tag
    ZeroLimit gamma1_zero() const;
    double s1v(double nu) const;
    double s1(double nu) const;
    MultiPhonon multi(double nu) const;
    HalfFourier gamma_phi() const;

private:
    SpectralDensity sd_;
    GProfile gp_;
    double g_, frak_b_, omega_r_;
    QuadratureConfig cfg_;
    int max_m_;
    PropagatorGrid grid_;
    mutable std::mutex mu_;
    mutable std::map<double, MultiPhonon> multi_cache_;
    mutable std::map<double, HalfFourier> gamma1_cache_;
    mutable std::map<double, double> s1v_cache_;
};

}  // namespace vpme

#endif
