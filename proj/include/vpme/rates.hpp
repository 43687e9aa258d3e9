#ifndef VPME_RATES_HPP
#define VPME_RATES_HPP

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "vpme/correlations.hpp"
#include "vpme/eigensystem.hpp"
#include "vpme/params.hpp"
#include "vpme/variational.hpp"

namespace vpme {

enum class Theory { wcme, vpme };
const char* to_string(Theory t);
Theory parse_theory(const std::string& s);

struct RateTerm {
    double single = 0;
    double multi = 0;
    double total() const { return single + multi; }
};

// Secular rates of the family {+, -, d, G}. Transitions and dephasing are per dark state;
// [dark][dark] entries refer to one pair of distinct dark states.
struct RateSet {
    Theory theory = Theory::vpme;
    bool nonresonant = false;
    double N = 2;
    double beta = 1;
    double delta = 0;
    double omega_r = 0;  // collective coupling used (bare Omega for WCME)
    double theta = 0;
    double epsilon = 0;
    std::array<double, n_levels> energy{};  // eigenenergies, ground = 0
    std::array<std::array<RateTerm, n_levels>, n_levels> k{};
    std::array<RateTerm, n_levels> loss{};
    std::array<std::array<RateTerm, n_levels>, n_levels> dephasing{};
    ZeroLimit gamma1_zero;
    bool markov_divergent = false;
    bool truncation_converged = true;
    double truncation_ratio = 0;
    std::vector<std::string> warnings;

    // K_{mu -> D} summed over the N-1 dark states
    RateTerm to_dark_total(int from) const;
};

struct LambShiftSet {
    Theory theory = Theory::vpme;
    std::array<double, n_levels> energy{};
    // energies relative to origin (omega_c), exact even when widths fall below the ulp of energy
    double origin = 0;
    std::array<double, n_levels> relative{};
    std::array<double, n_levels> transition{};    // from real transitions
    std::array<double, n_levels> virtual_self{};  // from virtual self transitions
    double total(int l) const { return transition[l] + virtual_self[l]; }
    double shifted(int l) const { return energy[l] + total(l); }
    // Lamb shifted transition frequency Delta_{mu nu}
    double delta_mn(int a, int b) const { return shifted(a) - shifted(b); }
    // shifted energy relative to origin
    double offset(int l) const { return relative[l] + total(l); }
};

struct RateReport {
    RateSet rates;
    LambShiftSet lamb;
};

// R_{mu nu} = (K_mu + K_nu)/2 + K^phi_{mu nu} + i Delta_{mu nu}
struct CoherenceMatrix {
    std::array<std::array<cplx, n_levels>, n_levels> R{};
    bool markov_divergent = false;  // divergent gamma_1(0) terms were dropped
    double origin = 0;
    std::array<double, n_levels> offset{};  // shifted energies relative to origin
};
// divergent single-phonon zero-frequency terms are dropped and flagged; their effect is
// carried by the non-Markovian decoherence factor instead
CoherenceMatrix coherence_rates(const RateSet& rates, const LambShiftSet& lamb);

// Bath functions consumed by the assembly. Rates are 2 Re Gamma, shifts Im Gamma.
struct Channels {
    std::function<double(double)> gamma1;      // single-phonon rate, nu != 0
    std::function<double(double)> s1;          // single-phonon shift, any nu
    std::function<MultiPhonon(double)> multi;  // Omega_r^2 sum Phi_m / m! by parity
    ZeroLimit gamma1_zero;                     // single-phonon rate at nu = 0
    HalfFourier phi;                           // Gamma^phi(0) with the g^2 B^2 prefactor
    double omega_r = 0;
};
Channels wcme_channels(const SpectralDensity& sd, double beta, const QuadratureConfig& cfg = {});
Channels vpme_channels(const Correlations& corr);

// weighted secular assembly. Energies of {+, -, d} are relative to omega_c so that transition
// frequencies keep full precision when the splitting is tiny against the cavity energy.
RateReport assemble_secular(const SecularWeights& w, const Channels& ch, Theory theory, double beta,
                            const std::array<double, 3>& relative_energies, double omega_c);

// weak-coupling rates at the bare resonance omega_c = omega_m, Omega = g sqrt(N)
RateReport wcme_rates(const PhysicalParams& params, const SpectralDensity& sd, const QuadratureConfig& cfg = {});

// resonant variational rates in the closed main-text form (Delta treated as 0)
RateReport vpme_rates(const PhysicalParams& params, const VariationalSolution& sol, const Correlations& corr);

// non-resonant rates at an explicit detuning; delta = 0 reproduces vpme_rates
RateReport nonres_rates(const PhysicalParams& params, const VariationalSolution& sol, const Correlations& corr,
                        double delta);

// short-hand non-resonant estimates: K_{+-->d}(Delta) = (1 +- e) K_{+-->d}(0) and
// gamma^phi(Delta) = (1 - e^2) gamma^phi(0), with their relative difference from the full forms
struct SimplifiedNonres {
    double epsilon = 0;
    double k_plus_dark = 0, k_minus_dark = 0, multi_dephasing_ratio = 0;
    double rel_diff_plus_dark = 0, rel_diff_minus_dark = 0;
};
SimplifiedNonres simplified_nonres(const RateReport& resonant, const RateReport& nonresonant);

// large-N asymptotes: Lambda_+- ~ +-(Omega_r/2) B_2 for Omega_r < Omega_beta, +-B_0/(2 Omega_r) above
double lamb_asymptote_low(double omega_r, double b2);
double lamb_asymptote_high(double omega_r, double b0);

// oracle: brute-force coefficients with the same bath functions (N <= 8)
RateReport bruteforce_secular(const PhysicalParams& params, const VariationalSolution& sol, const Correlations& corr,
                              int n_small, double delta = 0.0);

}  // namespace vpme

#endif
