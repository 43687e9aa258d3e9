#ifndef VPME_PARAMS_HPP
#define VPME_PARAMS_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace vpme {

// hbar = 1, energies in eV, times in 1/eV, temperatures in K
inline constexpr double k_boltzmann = 8.617333262e-5;
inline constexpr double pi = 3.14159265358979323846;

enum class ResonanceConvention { measured, bare, explicit_energies };

struct ParamError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PhysicalParams {
    double g = 1e-7;          // bare single-molecule coupling
    double N = 2;             // molecule count, stored as double (may exceed 2^53 only in principle)
    double omega_c = 2.0;     // cavity energy
    double omega_m = 2.0;     // bare molecular transition energy
    double T = 300.0;
    double A = 0.083;
    double p = 3.0;
    double omega_0 = 6e-3;
    ResonanceConvention resonance = ResonanceConvention::measured;

    double beta() const { return 1.0 / (k_boltzmann * T); }
    double omega_beta() const { return 10.0 / beta(); }
    double bare_collective() const;
    void validate() const;
};

// the typical molecular set: g = 0.1 ueV, w0 = 6 meV, A = 0.083, T = 300 K, p = 3
PhysicalParams typical_params(double N = 1e6);

// N that yields a target renormalised coupling for a given B
double n_for_omega_r(double omega_r, double g, double frak_b);

PhysicalParams build_params(const std::map<std::string, std::string>& raw);
std::map<std::string, std::string> read_config_file(const std::string& path);
ResonanceConvention parse_resonance(const std::string& s);
std::string to_string(ResonanceConvention c);

struct BosePair {
    double n;        // n_B
    double n_tilde;  // 1 + n_B
};

// throws on nu == 0; callers use limiting forms there
BosePair bose_occupation(double nu, double beta);
double coth_half(double beta_omega);  // coth(x/2)

struct DerivedScales {
    double beta;
    double Omega;
    double Omega_r;
    double Omega_beta;
    double theta;
};

enum class RegimeTag { HighT_WeakLM, HighT_StrongLM, LowT, Transitory };

struct RegimeConfig {
    double resonance_factor = 10.0;  // resonant iff 2 Omega_r > factor * |Delta|
    double band_lo = 0.3;            // Transitory band in Omega_r / Omega_beta
    double band_hi = 3.0;
};

struct Regime {
    RegimeTag tag;
    bool resonant;
};

std::string to_string(RegimeTag t);
Regime classify_regime(const PhysicalParams& params, double omega_r, double delta,
                       const RegimeConfig& cfg = {});

}  // namespace vpme

#endif
