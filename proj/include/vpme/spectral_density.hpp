#ifndef VPME_SPECTRAL_DENSITY_HPP
#define VPME_SPECTRAL_DENSITY_HPP

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "vpme/quadrature.hpp"

namespace vpme {

struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class TabulatedDensity;

// J(w) = A w^p w0^(1-p) exp(-w^2/w0^2) for w > 0, or a tabulated density
class SpectralDensity {
public:
    SpectralDensity(double A, double p, double omega_0);
    static SpectralDensity from_table(std::vector<double> omega, std::vector<double> J);
    static SpectralDensity from_csv(const std::string& path);

    double operator()(double omega) const;
    // J(w)/w, finite as w -> 0 for the built-in family with p >= 1
    double over_omega(double omega) const;

    double A() const { return A_; }
    double p() const { return p_; }
    double omega_0() const { return omega_0_; }
    bool tabulated() const { return static_cast<bool>(table_); }
    // beyond this J is treated as zero
    double upper() const;
    // natural breakpoints for integrals over J
    std::vector<double> scales() const;

private:
    double A_, p_, omega_0_;
    std::shared_ptr<const TabulatedDensity> table_;
};

using GFunction = std::function<double(double)>;

struct DerivedDensities {
    RealFn J_D;  // J (1-G)^2
    RealFn J_P;  // J G^2 / w^2
    RealFn J_V;  // sqrt(J_D J_P)
};

DerivedDensities derived_densities(const SpectralDensity& sd, GFunction gfun);

double j_eval(const SpectralDensity& sd, double omega);

// int_{lo}^{inf} integrand with lower cutoffs 1e-6 and 1e-7 times the scale; true if they
// differ by more than 1%
bool infrared_divergent(const RealFn& integrand, double scale, std::vector<double> breakpoints,
                        const QuadratureConfig& cfg = {});

// B_j = int J G^2 / w^j coth(beta w / 2); an empty gfun means G = 1
double moment_bj(const SpectralDensity& sd, const GFunction& gfun, int j, double beta,
                 const QuadratureConfig& cfg = {}, std::vector<double> extra_breaks = {});

// int J / w; closed form (A w0 / 2) Gamma(p/2) for the built-in family
double reorganization_energy(const SpectralDensity& sd);
double reorganization_energy_numeric(const SpectralDensity& sd, const QuadratureConfig& cfg = {});

}  // namespace vpme

#endif
