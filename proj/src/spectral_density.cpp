#include "vpme/spectral_density.hpp"

#include <gsl/gsl_interp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vpme/params.hpp"

namespace vpme {

class TabulatedDensity {
public:
    TabulatedDensity(std::vector<double> w, std::vector<double> j) : w_(std::move(w)), j_(std::move(j)) {
        if (w_.size() < 3 || w_.size() != j_.size())
            throw ParamError("tabulated density needs at least 3 (omega, J) rows");
        for (std::size_t i = 1; i < w_.size(); ++i)
            if (!(w_[i] > w_[i - 1])) throw ParamError("tabulated omega must be strictly increasing");
        for (double x : j_)
            if (x < 0) throw ParamError("tabulated J must be non-negative");
        interp_ = gsl_interp_alloc(gsl_interp_steffen, w_.size());
        gsl_interp_init(interp_, w_.data(), j_.data(), w_.size());
    }
    ~TabulatedDensity() { gsl_interp_free(interp_); }
    TabulatedDensity(const TabulatedDensity&) = delete;
    TabulatedDensity& operator=(const TabulatedDensity&) = delete;

    double operator()(double w) const {
        if (w < w_.front() || w > w_.back()) return 0.0;
        // gsl_interp_eval is reentrant when no accelerator is passed
        double v = gsl_interp_eval(interp_, w_.data(), j_.data(), w, nullptr);
        return v > 0 ? v : 0.0;
    }
    double lo() const { return w_.front(); }
    double hi() const { return w_.back(); }

private:
    std::vector<double> w_, j_;
    gsl_interp* interp_;
};

SpectralDensity::SpectralDensity(double A, double p, double omega_0) : A_(A), p_(p), omega_0_(omega_0) {
    if (!(A >= 0) || !(p > 0) || !(omega_0 > 0)) throw ParamError("invalid spectral density parameters");
}

SpectralDensity SpectralDensity::from_table(std::vector<double> omega, std::vector<double> J) {
    SpectralDensity sd(1.0, 1.0, omega.empty() ? 1.0 : omega.back());
    sd.table_ = std::make_shared<TabulatedDensity>(std::move(omega), std::move(J));
    return sd;
}

SpectralDensity SpectralDensity::from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParamError("cannot open density table: " + path);
    std::vector<double> w, j;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double a, b;
        if (!(ss >> a >> b)) continue;  // header row
        w.push_back(a);
        j.push_back(b);
    }
    return from_table(std::move(w), std::move(j));
}

double SpectralDensity::operator()(double w) const {
    if (!(w > 0)) return 0.0;
    if (table_) return (*table_)(w);
    double x = w / omega_0_;
    return A_ * omega_0_ * std::pow(x, p_) * std::exp(-x * x);
}

double SpectralDensity::over_omega(double w) const {
    if (!(w > 0)) return 0.0;
    if (table_) return (*table_)(w) / w;
    double x = w / omega_0_;
    return A_ * std::pow(x, p_ - 1.0) * std::exp(-x * x);
}

double SpectralDensity::upper() const {
    if (table_) return table_->hi();
    // exp(-x^2) x^p below 1e-40 relative to the peak
    return omega_0_ * std::sqrt(92.0 + 0.5 * p_ * std::log(1.0 + p_) + p_ * std::log(10.0 + p_));
}

std::vector<double> SpectralDensity::scales() const {
    if (table_) return {table_->lo(), 0.5 * (table_->lo() + table_->hi()), table_->hi()};
    return {0.25 * omega_0_, omega_0_, 2.0 * omega_0_, 4.0 * omega_0_, upper()};
}

double j_eval(const SpectralDensity& sd, double omega) { return sd(omega); }

DerivedDensities derived_densities(const SpectralDensity& sd, GFunction gfun) {
    DerivedDensities d;
    d.J_D = [sd, gfun](double w) {
        double one_minus = 1.0 - gfun(w);
        return sd(w) * one_minus * one_minus;
    };
    d.J_P = [sd, gfun](double w) {
        if (!(w > 0)) return 0.0;
        double g = gfun(w);
        return sd.over_omega(w) * g * g / w;
    };
    d.J_V = [sd, gfun](double w) {
        if (!(w > 0)) return 0.0;
        double g = gfun(w);
        return sd(w) * std::abs(1.0 - g) * g / w;
    };
    return d;
}

bool infrared_divergent(const RealFn& integrand, double scale, std::vector<double> breakpoints,
                        const QuadratureConfig& cfg) {
    double lo6 = 1e-6 * scale, lo7 = 1e-7 * scale;
    std::vector<double> bp;
    for (double b : breakpoints)
        if (b > lo6) bp.push_back(b);
    bp.push_back(lo6);
    std::sort(bp.begin(), bp.end());
    double upper_part = 0;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) upper_part += integrate(integrand, bp[i], bp[i + 1], cfg);
    // the tail beyond the last breakpoint is common to both and cannot change the comparison
    double extra = integrate(integrand, lo7, lo6, cfg);
    double base = std::abs(upper_part);
    if (base == 0) return extra != 0;
    return std::abs(extra) > 0.01 * base;
}

double moment_bj(const SpectralDensity& sd, const GFunction& gfun, int j, double beta,
                 const QuadratureConfig& cfg, std::vector<double> extra_breaks) {
    RealFn f = [&](double w) {
        if (!(w > 0)) return 0.0;
        double g = gfun ? gfun(w) : 1.0;
        return sd(w) / std::pow(w, j) * g * g * coth_half(beta * w);
    };
    auto bp = sd.scales();
    bp.insert(bp.end(), extra_breaks.begin(), extra_breaks.end());
    if (infrared_divergent(f, sd.omega_0(), bp, cfg))
        throw DivergenceError("moment B_" + std::to_string(j) + " diverges at small frequency");
    return integrate_semiinfinite(f, cfg, bp);
}

double reorganization_energy(const SpectralDensity& sd) {
    if (sd.tabulated()) return reorganization_energy_numeric(sd);
    return 0.5 * sd.A() * sd.omega_0() * std::tgamma(0.5 * sd.p());
}

double reorganization_energy_numeric(const SpectralDensity& sd, const QuadratureConfig& cfg) {
    RealFn f = [&](double w) { return sd.over_omega(w); };
    return integrate_semiinfinite(f, cfg, sd.scales());
}

}  // namespace vpme
