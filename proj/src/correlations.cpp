#include "vpme/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vpme/params.hpp"
#include "vpme/simd.hpp"
#include "vpme/variational.hpp"

namespace vpme {

double GProfile::G(double omega) const { return g_of_omega(gbar, beta, omega); }
double GProfile::one_minus(double omega) const { return one_minus_g(gbar, beta, omega); }
GProfile GProfile::full_polaron(double beta) { return {0.0, beta}; }
GProfile GProfile::untransformed(double beta) { return {std::numeric_limits<double>::infinity(), beta}; }

const char* to_string(ZeroTag t) {
    switch (t) {
        case ZeroTag::zero: return "zero";
        case ZeroTag::finite: return "finite";
        case ZeroTag::divergent: return "divergent";
    }
    return "?";
}

ZeroLimit rate_at_zero(const RealFn& F, double beta, double scale) {
    // local power of F(w)/w between 1e-10 and 1e-12 of the scale
    const double x1 = 1e-10 * scale, x2 = 1e-12 * scale;
    const double r1 = F(x1) / x1, r2 = F(x2) / x2;
    ZeroLimit z;
    if (r1 == 0.0 && r2 == 0.0) return z;
    if (r2 == 0.0) return z;
    if (r1 == 0.0 || !std::isfinite(r2)) {
        z.tag = ZeroTag::divergent;
        z.value = std::numeric_limits<double>::infinity();
        return z;
    }
    const double slope = std::log(r1 / r2) / std::log(x1 / x2);
    if (slope > 1e-3) return z;
    if (slope < -1e-3) {
        z.tag = ZeroTag::divergent;
        z.value = std::numeric_limits<double>::infinity();
        return z;
    }
    z.tag = ZeroTag::finite;
    z.value = 2.0 * pi / beta * r2;
    return z;
}

FrequencyNodes frequency_nodes(const SpectralDensity& sd, const GProfile& gp, double tau_max,
                               std::vector<double> extra_breaks) {
    const double w0 = sd.omega_0(), hi = sd.upper();
    std::vector<double> bp{0.0};
    for (double x = 1e-12 * w0; x < 0.25 * w0; x *= 2.0) bp.push_back(x);
    for (double x : sd.scales()) bp.push_back(x);
    for (double x : g_breakpoints(sd, gp.gbar, gp.beta)) bp.push_back(x);
    for (double x : extra_breaks) bp.push_back(x);
    bp.push_back(hi);
    bp.erase(std::remove_if(bp.begin(), bp.end(), [&](double x) { return !(x >= 0) || x > hi; }), bp.end());
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

    const double maxw = std::min(0.25 * w0, 6.0 / tau_max);
    FrequencyNodes nodes;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        const double a = bp[i], b = bp[i + 1];
        const std::size_t n = std::max<std::size_t>(1, std::size_t(std::ceil((b - a) / maxw)));
        for (std::size_t k = 0; k < n; ++k)
            gauss_legendre_panel(a + (b - a) * double(k) / double(n), a + (b - a) * double(k + 1) / double(n), 16,
                                 nodes.omega, nodes.weight);
    }
    return nodes;
}

double default_tau_max(const SpectralDensity& sd, double beta) {
    return 80.0 * std::max(1.0 / sd.omega_0(), beta / (2.0 * pi));
}

namespace {

struct GridShape {
    double tau_max, dtau;
    std::size_t K;
};

GridShape grid_shape(const SpectralDensity& sd, double beta, const QuadratureConfig& cfg) {
    cfg.validate();
    GridShape s;
    s.tau_max = cfg.tau_max > 0 ? cfg.tau_max : default_tau_max(sd, beta);
    s.K = cfg.samples;
    s.dtau = s.tau_max / double(s.K - 1);
    return s;
}

// phi(tau) = sum_j weight_j (coth cos - i sin) from half-angle sums
void fill_propagator(const FrequencyNodes& nodes, const std::vector<double>& density, double beta,
                     const GridShape& s, std::vector<cplx>& out, std::vector<double>& re_diff, double& f0) {
    const std::size_t n = nodes.omega.size();
    std::vector<double> a(n), b(n);
    long double sum = 0;
    for (std::size_t j = 0; j < n; ++j) {
        b[j] = nodes.weight[j] * density[j];
        a[j] = b[j] * coth_half(beta * nodes.omega[j]);
        sum += a[j];
    }
    f0 = double(sum);
    std::vector<double> V(s.K), W(s.K);
    simd::half_angle_sums(nodes.omega.data(), a.data(), b.data(), n, s.dtau, s.K, V.data(), W.data());
    out.resize(s.K);
    re_diff.resize(s.K);
    for (std::size_t k = 0; k < s.K; ++k) {
        re_diff[k] = -2.0 * V[k];
        out[k] = cplx(f0 - 2.0 * V[k], -2.0 * W[k]);
    }
}

cplx tail_mean(const std::vector<cplx>& f) {
    const std::size_t K = f.size(), n = std::max<std::size_t>(1, K / 20);
    cplx s{0, 0};
    for (std::size_t k = K - n; k < K; ++k) s += f[k];
    return s / double(n);
}

void build(const SpectralDensity& sd, const GProfile& gp, const QuadratureConfig& cfg, bool want_phi,
           bool want_phi_d, PropagatorGrid& g) {
    const GridShape s = grid_shape(sd, gp.beta, cfg);
    g.dtau = s.dtau;
    g.tau.resize(s.K);
    for (std::size_t k = 0; k < s.K; ++k) g.tau[k] = double(k) * s.dtau;
    const FrequencyNodes nodes = frequency_nodes(sd, gp, s.tau_max);
    const std::size_t n = nodes.omega.size();
    const double beta = gp.beta;

    if (want_phi) {
        if (gp.gbar == 0.0) {
            RealFn f = [&](double w) { return sd.over_omega(w) / w * coth_half(beta * w); };
            if (infrared_divergent(f, sd.omega_0(), sd.scales(), cfg))
                throw DivergenceError("polaron propagator diverges for G = 1 at this Ohmicity");
        }
        std::vector<double> dens(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double w = nodes.omega[j], G = gp.G(w);
            dens[j] = sd.over_omega(w) / w * G * G;
        }
        std::vector<double> unused;
        fill_propagator(nodes, dens, beta, s, g.phi, unused, g.phi0);
        g.phi_infinity = tail_mean(g.phi);
        g.nodes = nodes;
        g.phi_weight.resize(n);
        for (std::size_t j = 0; j < n; ++j) g.phi_weight[j] = nodes.weight[j] * dens[j];
        g.beta = beta;
    }
    if (want_phi_d) {
        std::vector<double> dens(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double w = nodes.omega[j], h = gp.one_minus(w);
            dens[j] = sd.over_omega(w) / w * h * h;
        }
        fill_propagator(nodes, dens, beta, s, g.phi_d, g.phi_d_re_diff, g.phi_d0);
        RealFn f = [&](double w) {
            const double h = gp.one_minus(w);
            return sd.over_omega(w) / w * h * h * coth_half(beta * w);
        };
        g.phi_d_divergent = infrared_divergent(f, sd.omega_0(), sd.scales(), cfg);
        if (g.phi_d_divergent) g.phi_d0 = std::numeric_limits<double>::infinity();
        g.phi_d_infinity = tail_mean(g.phi_d);
    }
}

}  // namespace

PropagatorGrid phi_propagator(const SpectralDensity& sd, const GProfile& gp, const QuadratureConfig& cfg) {
    PropagatorGrid g;
    build(sd, gp, cfg, true, false, g);
    return g;
}

PropagatorGrid phi_displacement(const SpectralDensity& sd, const GProfile& gp, const QuadratureConfig& cfg) {
    PropagatorGrid g;
    build(sd, gp, cfg, false, true, g);
    return g;
}

PropagatorGrid propagators(const SpectralDensity& sd, const GProfile& gp, const QuadratureConfig& cfg) {
    PropagatorGrid g;
    build(sd, gp, cfg, true, true, g);
    return g;
}

namespace {

double nb(double beta, double w) { return 1.0 / std::expm1(beta * w); }

}  // namespace

HalfFourier gamma1_s1(const RealFn& F, double beta, double nu, const QuadratureConfig& cfg,
                      std::vector<double> breakpoints, ZeroLimit* zero) {
    HalfFourier h;
    h.nu = nu;
    double re = 0, im = 0;
    if (nu == 0.0) {
        double scale = breakpoints.empty() ? 1.0 : *std::max_element(breakpoints.begin(), breakpoints.end());
        ZeroLimit z = rate_at_zero(F, beta, scale);
        if (zero) *zero = z;
        re = 0.5 * z.value;
        RealFn f = [&](double w) { return w > 0 ? -F(w) / w : 0.0; };
        im = integrate_semiinfinite(f, cfg, breakpoints);
    } else {
        if (nu > 0)
            re = pi * F(nu) * (1.0 + nb(beta, nu));
        else
            re = pi * F(-nu) * nb(beta, -nu);
        RealFn fe = [&](double w) { return F(w) * (1.0 + nb(beta, w)); };
        RealFn fa = [&](double w) { return F(w) * nb(beta, w); };
        im = principal_value(fe, nu, cfg, breakpoints) - principal_value(fa, -nu, cfg, breakpoints);
    }
    h.value = cplx(re, im);
    return h;
}

HalfFourier gamma1_s1(const SpectralDensity& sd, double beta, double nu, const QuadratureConfig& cfg,
                      ZeroLimit* zero) {
    RealFn F = [&sd](double w) { return sd(w); };
    auto bp = sd.scales();
    bp.push_back(1.0 / beta);
    return gamma1_s1(F, beta, nu, cfg, bp, zero);
}

double s1v(const SpectralDensity& sd, const GProfile& gp, double nu, const QuadratureConfig& cfg) {
    const double beta = gp.beta;
    auto bp = g_breakpoints(sd, gp.gbar, beta);
    if (nu == 0.0) {
        RealFn f = [&](double w) {
            const double h = gp.one_minus(w);
            return -sd.over_omega(w) * h * h;
        };
        return integrate_semiinfinite(f, cfg, bp);
    }
    auto weight = [&](double v, double w) {
        const double x = gp.one_minus(w) + v * gp.G(w) / w;
        return x * x;
    };
    RealFn fe = [&](double w) { return w > 0 ? sd(w) * (1.0 + nb(beta, w)) * weight(nu, w) : 0.0; };
    RealFn fa = [&](double w) { return w > 0 ? sd(w) * nb(beta, w) * weight(-nu, w) : 0.0; };
    return principal_value(fe, nu, cfg, bp) - principal_value(fa, -nu, cfg, bp);
}

cplx m_functional(const RealFn& F, double beta, double nu, int sign, const QuadratureConfig& cfg,
                  std::vector<double> breakpoints) {
    const double sg = sign >= 0 ? 1.0 : -1.0;
    double re = 0, im = 0;
    if (nu == 0.0) {
        double scale = breakpoints.empty() ? 1.0 : *std::max_element(breakpoints.begin(), breakpoints.end());
        ZeroLimit z = rate_at_zero(F, beta, scale);
        re = sg * 0.5 * z.value;
        RealFn f = [&](double w) {
            if (!(w > 0)) return 0.0;
            return F(w) / w * (sg > 0 ? -1.0 : coth_half(beta * w));
        };
        im = integrate_semiinfinite(f, cfg, breakpoints);
    } else {
        if (nu > 0)
            re = sg * pi * F(nu) * (1.0 + nb(beta, nu));
        else
            re = pi * F(-nu) * nb(beta, -nu);
        RealFn fe = [&](double w) { return F(w) * (1.0 + nb(beta, w)); };
        RealFn fa = [&](double w) { return F(w) * nb(beta, w); };
        im = sg * principal_value(fe, nu, cfg, breakpoints) - principal_value(fa, -nu, cfg, breakpoints);
    }
    return {re, im};
}

namespace {

// phi(i sigma) = sum_j c_j (n e^{-w sigma} + (1+n) e^{w sigma}) and its sigma derivative
struct Tilt {
    const PropagatorGrid& g;
    double emit(std::size_t j, double sigma) const {
        const double w = g.nodes.omega[j];
        return g.phi_weight[j] * (1.0 + nb(g.beta, w)) * std::exp(w * sigma);
    }
    double absorb(std::size_t j, double sigma) const {
        const double w = g.nodes.omega[j];
        return g.phi_weight[j] * nb(g.beta, w) * std::exp(-w * sigma);
    }
    // d ln phi(i sigma) / d sigma
    double log_slope(double sigma) const {
        long double m = 0, d = 0;
        for (std::size_t j = 0; j < g.phi_weight.size(); ++j) {
            const double e = emit(j, sigma), a = absorb(j, sigma);
            m += e + a;
            d += g.nodes.omega[j] * (e - a);
        }
        return double(d / m);
    }
};

}  // namespace

double re_phi_power_shifted(const PropagatorGrid& grid, int m, double nu, std::size_t samples) {
    if (!grid.has_phi() || grid.phi_weight.empty())
        throw QuadratureError("re_phi_power_shifted: grid has no polaron propagator");
    if (m < 1) throw QuadratureError("re_phi_power_shifted: m must be positive");
    const Tilt tilt{grid};
    const double wmax = grid.nodes.omega.back();
    // phi(i sigma) is symmetric about -beta/2, where its log slope vanishes
    const double centre = -0.5 * grid.beta, cap = 600.0 / wmax;
    const double target = nu / double(m);
    double lo = centre, hi = centre;
    if (target > 0) {
        double step = std::max(grid.beta, 1.0 / wmax);
        while (tilt.log_slope(hi) < target) {
            lo = hi;
            hi += step;
            step *= 2.0;
            if (hi > cap) return 0.0;  // beyond m times the bath band edge
        }
    } else if (target < 0) {
        double step = std::max(grid.beta, 1.0 / wmax);
        while (tilt.log_slope(lo) > target) {
            hi = lo;
            lo -= step;
            step *= 2.0;
            if (lo < -grid.beta - cap) return 0.0;
        }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * (std::abs(lo) + std::abs(hi) + 1.0); ++it) {
        const double mid = 0.5 * (lo + hi);
        (tilt.log_slope(mid) < target ? lo : hi) = mid;
    }
    const double sigma = 0.5 * (lo + hi);

    const std::size_t n = grid.phi_weight.size();
    std::vector<double> a(n), b(n);
    long double total = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double e = tilt.emit(j, sigma), ab = tilt.absorb(j, sigma);
        a[j] = e + ab;
        b[j] = e - ab;
        total += a[j];
    }
    const double M = double(total);
    for (std::size_t j = 0; j < n; ++j) {
        a[j] /= M;
        b[j] /= M;
    }
    const double tau_max = grid.tau.back();
    const double dt = tau_max / double(samples - 1);
    std::vector<double> V(samples), W(samples);
    simd::half_angle_sums(grid.nodes.omega.data(), a.data(), b.data(), n, dt, samples, V.data(), W.data());
    std::vector<cplx> f(samples);
    for (std::size_t k = 0; k < samples; ++k) f[k] = std::pow(cplx(1.0 - 2.0 * V[k], -2.0 * W[k]), m);
    const auto r = half_line_fourier(f, dt, {nu});
    return std::exp(double(m) * std::log(M) - nu * sigma) * r[0].value.real();
}

std::vector<std::vector<HalfFourier>> phi_power_fourier(const PropagatorGrid& grid, const std::vector<int>& m_list,
                                                        const std::vector<double>& nu_grid, double tail_tolerance) {
    if (!grid.has_phi()) throw QuadratureError("phi_power_fourier: grid has no polaron propagator");
    std::vector<std::vector<HalfFourier>> out;
    std::vector<cplx> f(grid.phi.size());
    for (int m : m_list) {
        if (m < 1) throw QuadratureError("phi_power_fourier: m must be positive");
        for (std::size_t k = 0; k < f.size(); ++k) f[k] = std::pow(grid.phi[k], m);
        auto row = half_line_fourier(f, grid.dtau, nu_grid, nullptr, tail_tolerance);
        if (!grid.phi_weight.empty())
            for (auto& h : row) h.value.real(re_phi_power_shifted(grid, m, h.nu));
        out.push_back(std::move(row));
    }
    return out;
}

double two_phonon_direct(const SpectralDensity& sd, const GProfile& gp, double nu, const QuadratureConfig& cfg) {
    return two_phonon_terms(sd, gp, nu, cfg).total();
}

TwoPhononTerms two_phonon_terms(const SpectralDensity& sd, const GProfile& gp, double nu, const QuadratureConfig& cfg) {
    if (!(nu > 0)) throw QuadratureError("two_phonon_terms: nu must be positive");
    const double beta = gp.beta;
    auto jp = [&](double w) {
        if (!(w > 0)) return 0.0;
        const double G = gp.G(w);
        return sd.over_omega(w) / w * G * G;
    };
    // J_P n and J_P (1+n) stay finite as w -> 0 only in combination, so evaluate them jointly
    auto emit = [&](double w) { return jp(w) * (1.0 + nb(beta, w)); };
    auto absorb = [&](double w) { return jp(w) * nb(beta, w); };
    auto bp = g_breakpoints(sd, gp.gbar, beta);

    RealFn f1 = [&](double w) { return emit(w) * emit(nu - w); };
    std::vector<double> inner{0.0, 0.5 * nu, nu};
    for (double b : bp)
        if (b < nu) {
            inner.push_back(b);
            inner.push_back(nu - b);
        }
    std::sort(inner.begin(), inner.end());
    inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
    double i1 = 0;
    for (std::size_t i = 0; i + 1 < inner.size(); ++i) i1 += integrate(f1, inner[i], inner[i + 1], cfg);

    // the second integral is the third with w -> w - nu
    RealFn f3 = [&](double w) { return absorb(w) * emit(nu + w); };
    const double i3 = integrate_semiinfinite(f3, cfg, bp);
    return {i1, i3, i3};
}

namespace {

double factorial(int m) { return std::tgamma(double(m) + 1.0); }

}  // namespace

MultiPhonon gamma_multi_parity(const PropagatorGrid& grid, double omega_r, double nu, int max_m,
                               double truncation_tol) {
    MultiPhonon r;
    r.max_m = max_m;
    if (max_m < 2) return r;
    std::vector<int> ms;
    for (int m = 2; m <= max_m; ++m) ms.push_back(m);
    auto tr = phi_power_fourier(grid, ms, {nu});
    cplx last{0, 0};
    for (std::size_t i = 0; i < ms.size(); ++i) {
        const cplx term = tr[i][0].value / factorial(ms[i]);
        (ms[i] % 2 == 0 ? r.even : r.odd) += term;
        last = term;
    }
    // guard: the M-th term against the partial sum of the whole series
    const double total = std::abs(r.even + r.odd);
    const double ratio = total > 0 ? std::abs(last) / total : 0.0;
    r.tail_ratio = ratio;
    r.converged = ratio <= truncation_tol;
    const double pref = omega_r * omega_r;
    r.even *= pref;
    r.odd *= pref;
    return r;
}

HalfFourier gamma_multi(const PropagatorGrid& grid, double nu, TransitionClass cls, int max_m, bool* converged) {
    HalfFourier h;
    h.nu = nu;
    std::vector<int> ms;
    for (int m = (cls == TransitionClass::polariton_dark ? 2 : 3); m <= max_m;
         m += (cls == TransitionClass::polariton_dark ? 1 : 2))
        ms.push_back(m);
    if (ms.empty()) {
        if (converged) *converged = true;
        return h;
    }
    auto tr = phi_power_fourier(grid, ms, {nu});
    cplx sum{0, 0}, last{0, 0};
    for (std::size_t i = 0; i < ms.size(); ++i) {
        last = tr[i][0].value / factorial(ms[i]);
        sum += last;
    }
    if (converged) *converged = ms.size() < 2 || std::abs(last) <= 0.01 * std::abs(sum);
    h.value = nu * nu * sum;
    return h;
}

HalfFourier gamma_phi_multi(const PropagatorGrid& grid, double g, double frak_b) {
    if (!grid.has_phi()) throw QuadratureError("gamma_phi_multi: grid has no polaron propagator");
    std::vector<cplx> f(grid.phi.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        const cplx s = std::sinh(0.5 * grid.phi[k]);
        f[k] = 2.0 * s * s;
    }
    auto r = half_line_fourier(f, grid.dtau, {0.0});
    const double pref = g * g * frak_b * frak_b;
    HalfFourier h = r[0];
    h.value *= pref;
    h.delta_spike *= pref;
    return h;
}

double gamma_phi_leading(const SpectralDensity& sd, const GProfile& gp, double g, double frak_b,
                         const QuadratureConfig& cfg) {
    const double beta = gp.beta;
    RealFn f = [&](double w) {
        if (!(w > 0)) return 0.0;
        const double G = gp.G(w);
        const double jp = sd.over_omega(w) / w * G * G;
        const double n = nb(beta, w);
        return jp * jp * n * (1.0 + n);
    };
    return 2.0 * pi * g * g * frak_b * frak_b * integrate_semiinfinite(f, cfg, g_breakpoints(sd, gp.gbar, beta));
}

namespace {

// J (1-G)^2 coth(beta w / 2) / w at the nodes times the weights
std::vector<double> nonmarkov_density(const SpectralDensity& sd, const GProfile& gp, const FrequencyNodes& nodes) {
    std::vector<double> d(nodes.omega.size());
    for (std::size_t j = 0; j < d.size(); ++j) {
        const double w = nodes.omega[j], h = gp.one_minus(w);
        d[j] = nodes.weight[j] * sd.over_omega(w) * h * h * coth_half(gp.beta * w);
    }
    return d;
}

}  // namespace

double gamma1_nonmarkov(const SpectralDensity& sd, const GProfile& gp, double tau) {
    if (tau <= 0) return 0.0;
    const FrequencyNodes nodes = frequency_nodes(sd, gp, std::max(tau, 1.0 / sd.omega_0()));
    const auto d = nonmarkov_density(sd, gp, nodes);
    long double s = 0;
    for (std::size_t j = 0; j < d.size(); ++j) s += d[j] * std::sin(nodes.omega[j] * tau);
    return 2.0 * double(s);
}

double gamma1_nonmarkov_integral(const SpectralDensity& sd, const GProfile& gp, double t) {
    if (t <= 0) return 0.0;
    const FrequencyNodes nodes = frequency_nodes(sd, gp, std::max(t, 1.0 / sd.omega_0()));
    const auto d = nonmarkov_density(sd, gp, nodes);
    // half an oscillation of the fastest mode per panel
    const double width = std::min(t, pi / sd.upper());
    const std::size_t panels = std::size_t(std::ceil(t / width));
    std::vector<double> tx, tw;
    for (std::size_t p = 0; p < panels; ++p)
        gauss_legendre_panel(t * double(p) / double(panels), t * double(p + 1) / double(panels), 16, tx, tw);
    long double total = 0;
    for (std::size_t i = 0; i < tx.size(); ++i) {
        long double s = 0;
        for (std::size_t j = 0; j < d.size(); ++j) s += d[j] * std::sin(nodes.omega[j] * tx[i]);
        total += tw[i] * 2.0L * s;
    }
    return double(total);
}

double phi_d_re_diff_at(const PropagatorGrid& grid, double t) {
    if (!grid.has_phi_d()) throw QuadratureError("decoherence: grid has no displacement propagator");
    if (t <= 0) return 0.0;
    const auto& f = grid.phi_d_re_diff;
    const std::size_t K = f.size();
    if (t >= grid.tau.back()) {
        if (grid.phi_d_divergent)
            throw QuadratureError("decoherence: t beyond the grid and no plateau for this density");
        double s = 0;
        const std::size_t n = std::max<std::size_t>(1, K / 20);
        for (std::size_t k = K - n; k < K; ++k) s += f[k];
        return s / double(n);
    }
    // four-point Lagrange interpolation
    const double x = t / grid.dtau;
    std::size_t i = std::size_t(x);
    i = std::min(std::max<std::size_t>(i, 1), K - 3);
    const double u = x - double(i);
    const double y0 = f[i - 1], y1 = f[i], y2 = f[i + 1], y3 = f[i + 2];
    return y0 * (-u * (u - 1) * (u - 2) / 6.0) + y1 * ((u + 1) * (u - 1) * (u - 2) / 2.0) +
           y2 * (-(u + 1) * u * (u - 2) / 2.0) + y3 * ((u + 1) * u * (u - 1) / 6.0);
}

double decoherence_factor(double a, double N, double t, const PropagatorGrid& grid) {
    if (!(a > 0) || !(N > 0)) throw ParamError("decoherence factor needs a > 0 and N > 0");
    return std::exp(2.0 * phi_d_re_diff_at(grid, t) / (a * N));
}

Correlations::Correlations(SpectralDensity sd, GProfile gp, double g, double frak_b, double omega_r,
                           QuadratureConfig cfg, int max_phonons)
    : sd_(std::move(sd)), gp_(gp), g_(g), frak_b_(frak_b), omega_r_(omega_r), cfg_(cfg), max_m_(max_phonons) {
    if (max_m_ >= 2) grid_ = phi_propagator(sd_, gp_, cfg_);
}

HalfFourier Correlations::gamma1(double nu) const {
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = gamma1_cache_.find(nu);
        if (it != gamma1_cache_.end()) return it->second;
    }
    HalfFourier h = gamma1_s1(sd_, gp_.beta, nu, cfg_);
    std::lock_guard<std::mutex> lock(mu_);
    gamma1_cache_[nu] = h;
    return h;
}

ZeroLimit Correlations::gamma1_zero() const {
    RealFn F = [this](double w) {
        const double h = gp_.one_minus(w);
        return sd_(w) * h * h;
    };
    return rate_at_zero(F, gp_.beta, sd_.omega_0());
}

double Correlations::s1v(double nu) const {
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = s1v_cache_.find(nu);
        if (it != s1v_cache_.end()) return it->second;
    }
    const double v = vpme::s1v(sd_, gp_, nu, cfg_);
    std::lock_guard<std::mutex> lock(mu_);
    s1v_cache_[nu] = v;
    return v;
}

double Correlations::s1(double nu) const { return gamma1(nu).shift(); }

MultiPhonon Correlations::multi(double nu) const {
    if (max_m_ < 2) return MultiPhonon{};
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = multi_cache_.find(nu);
        if (it != multi_cache_.end()) return it->second;
    }
    MultiPhonon m = gamma_multi_parity(grid_, omega_r_, nu, max_m_);
    std::lock_guard<std::mutex> lock(mu_);
    multi_cache_[nu] = m;
    return m;
}

HalfFourier Correlations::gamma_phi() const {
    if (max_m_ < 2) return HalfFourier{};
    return gamma_phi_multi(grid_, g_, frak_b_);
}

}  // namespace vpme
