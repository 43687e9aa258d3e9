#include "vpme/variational.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_roots.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace vpme {

double g_of_omega(double gbar, double beta, double omega) {
    if (!(omega > 0)) return 0.0;
    if (gbar == 0.0) return 1.0;
    if (std::isinf(gbar)) return 0.0;
    return omega / (omega + gbar * coth_half(beta * omega));
}

double one_minus_g(double gbar, double beta, double omega) {
    if (!(omega > 0)) return 1.0;
    if (gbar == 0.0) return 0.0;
    if (std::isinf(gbar)) return 1.0;
    double c = gbar * coth_half(beta * omega);
    return c / (omega + c);
}

GFunction make_gfun(double gbar, double beta) {
    return [gbar, beta](double w) { return g_of_omega(gbar, beta, w); };
}

std::vector<double> g_breakpoints(const SpectralDensity& sd, double gbar, double beta) {
    auto bp = sd.scales();
    if (gbar > 0 && std::isfinite(gbar)) {
        // G = 1/2 where w^2 ~ 2 gbar / beta (w << 1/beta) or w ~ gbar (w >> 1/beta)
        double wg = std::sqrt(2.0 * gbar / beta);
        for (double f : {0.1, 1.0, 10.0}) {
            bp.push_back(f * wg);
            bp.push_back(f * gbar);
        }
    }
    bp.push_back(1.0 / beta);
    double hi = sd.upper();
    bp.erase(std::remove_if(bp.begin(), bp.end(), [&](double x) { return !(x > 0) || x > hi; }), bp.end());
    std::sort(bp.begin(), bp.end());
    return bp;
}

double log_frak_b(const SpectralDensity& sd, double gbar, double beta, const QuadratureConfig& cfg) {
    if (sd.A() == 0 && !sd.tabulated()) return 0.0;
    if (std::isinf(gbar)) return 0.0;
    RealFn f = [&](double w) {
        double g = g_of_omega(gbar, beta, w);
        return sd.over_omega(w) / w * g * g * coth_half(beta * w);
    };
    auto bp = g_breakpoints(sd, gbar, beta);
    if (gbar == 0.0 && infrared_divergent(f, sd.omega_0(), bp, cfg))
        throw DivergenceError("B exponent diverges for G = 1");
    try {
        return -0.5 * integrate_semiinfinite(f, cfg, bp);
    } catch (const QuadratureError&) {
        // a diverging exponent drives B to zero
        return -std::numeric_limits<double>::infinity();
    }
}

double frak_b(const SpectralDensity& sd, double gbar, double beta, const QuadratureConfig& cfg) {
    return std::exp(log_frak_b(sd, gbar, beta, cfg));
}

double lambda_v(const SpectralDensity& sd, double gbar, double beta, const QuadratureConfig& cfg) {
    if (std::isinf(gbar)) return 0.0;
    RealFn f = [&](double w) {
        double g = g_of_omega(gbar, beta, w);
        return sd.over_omega(w) * g * (2.0 - g);
    };
    return integrate_semiinfinite(f, cfg, g_breakpoints(sd, gbar, beta));
}

double delta_measured(const SpectralDensity& sd, double gbar, double beta, const QuadratureConfig& cfg) {
    if (gbar == 0.0) return 0.0;
    RealFn f = [&](double w) {
        double h = one_minus_g(gbar, beta, w);
        return sd.over_omega(w) * h * h;
    };
    return integrate_semiinfinite(f, cfg, g_breakpoints(sd, gbar, beta));
}

double detuning(const SpectralDensity& sd, const PhysicalParams& params, double gbar,
                const QuadratureConfig& cfg) {
    const double beta = params.beta();
    switch (params.resonance) {
        case ResonanceConvention::measured: return delta_measured(sd, gbar, beta, cfg);
        case ResonanceConvention::bare: return -lambda_v(sd, gbar, beta, cfg);
        case ResonanceConvention::explicit_energies:
            return params.omega_m - lambda_v(sd, gbar, beta, cfg) - params.omega_c;
    }
    return 0.0;
}

namespace {

// (1 - e^{-x}) / x with the x -> 0 limit
double one_minus_exp_over(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - 0.5 * x;
    return -std::expm1(-x) / x;
}

double update_from(double beta, double N, double omega_r, double delta) {
    double theta = std::sqrt(delta * delta + 4.0 * omega_r * omega_r);
    double x = beta * theta;
    double r_over_theta = beta * one_minus_exp_over(x);  // (1 - e^{-x}) / theta
    double num = 2.0 * omega_r * omega_r * r_over_theta;
    double den = 2.0 * (N - 1.0) * std::exp(-0.5 * beta * (delta + theta)) + 1.0 + std::exp(-x) -
                 delta * r_over_theta;
    return num / den;
}

struct Scales {
    double log_b, delta, omega_r, theta;
};

Scales scales_at(const SpectralDensity& sd, const PhysicalParams& params, double gbar,
                 const QuadratureConfig& cfg) {
    Scales s{};
    s.log_b = log_frak_b(sd, gbar, params.beta(), cfg);
    s.delta = detuning(sd, params, gbar, cfg);
    s.omega_r = params.g * std::exp(s.log_b) * std::sqrt(params.N);
    s.theta = std::sqrt(s.delta * s.delta + 4.0 * s.omega_r * s.omega_r);
    return s;
}

}  // namespace

double gbar_update(const SpectralDensity& sd, const PhysicalParams& params, double gbar_in,
                   const QuadratureConfig& cfg) {
    Scales s = scales_at(sd, params, gbar_in, cfg);
    return update_from(params.beta(), params.N, s.omega_r, s.delta);
}

double free_energy_from(double beta, double N, double delta, double theta) {
    double x = beta * theta;
    double t1 = 0.5 * x + std::log1p(std::exp(-x)) - 0.5 * beta * delta;  // ln(2 cosh(x/2)) - beta Delta/2
    double t2 = std::log(N - 1.0) - beta * delta;
    double m = std::max({0.0, t1, t2});
    double lse = m + std::log(std::exp(-m) + std::exp(t1 - m) + std::exp(t2 - m));
    return -lse / beta;
}

double free_energy_fbp(const SpectralDensity& sd, const PhysicalParams& params, double gbar,
                       const QuadratureConfig& cfg) {
    Scales s = scales_at(sd, params, gbar, cfg);
    return free_energy_from(params.beta(), params.N, s.delta, s.theta);
}

double gbar0_resonant(double g, double frak_b, double beta) {
    double gr2 = g * g * frak_b * frak_b;
    return 2.0 * gr2 * beta / (2.0 + gr2 * beta * beta);
}

double gbar0_full(double g, double frak_b, double beta, double delta) {
    if (delta == 0.0) return gbar0_resonant(g, frak_b, beta);
    double gr2 = g * g * frak_b * frak_b;
    double x = beta * delta;
    double nb = 1.0 / std::expm1(x);
    double one_minus_xn = std::abs(x) < 1e-4 ? x / 2.0 - x * x / 12.0 : 1.0 - x * nb;
    return delta / (one_minus_xn + delta * delta / gr2 * nb);
}

VariationalSolution solution_at(const SpectralDensity& sd, const PhysicalParams& params, double gbar,
                                const SolverConfig& cfg) {
    VariationalSolution sol;
    const double beta = params.beta();
    Scales s = scales_at(sd, params, gbar, cfg.quad);
    sol.gbar = gbar;
    sol.log_frak_b = s.log_b;
    sol.frak_b = std::exp(s.log_b);
    sol.delta = s.delta;
    sol.lambda_v = lambda_v(sd, gbar, beta, cfg.quad);
    sol.omega_r = s.omega_r;
    sol.theta = s.theta;
    sol.f_fbp = free_energy_from(beta, params.N, s.delta, s.theta);
    double up = update_from(beta, params.N, s.omega_r, s.delta);
    sol.residual = std::abs(gbar - up) / std::max(gbar, 1e-30);
    sol.converged = true;
    sol.regime = classify_regime(params, sol.omega_r, sol.delta, cfg.regime);
    return sol;
}

namespace {

struct LogMap {
    const SpectralDensity* sd;
    const PhysicalParams* params;
    const QuadratureConfig* cfg;
    // h(x) = ln update(e^x) - x
    double operator()(double x) const {
        double up = gbar_update(*sd, *params, std::exp(x), *cfg);
        if (!(up > 0)) return -1e300;
        return std::log(up) - x;
    }
};

double brent_root(const LogMap& h, double a, double b, std::size_t& iters) {
    struct Ctx {
        const LogMap* h;
    } ctx{&h};
    gsl_function F;
    F.function = [](double x, void* p) { return (*static_cast<Ctx*>(p)->h)(x); };
    F.params = &ctx;
    gsl_root_fsolver* s = gsl_root_fsolver_alloc(gsl_root_fsolver_brent);
    gsl_root_fsolver_set(s, &F, a, b);
    double root = 0.5 * (a + b);
    for (int i = 0; i < 200; ++i) {
        ++iters;
        gsl_root_fsolver_iterate(s);
        root = gsl_root_fsolver_root(s);
        double lo = gsl_root_fsolver_x_lower(s), hi = gsl_root_fsolver_x_upper(s);
        if (gsl_root_test_interval(lo, hi, 1e-13, 0) == GSL_SUCCESS) break;
    }
    gsl_root_fsolver_free(s);
    return root;
}

// damped fixed point in log variable with Aitken extrapolation; falls back to Brent
double refine_root(const LogMap& h, double a, double b, const SolverConfig& cfg, std::size_t& iters) {
    double x = 0.5 * (a + b);
    double hist[3];
    int nh = 0;
    for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
        ++iters;
        double r = h(x);
        if (std::abs(r) < cfg.tolerance) return x;
        double xn = x + cfg.damping * r;
        hist[nh++] = xn;
        if (nh == 3) {
            double d1 = hist[1] - hist[0], d2 = hist[2] - 2 * hist[1] + hist[0];
            if (std::abs(d2) > 1e-300) xn = hist[0] - d1 * d1 / d2;
            nh = 0;
        }
        if (!(xn >= a && xn <= b) || !std::isfinite(xn)) return brent_root(h, a, b, iters);
        x = xn;
    }
    return brent_root(h, a, b, iters);
}

}  // namespace

VariationalSolution solve_self_consistent(const SpectralDensity& sd, const PhysicalParams& params,
                                          const SolverConfig& cfg) {
    params.validate();
    const double Omega = params.bare_collective();
    LogMap h{&sd, &params, &cfg.quad};

    double x_lo = std::log(cfg.scan_lo);
    double x_hi = std::log(std::max(cfg.scan_hi_factor * Omega, 10.0 * cfg.scan_lo));
    const std::size_t n = std::max<std::size_t>(cfg.scan_points, 4);
    std::vector<double> xs(n), hs(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = x_lo + (x_hi - x_lo) * double(i) / double(n - 1);
        hs[i] = h(xs[i]);
    }

    std::size_t iters = 0;
    std::vector<double> roots;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (hs[i] == 0.0) {
            roots.push_back(xs[i]);
            continue;
        }
        if ((hs[i] > 0) != (hs[i + 1] > 0)) roots.push_back(refine_root(h, xs[i], xs[i + 1], cfg, iters));
    }
    if (roots.empty()) {
        std::string diag = "no fixed point in [" + std::to_string(cfg.scan_lo) + ", " +
                           std::to_string(std::exp(x_hi)) + "] eV; residual at ends: " +
                           std::to_string(hs.front()) + ", " + std::to_string(hs.back());
        throw SolverError(diag);
    }

    VariationalSolution best;
    bool have = false;
    std::vector<double> gbars;
    for (double x : roots) {
        double gb = std::exp(x);
        gbars.push_back(gb);
        VariationalSolution s = solution_at(sd, params, gb, cfg);
        if (!have || s.f_fbp < best.f_fbp) {
            best = s;
            have = true;
        }
    }
    best.iterations = iters;
    best.candidate_roots = gbars;
    best.converged = best.residual < 1e-8;
    if (!best.converged)
        throw SolverError("fixed point residual " + std::to_string(best.residual) + " above tolerance");
    return best;
}

}  // namespace vpme
