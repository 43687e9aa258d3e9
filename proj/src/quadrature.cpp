#include "vpme/quadrature.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace vpme {

namespace {

struct GslInit {
    GslInit() { gsl_set_error_handler_off(); }
};
const GslInit gsl_init;

struct Workspace {
    gsl_integration_workspace* w;
    explicit Workspace(std::size_t n) : w(gsl_integration_workspace_alloc(n)) {}
    ~Workspace() { gsl_integration_workspace_free(w); }
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;
};

double trampoline(double x, void* p) { return (*static_cast<const RealFn*>(p))(x); }

void check_status(int status, double result, double abserr, const QuadratureConfig& cfg,
                  const char* what) {
    if (!std::isfinite(result)) throw QuadratureError(std::string(what) + ": non-finite result");
    if (status == GSL_SUCCESS) return;
    // roundoff or subdivision limits are tolerated when the estimate is still usable
    double scale = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(result));
    if ((status == GSL_EROUND || status == GSL_EMAXITER || status == GSL_ETOL) &&
        abserr <= 1e3 * scale)
        return;
    throw QuadratureError(std::string(what) + ": " + gsl_strerror(status) +
                          " (abserr=" + std::to_string(abserr) + ")");
}

double segment(const RealFn& f, double a, double b, const QuadratureConfig& cfg) {
    if (b <= a) return 0.0;
    Workspace ws(cfg.max_subdivisions);
    gsl_function F{&trampoline, const_cast<RealFn*>(&f)};
    double result = 0, abserr = 0;
    int status = gsl_integration_qags(&F, a, b, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions,
                                      ws.w, &result, &abserr);
    check_status(status, result, abserr, cfg, "integrate");
    return result;
}

std::vector<double> clean_breakpoints(std::vector<double> b) {
    b.erase(std::remove_if(b.begin(), b.end(), [](double x) { return !(x > 0) || !std::isfinite(x); }),
            b.end());
    std::sort(b.begin(), b.end());
    std::vector<double> out;
    for (double x : b)
        if (out.empty() || x > out.back() * (1 + 1e-12)) out.push_back(x);
    return out;
}

// int_0^b f by halving towards zero until contributions are negligible
double dyadic_descent(const RealFn& f, double b, double running, const QuadratureConfig& cfg) {
    double sum = 0;
    int small_streak = 0;
    double hi = b;
    for (std::size_t k = 0; k < cfg.max_halvings; ++k) {
        double lo = hi * 0.5;
        double part = segment(f, lo, hi, cfg);
        sum += part;
        double ref = std::abs(running + sum);
        if (std::abs(part) <= std::max(cfg.abs_tol * 1e-3, 1e-3 * cfg.rel_tol * ref))
            ++small_streak;
        else
            small_streak = 0;
        if (small_streak >= 4) {
            // remaining piece [0, lo] with endpoint extrapolation
            sum += segment(f, 0.0, lo, cfg);
            return sum;
        }
        hi = lo;
    }
    throw QuadratureError("integrate_semiinfinite: no convergence towards zero");
}

}  // namespace

void QuadratureConfig::validate() const {
    if (samples < 2 || (samples & (samples - 1)) != 0)
        throw QuadratureError("samples must be a power of two");
    if (tau_max < 0) throw QuadratureError("tau_max must be positive");
}

double integrate(const RealFn& f, double a, double b, const QuadratureConfig& cfg) {
    if (b < a) return -segment(f, b, a, cfg);
    return segment(f, a, b, cfg);
}

double integrate_semiinfinite(const RealFn& f, const QuadratureConfig& cfg,
                              std::vector<double> breakpoints) {
    auto bp = clean_breakpoints(std::move(breakpoints));
    if (bp.empty()) bp.push_back(1.0);
    double sum = 0;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) sum += segment(f, bp[i], bp[i + 1], cfg);

    {
        Workspace ws(cfg.max_subdivisions);
        gsl_function F{&trampoline, const_cast<RealFn*>(&f)};
        double result = 0, abserr = 0;
        int status = gsl_integration_qagiu(&F, bp.back(), cfg.abs_tol, cfg.rel_tol,
                                           cfg.max_subdivisions, ws.w, &result, &abserr);
        check_status(status, result, abserr, cfg, "integrate_semiinfinite tail");
        sum += result;
    }
    sum += dyadic_descent(f, bp.front(), sum, cfg);
    return sum;
}

double principal_value(const RealFn& f, double pole, const QuadratureConfig& cfg,
                       std::vector<double> breakpoints) {
    if (pole <= 0) {
        RealFn g = [&](double w) { return f(w) / (pole - w); };
        return integrate_semiinfinite(g, cfg, std::move(breakpoints));
    }
    // symmetric window around the pole; its own PV of f(pole)/(pole-w) vanishes
    double h = 0.5 * pole;
    for (double b : breakpoints)
        if (b > 0 && std::abs(b - pole) > 1e-12 * pole) h = std::min(h, std::abs(b - pole));
    RealFn sym = [&](double s) { return (f(pole - s) - f(pole + s)) / s; };
    double inner = segment(sym, 0.0, h, cfg);

    RealFn g = [&](double w) { return f(w) / (pole - w); };
    double lo = pole - h, hi = pole + h;
    std::vector<double> left, right;
    for (double b : breakpoints) {
        if (b > 0 && b < lo) left.push_back(b);
        if (b > hi) right.push_back(b);
    }
    left.push_back(lo);
    auto lb = clean_breakpoints(left);
    double below = 0;
    for (std::size_t i = 0; i + 1 < lb.size(); ++i) below += segment(g, lb[i], lb[i + 1], cfg);
    below += dyadic_descent(g, lb.front(), below, cfg);

    right.push_back(hi);
    auto rb = clean_breakpoints(right);
    double above = 0;
    for (std::size_t i = 0; i + 1 < rb.size(); ++i) above += segment(g, rb[i], rb[i + 1], cfg);
    {
        Workspace ws(cfg.max_subdivisions);
        gsl_function F{&trampoline, const_cast<RealFn*>(&g)};
        double result = 0, abserr = 0;
        int status = gsl_integration_qagiu(&F, rb.back(), cfg.abs_tol, cfg.rel_tol,
                                           cfg.max_subdivisions, ws.w, &result, &abserr);
        check_status(status, result, abserr, cfg, "principal_value tail");
        above += result;
    }
    return inner + below + above;
}

std::vector<HalfFourier> half_line_fourier(const std::vector<cplx>& f, double dtau,
                                           const std::vector<double>& nu_grid,
                                           FourierTailInfo* info, double tail_tolerance) {
    const std::size_t K = f.size();
    if (K < 64) throw QuadratureError("half_line_fourier: grid too short");
    const std::size_t tail0 = K - K / 10;
    cplx f_inf{0, 0};
    for (std::size_t k = K - K / 20; k < K; ++k) f_inf += f[k];
    f_inf /= double(K / 20);
    double fmax = 0, var = 0;
    for (std::size_t k = 0; k < K; ++k) fmax = std::max(fmax, std::abs(f[k]));
    for (std::size_t k = tail0; k < K; ++k) var = std::max(var, std::abs(f[k] - f_inf));
    double rel_var = fmax > 0 ? var / fmax : 0.0;
    if (info) {
        info->f_inf = f_inf;
        info->tail_variation = rel_var;
    }
    if (rel_var > tail_tolerance)
        throw QuadratureError("half_line_fourier: tail not asymptotically constant (relative variation " +
                              std::to_string(rel_var) + ")");

    // cosine taper over the last tenth removes truncation ringing
    std::vector<double> taper(K, 1.0);
    for (std::size_t k = tail0; k < K; ++k) {
        double x = double(k - tail0) / double(K - 1 - tail0);
        taper[k] = 0.5 * (1.0 + std::cos(3.14159265358979323846 * x));
    }

    std::vector<HalfFourier> out;
    out.reserve(nu_grid.size());
    for (double nu : nu_grid) {
        // trapezoid with Gregory corrections at tau = 0
        cplx rot = std::polar(1.0, nu * dtau);
        cplx ph{1.0, 0.0};
        cplx sum{0, 0};
        cplx g[6];
        for (std::size_t k = 0; k < K; ++k) {
            if ((k & 1023) == 0) ph = std::polar(1.0, nu * dtau * double(k));
            cplx gk = ph * (f[k] - f_inf) * taper[k];
            if (k < 6) g[k] = gk;
            sum += (k == 0 ? 0.5 : 1.0) * gk;
            ph *= rot;
        }
        cplx d1 = g[1] - g[0];
        cplx d2 = g[2] - 2.0 * g[1] + g[0];
        cplx d3 = g[3] - 3.0 * g[2] + 3.0 * g[1] - g[0];
        cplx d4 = g[4] - 4.0 * g[3] + 6.0 * g[2] - 4.0 * g[1] + g[0];
        cplx d5 = g[5] - 5.0 * g[4] + 10.0 * g[3] - 10.0 * g[2] + 5.0 * g[1] - g[0];
        cplx corr = d1 / 12.0 - d2 / 24.0 + 19.0 * d3 / 720.0 - 3.0 * d4 / 160.0 + 863.0 * d5 / 60480.0;
        HalfFourier h;
        h.nu = nu;
        h.value = dtau * (sum + corr);
        if (std::abs(f_inf) > 0) {
            if (nu == 0.0) {
                h.delta_spike = 3.14159265358979323846 * f_inf.real();
            } else {
                h.value += f_inf * cplx(0.0, 1.0 / nu);
            }
        }
        out.push_back(h);
    }
    return out;
}

void gauss_legendre_panel(double a, double b, std::size_t n, std::vector<double>& x,
                          std::vector<double>& w) {
    static std::mutex mu;
    static std::map<std::size_t, gsl_integration_glfixed_table*> tables;
    gsl_integration_glfixed_table* t;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = tables.find(n);
        if (it == tables.end()) it = tables.emplace(n, gsl_integration_glfixed_table_alloc(n)).first;
        t = it->second;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double xi, wi;
        gsl_integration_glfixed_point(a, b, i, &xi, &wi, t);
        x.push_back(xi);
        w.push_back(wi);
    }
}

}  // namespace vpme
