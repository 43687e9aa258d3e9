#include "vpme/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_min.h>
#include <gsl/gsl_roots.h>
#include <unsupported/Eigen/MatrixFunctions>

namespace vpme {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

struct GslFn {
    const std::function<double(double)>* f;
    static double call(double x, void* p) { return (*static_cast<GslFn*>(p)->f)(x); }
};

// Brent minimum of f on [lo, hi] starting from guess; nan if the bracket is not valid
double brent_min(const std::function<double(double)>& f, double lo, double guess, double hi) {
    if (!(f(guess) < f(lo) && f(guess) < f(hi))) return nan;
    GslFn ctx{&f};
    gsl_function F{&GslFn::call, &ctx};
    gsl_min_fminimizer* s = gsl_min_fminimizer_alloc(gsl_min_fminimizer_brent);
    gsl_error_handler_t* old = gsl_set_error_handler_off();
    double x = nan;
    if (gsl_min_fminimizer_set(s, &F, guess, lo, hi) == GSL_SUCCESS) {
        for (int it = 0; it < 200; ++it) {
            if (gsl_min_fminimizer_iterate(s) != GSL_SUCCESS) break;
            const double a = gsl_min_fminimizer_x_lower(s), b = gsl_min_fminimizer_x_upper(s);
            x = gsl_min_fminimizer_x_minimum(s);
            if (gsl_min_test_interval(a, b, 0.0, 1e-12) == GSL_SUCCESS) break;
        }
    }
    gsl_set_error_handler(old);
    gsl_min_fminimizer_free(s);
    return x;
}

// Brent root of f on [lo, hi]; nan without a sign change
double brent_root(const std::function<double(double)>& f, double lo, double hi) {
    if (f(lo) * f(hi) > 0) return nan;
    GslFn ctx{&f};
    gsl_function F{&GslFn::call, &ctx};
    gsl_root_fsolver* s = gsl_root_fsolver_alloc(gsl_root_fsolver_brent);
    gsl_error_handler_t* old = gsl_set_error_handler_off();
    double x = nan;
    if (gsl_root_fsolver_set(s, &F, lo, hi) == GSL_SUCCESS) {
        for (int it = 0; it < 200; ++it) {
            if (gsl_root_fsolver_iterate(s) != GSL_SUCCESS) break;
            x = gsl_root_fsolver_root(s);
            if (gsl_root_test_interval(gsl_root_fsolver_x_lower(s), gsl_root_fsolver_x_upper(s), 0.0, 1e-13) ==
                GSL_SUCCESS)
                break;
        }
    }
    gsl_set_error_handler(old);
    gsl_root_fsolver_free(s);
    return x;
}

void linspace(double a, double b, std::size_t n, std::vector<double>& out) {
    if (n < 2) n = 2;
    for (std::size_t i = 0; i < n; ++i) out.push_back(a + (b - a) * double(i) / double(n - 1));
}

const int polaritons[2] = {plus, minus};

}  // namespace

double SpectrumResult::area_ratio() const { return area() / (pi * a0); }

double lineshape_offset(const CoherenceMatrix& coh, double x, double a0) {
    double s = 0;
    for (int p : polaritons) {
        const double g = coh.R[p][ground].real(), d = coh.offset[p] - x;
        if (g > 0) s += g / (g * g + d * d);
    }
    return 0.5 * a0 * s;
}

double lineshape(const CoherenceMatrix& coh, double omega, double a0) {
    return lineshape_offset(coh, omega - coh.origin, a0);
}

SpectrumResult absorption_spectrum(const CoherenceMatrix& coh, Theory theory, const SpectrumGrid& grid, double a0) {
    SpectrumResult r;
    r.theory = theory;
    r.a0 = a0;
    r.origin = coh.origin;
    for (int i = 0; i < 2; ++i) {
        SpectrumPeak& pk = r.peaks[i];
        pk.level = polaritons[i];
        pk.center = coh.offset[pk.level];
        pk.half_width = coh.R[pk.level][ground].real();
        pk.delta_line = !(pk.half_width > 0);
        if (pk.delta_line) {
            pk.center_found = pk.center;
            pk.height = std::numeric_limits<double>::infinity();
        }
    }

    std::vector<double>& x = r.offset;
    if (grid.hi > grid.lo && grid.points >= 2) {
        linspace(grid.lo - r.origin, grid.hi - r.origin, grid.points, x);
    } else {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const SpectrumPeak& pk : r.peaks) {
            if (pk.delta_line) continue;
            lo = std::min(lo, pk.center - grid.span_half_widths * pk.half_width);
            hi = std::max(hi, pk.center + grid.span_half_widths * pk.half_width);
        }
        for (const SpectrumPeak& pk : r.peaks) {
            if (pk.delta_line) continue;
            const double g = pk.half_width, c = pk.center;
            const double ua = std::atan((lo - c) / g), ub = std::atan((hi - c) / g);
            const std::size_t n = std::max<std::size_t>(grid.points_per_peak, 2);
            for (std::size_t i = 0; i < n; ++i) {
                const double u = ua + (ub - ua) * double(i) / double(n - 1);
                x.push_back(i == 0 ? lo : i + 1 == n ? hi : c + g * std::tan(u));
            }
            // log-spaced distances keep the far wings resolved between distant peaks
            for (double d = g; d < hi - lo; d *= std::pow(10.0, 1.0 / 50.0))
                for (double y : {c - d, c + d})
                    if (y > lo && y < hi) x.push_back(y);
        }
        std::sort(x.begin(), x.end());
        x.erase(std::unique(x.begin(), x.end()), x.end());
    }
    r.omega.resize(x.size());
    r.intensity.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        r.omega[i] = r.origin + x[i];
        r.intensity[i] = lineshape_offset(coh, x[i], a0);
    }
    for (std::size_t i = 1; i < x.size(); ++i)
        r.area_grid += 0.5 * (x[i] - x[i - 1]) * (r.intensity[i] + r.intensity[i - 1]);

    // Lorentzian weight beyond the sampled range, and the full weight of delta lines
    for (const SpectrumPeak& pk : r.peaks) {
        if (pk.delta_line || x.empty()) {
            r.area_tail += 0.5 * a0 * pi;
            continue;
        }
        const double g = pk.half_width;
        r.area_tail += 0.5 * a0 * (pi - std::atan((x.back() - pk.center) / g) - std::atan((pk.center - x.front()) / g));
    }

    const std::function<double(double)> neg = [&](double y) { return -lineshape_offset(coh, y, a0); };
    for (SpectrumPeak& pk : r.peaks) {
        if (pk.delta_line) continue;
        const double g = pk.half_width;
        double c = brent_min(neg, pk.center - 3.0 * g, pk.center, pk.center + 3.0 * g);
        if (std::isnan(c)) c = pk.center;
        pk.center_found = c;
        pk.height = lineshape_offset(coh, c, a0);
        const double half = 0.5 * pk.height;
        const std::function<double(double)> f = [&](double y) { return lineshape_offset(coh, y, a0) - half; };
        const double right = brent_root(f, c, c + grid.span_half_widths * g);
        const double left = brent_root(f, c - grid.span_half_widths * g, c);
        pk.fwhm_found = right - left;
    }
    return r;
}

Eigen::Matrix4d rate_matrix(const RateSet& rs) {
    const double nd = rs.N - 1.0;
    auto k = [&](int a, int b) {
        const double v = rs.k[a][b].total();
        if (!std::isfinite(v)) throw std::domain_error("rate_matrix: non-finite population rate");
        return v;
    };
    Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
    M(minus, plus) = k(plus, minus);
    M(dark, plus) = nd * k(plus, dark);
    M(plus, minus) = k(minus, plus);
    M(dark, minus) = nd * k(minus, dark);
    M(plus, dark) = k(dark, plus);
    M(minus, dark) = k(dark, minus);
    for (int c = 0; c < n_levels; ++c) M(c, c) = -(M.col(c).sum() - M(c, c));
    return M;
}

PopulationTrajectory secular_dynamics(const RateSet& rs, const CoherenceMatrix& coh, const InitialState& init,
                                      const std::vector<double>& t_grid, const DynamicsOptions& opt) {
    const Eigen::Matrix4d M = rate_matrix(rs);
    Eigen::Vector4d p0;
    for (int i = 0; i < n_levels; ++i) p0(i) = init.pop[i];
    const double tr0 = p0.sum();

    PopulationTrajectory out;
    out.t = t_grid;
    out.min_population = std::numeric_limits<double>::infinity();
    const std::array<std::pair<int, int>, 3> pairs{{{plus, ground}, {minus, ground}, {plus, minus}}};
    for (double t : t_grid) {
        const Eigen::Vector4d p = (M * t).exp() * p0;
        Populations row;
        for (int i = 0; i < n_levels; ++i) {
            row[i] = p(i);
            out.min_population = std::min(out.min_population, p(i));
        }
        out.pop.push_back(row);
        out.max_trace_error = std::max(out.max_trace_error, std::abs(p.sum() - tr0));

        std::array<double, 3> c{};
        for (int j = 0; j < 3; ++j) {
            const auto [a, b] = pairs[j];
            double v = std::abs(init.coherence[j]) * std::exp(-coh.R[a][b].real() * t);
            // the gamma_1(0)/(a N) part of +-G is carried by D_{8,N} when it was dropped
            if (opt.decoherence_grid && coh.markov_divergent && b == ground)
                v *= decoherence_factor(8.0, rs.N, t, *opt.decoherence_grid);
            c[j] = v;
        }
        out.coherence.push_back(c);
    }
    return out;
}

Populations stationary_state(const RateSet& rs) {
    const Eigen::Matrix3d E = rate_matrix(rs).topLeftCorner<3, 3>();
    Eigen::FullPivLU<Eigen::Matrix3d> lu(E);
    lu.setThreshold(1e-10);
    const Eigen::MatrixXd ker = lu.kernel();
    if (ker.cols() != 1) throw std::runtime_error("stationary_state: rate matrix kernel is not one-dimensional");
    Eigen::Vector3d v = ker.col(0);
    v /= v.sum();
    return {v(0), v(1), v(2), 0.0};
}

Populations boltzmann_excited(const RateSet& rs) {
    const double ref = std::min({rs.energy[plus], rs.energy[minus], rs.energy[dark]});
    const double wp = std::exp(-rs.beta * (rs.energy[plus] - ref));
    const double wm = std::exp(-rs.beta * (rs.energy[minus] - ref));
    const double wd = (rs.N - 1.0) * std::exp(-rs.beta * (rs.energy[dark] - ref));
    const double z = wp + wm + wd;
    return {wp / z, wm / z, wd / z, 0.0};
}

std::vector<std::vector<double>> per_state_dynamics(const RateSet& rs, const std::vector<double>& p0,
                                                    const std::vector<double>& t_grid) {
    const int N = static_cast<int>(rs.N);
    if (N < 2 || N > 8 || double(N) != rs.N) throw std::domain_error("per_state_dynamics needs integer 2 <= N <= 8");
    const int n = N + 2;  // +, -, d_1..d_{N-1}, G
    if (int(p0.size()) != n) throw std::invalid_argument("per_state_dynamics: initial vector needs N + 2 entries");
    auto k = [&](int a, int b) {
        const double v = rs.k[a][b].total();
        if (!std::isfinite(v)) throw std::domain_error("per_state_dynamics: non-finite population rate");
        return v;
    };
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    M(1, 0) = k(plus, minus);
    M(0, 1) = k(minus, plus);
    for (int d = 2; d < N + 1; ++d) {
        M(d, 0) = k(plus, dark);
        M(d, 1) = k(minus, dark);
        M(0, d) = k(dark, plus);
        M(1, d) = k(dark, minus);
        for (int e = 2; e < N + 1; ++e)
            if (e != d) M(e, d) = N > 2 ? k(dark, dark) : 0.0;
    }
    for (int c = 0; c < n; ++c) M(c, c) = -(M.col(c).sum() - M(c, c));
    const Eigen::VectorXd v0 = Eigen::Map<const Eigen::VectorXd>(p0.data(), n);
    std::vector<std::vector<double>> out;
    for (double t : t_grid) {
        const Eigen::VectorXd p = (M * t).exp() * v0;
        out.emplace_back(p.data(), p.data() + n);
    }
    return out;
}

}  // namespace vpme
