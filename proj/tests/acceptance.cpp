// Acceptance suite: one PASS/FAIL line per criterion at its stated tolerance.
#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vpme/correlations.hpp"
#include "vpme/eigensystem.hpp"
#include "vpme/observables.hpp"
#include "vpme/params.hpp"
#include "vpme/rates.hpp"
#include "vpme/spectral_density.hpp"
#include "vpme/variational.hpp"

using namespace vpme;

namespace {

int n_fail = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(int id, bool ok, const std::string& name, const std::string& detail) {
    std::printf("%s [%2d] %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++n_fail;
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[2048];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// typical molecular parameters with N chosen so that the solved Omega_r hits the target
struct Point {
    PhysicalParams params;
    SpectralDensity sd;
    VariationalSolution sol;
};

Point solve_at_omega_r(double target, PhysicalParams p) {
    SpectralDensity sd(p.A, p.p, p.omega_0);
    VariationalSolution sol = solve_self_consistent(sd, p);
    double b = sol.frak_b;
    for (int it = 0; it < 30; ++it) {
        p.N = n_for_omega_r(target, p.g, b);
        sol = solve_self_consistent(sd, p);
        if (std::abs(sol.omega_r / target - 1.0) < 1e-12) break;
        b = sol.frak_b;
    }
    return {p, sd, sol};
}

void criterion1() {
    Timer t;
    const PhysicalParams p = typical_params();
    const SpectralDensity sd(p.A, p.p, p.omega_0);
    const double b2 = moment_bj(sd, {}, 2, p.beta());
    const double s = t.seconds();
    report(1, rel(b2, 0.634) <= 5e-3 && s < 1.0, "B2 anchor",
           fmt("B2 = %.6f (target 0.634 +- 0.5%%, rel %.2e), %.3f s", b2, rel(b2, 0.634), s));
}

void criterion2() {
    Timer t;
    PhysicalParams p = typical_params();
    p.p = 1;
    const SpectralDensity sd(p.A, p.p, p.omega_0);
    const RateReport r = wcme_rates(p, sd);
    const double kn = r.rates.dephasing[plus][ground].total() * p.N;
    const double s = t.seconds();
    report(2, rel(kn, 1.68e-3) <= 1e-2 && s < 1.0, "WCME dephasing round trip",
           fmt("k_phi(+G) N = %.5f meV (target 1.68 meV +- 1%%, rel %.2e), %.3f s", kn * 1e3, rel(kn, 1.68e-3), s));
}

void criterion3() {
    const PhysicalParams p0 = typical_params();
    const double ob = p0.omega_beta();
    Timer t1;
    const Point hi = solve_at_omega_r(10.0 * ob, p0);
    const double s1 = t1.seconds();
    const double r_hi = rel(hi.sol.gbar, hi.sol.omega_r);
    Timer t2;
    const Point lo = solve_at_omega_r(0.01 * ob, p0);
    const double s2 = t2.seconds();
    const double g0 = gbar0_resonant(lo.params.g, lo.sol.frak_b, lo.params.beta());
    const double r_lo = rel(lo.sol.gbar, g0);
    report(3, r_hi <= 1e-2 && r_lo <= 1e-2 && s1 < 10 && s2 < 10, "regime law for gbar",
           fmt("Omega_r = 10 Omega_beta: gbar/Omega_r - 1 = %.2e (%.2f s); Omega_r = 0.01 Omega_beta: "
               "gbar = %.4e vs G0 = %.4e, rel %.2e (%.2f s)",
               hi.sol.gbar / hi.sol.omega_r - 1.0, s1, lo.sol.gbar, g0, r_lo, s2));
}

void criterion4() {
    const PhysicalParams p = typical_params();
    const SpectralDensity sd(p.A, p.p, p.omega_0);
    const VariationalSolution sol = solve_self_consistent(sd, p);
    const double g0 = gbar0_resonant(p.g, sol.frak_b, p.beta());
    const double ratio = g0 / 2.6e-14;
    report(4, ratio >= 0.1 && ratio <= 10.0, "G0 magnitude",
           fmt("G0 = %.4e eV, solved gbar = %.4e eV, ratio to 2.6e-14 = %.2f (within x10). G0 ~ g^2 B^2 beta with "
               "B = %.4f; the quoted value is not reproduced by any p in 1..4 or by g_r = g",
               g0, sol.gbar, ratio, sol.frak_b));
}

void criterion5() {
    double worst = 0;
    std::string d;
    for (double p : {1.0, 2.0, 3.0, 4.0}) {
        PhysicalParams pp = typical_params();
        pp.p = p;
        const SpectralDensity sd(pp.A, pp.p, pp.omega_0);
        const VariationalSolution sol = solution_at(sd, pp, std::numeric_limits<double>::infinity());
        const double reorg = 0.5 * pp.A * pp.omega_0 * std::tgamma(0.5 * p);
        const double r = rel(sol.delta, reorg);
        worst = std::max(worst, r);
        d += fmt("p=%g: %.3e rel; ", p, r);
    }
    report(5, worst <= 1e-6, "detuning at G = 0 equals reorganization energy", d + fmt("worst %.2e", worst));
}

void criterion6() {
    Timer t;
    const PhysicalParams p0 = typical_params();
    const double beta = p0.beta(), w0 = p0.omega_0;
    double w_single = 0, w_phi2 = 0, w_phi3 = 0, w_rates = 0;
    for (double f : {0.5, 1.0, 2.0, 5.0}) {
        const double nu = f * w0;
        const Point pt = solve_at_omega_r(nu, p0);
        const Correlations corr(pt.sd, GProfile{pt.sol.gbar, beta}, pt.params.g, pt.sol.frak_b, pt.sol.omega_r);
        auto kms = [&](double up, double down, double x) { return rel(up, std::exp(beta * x) * down); };
        w_single = std::max(w_single, kms(corr.gamma1(nu).rate(), corr.gamma1(-nu).rate(), nu));
        const auto tr = phi_power_fourier(corr.grid(), {2, 3}, {nu, -nu});
        w_phi2 = std::max(w_phi2, kms(tr[0][0].value.real(), tr[0][1].value.real(), nu));
        w_phi3 = std::max(w_phi3, kms(tr[1][0].value.real(), tr[1][1].value.real(), nu));
        const RateReport r = vpme_rates(pt.params, pt.sol, corr);
        const double wr = pt.sol.omega_r;
        w_rates = std::max(w_rates, kms(r.rates.k[plus][dark].total(), r.rates.k[dark][plus].total(), wr));
        w_rates = std::max(w_rates, kms(r.rates.k[dark][minus].total(), r.rates.k[minus][dark].total(), wr));
        w_rates = std::max(w_rates, kms(r.rates.k[plus][minus].total(), r.rates.k[minus][plus].total(), 2.0 * wr));
    }
    const double s = t.seconds();
    const double worst = std::max({w_single, w_phi2, w_phi3, w_rates});
    report(6, worst <= 1e-6 && s < 60, "detailed balance",
           fmt("worst rel: single %.2e, Phi2 %.2e, Phi3 %.2e, assembled %.2e at nu in {0.5,1,2,5} w0; %.1f s",
               w_single, w_phi2, w_phi3, w_rates, s));
}

void criterion7() {
    const PhysicalParams p0 = typical_params();
    double worst = 0;
    std::string d;
    for (double f : {0.2, 1.0, 3.0, 6.0, 10.0}) {
        const Point pt = solve_at_omega_r(f * p0.omega_0, p0);
        const GProfile gp{pt.sol.gbar, pt.params.beta()};
        const PropagatorGrid grid = phi_propagator(pt.sd, gp);
        const double nu = pt.sol.omega_r;
        const double osc = phi_power_fourier(grid, {2}, {nu})[0][0].value.real() / pi;
        const double dir = two_phonon_direct(pt.sd, gp, nu);
        const double r = rel(osc, dir);
        worst = std::max(worst, r);
        d += fmt("%g w0: %.1e; ", f, r);
    }
    report(7, worst <= 1e-3, "two-phonon cross-method", d + fmt("worst %.2e", worst));
}

// K_{>1}/K_1 for K_{+->d} at a target Omega_r
double multi_ratio(const PhysicalParams& p0, double omega_r, int max_m) {
    const Point pt = solve_at_omega_r(omega_r, p0);
    const Correlations corr(pt.sd, GProfile{pt.sol.gbar, pt.params.beta()}, pt.params.g, pt.sol.frak_b,
                            pt.sol.omega_r, {}, max_m);
    const RateReport r = vpme_rates(pt.params, pt.sol, corr);
    return r.rates.k[plus][dark].multi / r.rates.k[plus][dark].single;
}

void criterion8() {
    const PhysicalParams p0 = typical_params();
    const double r5 = multi_ratio(p0, 5.0 * p0.omega_0, 6);
    bool monotone = true;
    std::string d = fmt("p=3, Omega_r = 5 w0: K>1/K1 = %.3e; ratio curves (M = 3) over Omega_r/w0 in {1,1.5,2,3,4,6}:", r5);
    for (double p : {2.0, 3.0, 4.0}) {
        PhysicalParams pp = p0;
        pp.p = p;
        pp.A = p == 2.0 ? 0.0083 : 0.083;
        double prev = 0;
        d += fmt(" p=%g [", p);
        for (double f : {1.0, 1.5, 2.0, 3.0, 4.0, 6.0}) {
            const double r = multi_ratio(pp, f * pp.omega_0, 3);
            if (!(r > prev)) monotone = false;
            prev = r;
            d += fmt(" %.2e", r);
        }
        d += " ]";
    }
    report(8, r5 > 10 && monotone, "multi-phonon dominance", d + (monotone ? " monotone" : " NOT monotone"));
}

void criterion9() {
    Timer t;
    double worst = 0;
    int compared = 0;
    // relative against nonzero closed forms, absolute against exact zeros (weights are O(1/N))
    auto cmp = [&](double brute, double closed) {
        const double e = closed != 0.0 ? std::abs(brute - closed) / std::abs(closed) : std::abs(brute);
        worst = std::max(worst, e);
        ++compared;
    };
    auto cmp_t = [&](const TransitionWeights& a, const TransitionWeights& b) {
        cmp(a.single, b.single);
        cmp(a.even, b.even);
        cmp(a.odd, b.odd);
    };
    for (int N : {2, 3, 5, 8})
        for (double delta : {0.0, 2e-5, -5e-5}) {
            const double wr = 7.2787e-5;
            const SecularWeights bf = bruteforce_weights(N, delta, wr);
            const SecularWeights cf = closed_form_weights(N, bf.epsilon);
            for (int a : {int(plus), int(minus), int(dark)})
                for (int b : {int(plus), int(minus), int(dark)}) {
                    if (a == b && (a != dark || N == 2)) continue;
                    cmp_t(bf.transition[a][b], cf.transition[a][b]);
                }
            for (int a = 0; a < n_levels; ++a) {
                for (int b = 0; b < n_levels; ++b) {
                    if (a == b && (a != dark || N == 2)) continue;
                    cmp(bf.dephasing[a][b].single, cf.dephasing[a][b].single);
                    cmp(bf.dephasing[a][b].multi, cf.dephasing[a][b].multi);
                }
                if (a == ground) continue;
                cmp(bf.self[a].single, cf.self[a].single);
                cmp(bf.self[a].multi, cf.self[a].multi);
                cmp_t(bf.to_dark_total[a], cf.to_dark_total[a]);
                cmp_t(bf.from_dark_total[a], cf.from_dark_total[a]);
            }
            cmp_t(bf.dark_dark_total, cf.dark_dark_total);
            // named prefactors at resonance
            if (delta == 0.0) {
                cmp(bf.transition[plus][minus].single, 1.0 / (4.0 * N));
                cmp(bf.transition[plus][dark].single, 1.0 / (2.0 * N));
                cmp(bf.to_dark_total[plus].single, (N - 1.0) / (2.0 * N));
                cmp(bf.dark_dark_total.single, (N - 2.0) / N);
                if (N > 2) cmp(bf.transition[dark][dark].single, 1.0 / N);
            } else {
                const double e = bf.epsilon;
                cmp(bf.transition[plus][dark].single, (1.0 + e) / (2.0 * N));
                cmp(bf.transition[minus][dark].single, (1.0 - e) / (2.0 * N));
            }
        }
    const double s = t.seconds();
    report(9, worst <= 1e-12 && s < 60, "oracle equivalence",
           fmt("%d coefficients at N in {2,3,5,8}, Delta in {0, 2e-5, -5e-5} eV: worst rel %.2e; %.2f s", compared, worst,
               s));
}

void criterion10() {
    PhysicalParams p = typical_params();
    const SpectralDensity sd(p.A, p.p, p.omega_0);
    const GProfile gp = GProfile::untransformed(p.beta());
    const PropagatorGrid grid = phi_displacement(sd, gp);
    const double tau_b = p.beta() / pi;

    bool nonincreasing = true;
    double prev = 1.0;
    for (int i = 0; i <= 400; ++i) {
        const double t = 0.25 * i * tau_b;
        const double d = decoherence_factor(1, 1, t, grid);
        if (d > prev + 1e-12) nonincreasing = false;
        prev = d;
    }
    const double t_inf = 0.95 * grid.tau.back();
    const double plateau = decoherence_factor(1, 1, t_inf, grid);
    const double plateau2 = decoherence_factor(1, 1, 0.6 * grid.tau.back(), grid);
    const bool positive = plateau > 0 && rel(plateau, plateau2) < 1e-3;

    bool mono_n = true;
    double prev_n = 0;
    std::string dn;
    for (double N : {1.0, 10.0, 100.0, 1000.0, 1e4}) {
        const double d = decoherence_factor(8, N, t_inf, grid);
        if (!(d > prev_n) || d > 1.0) mono_n = false;
        prev_n = d;
        dn += fmt(" N=%g: %.6f", N, d);
    }
    const double d8 = decoherence_factor(8, 1000, t_inf, grid);

    double worst_id = 0, ratio = 0;
    for (double f : {0.5, 2.0, 10.0, 40.0}) {
        const double t = f * tau_b;
        const double lhs = gamma1_nonmarkov_integral(sd, gp, t);
        const double rhs = -phi_d_re_diff_at(grid, t);
        worst_id = std::max(worst_id, rel(lhs, rhs));
        ratio = lhs / rhs;
    }
    const bool ok = nonincreasing && positive && mono_n && d8 > 0.99 && worst_id <= 1e-8;
    report(10, ok, "non-Markovian decoherence factor",
           fmt("D11 non-increasing %s, plateau %.6f; D8N(inf):%s, D8,1000 = %.6f; identity int gamma_1 = "
               "-Re[phiD(t)-phiD(0)]: worst rel %.2e, ratio lhs/rhs = %.6f",
               nonincreasing ? "yes" : "no", plateau, dn.c_str(), d8, worst_id, ratio));
}

void criterion11() {
    const PhysicalParams p0 = typical_params();
    const SpectralDensity sd0(p0.A, p0.p, p0.omega_0);
    const double b2 = moment_bj(sd0, {}, 2, p0.beta());
    const double ob = p0.omega_beta();
    double worst_area = 0, worst_fwhm = 0, worst_center = 0, worst_single = 0;
    std::string d;
    for (double f : {3.0, 6.0, 10.0, 14.3}) {
        const double target = std::min(f * p0.omega_0, ob / 3.0);
        const Point pt = solve_at_omega_r(target, p0);
        const Correlations corr(pt.sd, GProfile{pt.sol.gbar, pt.params.beta()}, pt.params.g, pt.sol.frak_b,
                                pt.sol.omega_r);
        const RateReport r = vpme_rates(pt.params, pt.sol, corr);
        const CoherenceMatrix coh = coherence_rates(r.rates, r.lamb);
        const SpectrumResult sp = absorption_spectrum(coh);
        const double wr = pt.sol.omega_r, pred = wr * (1.0 + 0.5 * b2);
        worst_area = std::max(worst_area, std::abs(sp.area_ratio() - 1.0));
        d += fmt("%g w0: area %.6f (grid only %.4f)", f, sp.area_ratio(), sp.area_grid / pi);
        for (const SpectrumPeak& pk : sp.peaks) {
            const double fw = r.rates.loss[pk.level].total() + 2.0 * r.rates.dephasing[pk.level][ground].total();
            worst_fwhm = std::max(worst_fwhm, rel(pk.fwhm_found, fw));
            const double c = rel(std::abs(pk.center_found), pred);
            worst_center = std::max(worst_center, c);
            // the same center with the single-phonon shift only
            const double sgn = pk.level == plus ? 1.0 : -1.0;
            const double single = wr + (pt.params.N - 1.0) / (2.0 * pt.params.N) * corr.s1v(sgn * wr) * sgn;
            worst_single = std::max(worst_single, rel(single, pred));
            d += fmt(", %s center %.4f x pred", pk.level == plus ? "+" : "-", std::abs(pk.center_found) / pred);
        }
        d += "; ";
    }
    const bool ok = worst_area <= 1e-3 && worst_fwhm <= 1e-2 && worst_center <= 0.1;
    report(11, ok, "spectrum",
           d + fmt("worst: area %.2e, FWHM %.2e, center %.3f (single-phonon shift alone %.3f; the excess is the "
                   "multi-phonon Im Gamma_>1 part of the Lamb shift)",
                   worst_area, worst_fwhm, worst_center, worst_single));
}

void criterion12() {
    PhysicalParams p = typical_params();
    const SpectralDensity sd(p.A, p.p, p.omega_0);
    const VariationalSolution sol = solve_self_consistent(sd, p);
    const Correlations corr(sd, GProfile{sol.gbar, p.beta()}, p.g, sol.frak_b, sol.omega_r);
    const RateReport res = vpme_rates(p, sol, corr);
    const RateReport nr0 = nonres_rates(p, sol, corr, 0.0);

    double worst0 = 0;
    auto cmp = [&](double a, double b) {
        const double s = std::max(std::abs(a), std::abs(b));
        if (s > 0) worst0 = std::max(worst0, std::abs(a - b) / s);
    };
    for (int a = 0; a < n_levels; ++a) {
        for (int b = 0; b < n_levels; ++b) {
            cmp(nr0.rates.k[a][b].single, res.rates.k[a][b].single);
            cmp(nr0.rates.k[a][b].multi, res.rates.k[a][b].multi);
            cmp(nr0.rates.dephasing[a][b].single, res.rates.dephasing[a][b].single);
            cmp(nr0.rates.dephasing[a][b].multi, res.rates.dephasing[a][b].multi);
        }
        cmp(nr0.rates.loss[a].total(), res.rates.loss[a].total());
        cmp(nr0.lamb.total(a), res.lamb.total(a));
        cmp(nr0.lamb.offset(a), res.lamb.offset(a));
    }

    const double wr = sol.omega_r;
    const std::vector<double> xs{0.01, 0.02, 0.04};
    double worst_ratio = 0;
    std::vector<double> d_pm, d_phi, d_pd;
    for (double x : xs) {
        const RateReport n = nonres_rates(p, sol, corr, x * 2.0 * wr);
        const double e = n.rates.epsilon;
        const double ratio = n.rates.dephasing[plus][minus].multi / res.rates.dephasing[plus][minus].multi;
        worst_ratio = std::max(worst_ratio, std::abs(ratio - (1.0 - e * e)));
        d_pm.push_back(std::abs(n.rates.k[plus][minus].total() / res.rates.k[plus][minus].total() - 1.0));
        d_phi.push_back(std::abs(ratio - 1.0));
        d_pd.push_back(std::abs(n.rates.k[plus][dark].total() / res.rates.k[plus][dark].total() - 1.0));
    }
    // least-squares slope of log deviation against log(Delta / 2 Omega_r)
    auto slope = [&](const std::vector<double>& y) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double lx = std::log(xs[i]), ly = std::log(y[i]);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        const double n = double(xs.size());
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    const double s_pm = slope(d_pm), s_phi = slope(d_phi), s_pd = slope(d_pd);
    auto near2 = [](double s) { return std::abs(s - 2.0) <= 0.1; };
    const bool ok = worst0 <= 1e-12 && worst_ratio <= 1e-12 && near2(s_pm) && near2(s_phi) && near2(s_pd);
    report(12, ok, "non-resonant reduction and scaling",
           fmt("Delta = 0 vs resonant worst rel %.2e; multi dephasing ratio - (1-e^2) worst %.2e; fitted exponents: "
               "K(+->-) %.3f, gamma_phi %.3f, K(+->d) %.3f (the closed form K(+->d) = (1+e) K(0) is linear in e)",
               worst0, worst_ratio, s_pm, s_phi, s_pd));
}

void criterion13() {
    PhysicalParams p = typical_params(1e6);
    const SpectralDensity sd(p.A, p.p, p.omega_0);
    const VariationalSolution sol = solve_self_consistent(sd, p);
    const Correlations corr(sd, GProfile{sol.gbar, p.beta()}, p.g, sol.frak_b, sol.omega_r);
    const RateReport r = vpme_rates(p, sol, corr);
    const CoherenceMatrix coh = coherence_rates(r.rates, r.lamb);
    std::vector<double> tg;
    for (int i = 0; i <= 60; ++i) tg.push_back(i == 0 ? 0.0 : std::pow(10.0, 2.0 + 0.1 * i));
    const PopulationTrajectory tr = secular_dynamics(r.rates, coh, InitialState{}, tg);
    double t99 = -1;
    for (std::size_t i = 0; i < tg.size(); ++i)
        if (tr.pop[i][dark] > 0.99) {
            t99 = tg[i];
            break;
        }
    const double final_dark = tr.pop.back()[dark];
    const Populations st = stationary_state(r.rates), bz = boltzmann_excited(r.rates);
    double worst = 0;
    for (int i = 0; i < 3; ++i) worst = std::max(worst, rel(st[i], bz[i]));
    const bool ok = sol.omega_r < p.omega_0 && final_dark > 0.99 && worst <= 1e-6 && tr.max_trace_error <= 1e-9;
    report(13, ok, "dark-state trapping",
           fmt("Omega_r/w0 = %.3e; dark population %.6f at t = %.1e /eV (first > 0.99 at t = %.1e /eV); stationary vs "
               "Boltzmann worst rel %.2e; trace error %.1e",
               sol.omega_r / p.omega_0, final_dark, tg.back(), t99, worst, tr.max_trace_error));
}

void guarded(int id, const std::function<void()>& f) {
    try {
        f();
    } catch (const std::exception& e) {
        report(id, false, "exception", e.what());
    }
}

}  // namespace

int main() {
    Timer total;
    guarded(1, criterion1);
    guarded(2, criterion2);
    guarded(3, criterion3);
    guarded(4, criterion4);
    guarded(5, criterion5);
    guarded(6, criterion6);
    guarded(7, criterion7);
    guarded(8, criterion8);
    guarded(9, criterion9);
    guarded(10, criterion10);
    guarded(11, criterion11);
    guarded(12, criterion12);
    guarded(13, criterion13);
    std::printf("%d of 13 criteria failed; %.1f s\n", n_fail, total.seconds());
    return n_fail == 0 ? 0 : 1;
}
