// vpme: rates, Lamb shifts, spectra and dynamics of N molecules in a cavity.
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vpme/correlations.hpp"
#include "vpme/observables.hpp"
#include "vpme/params.hpp"
#include "vpme/rates.hpp"
#include "vpme/spectral_density.hpp"
#include "vpme/variational.hpp"

using namespace vpme;
using json = nlohmann::json;

namespace {

// set when any requested computation fails to converge; decides the exit code
std::atomic<bool> all_converged{true};

struct Common {
    std::string config;
    std::vector<std::string> overrides;
    std::string density_csv;
    std::string output;
    std::string format = "csv";
    std::string theory = "vpme";
    int max_phonons = 6;
    bool nonresonant = false;
    std::optional<double> delta;
    int jobs = 0;
};

std::map<std::string, std::string> typical_raw() {
    const PhysicalParams p = typical_params();
    std::ostringstream g, n, w0;
    g.precision(17);
    n.precision(17);
    w0.precision(17);
    g << p.g;
    n << p.N;
    w0 << p.omega_0;
    return {{"g_eV", g.str()}, {"N", n.str()}, {"T_K", "300"}, {"A", "0.083"}, {"p", "3"}, {"omega0_eV", w0.str()}};
}

PhysicalParams load_params(const Common& c) {
    auto raw = c.config.empty() ? typical_raw() : read_config_file(c.config);
    for (const std::string& kv : c.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ParamError("--set expects key=value, got '" + kv + "'");
        raw[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return build_params(raw);
}

SpectralDensity load_density(const Common& c, const PhysicalParams& p) {
    if (!c.density_csv.empty()) return SpectralDensity::from_csv(c.density_csv);
    return SpectralDensity(p.A, p.p, p.omega_0);
}

int default_jobs() {
    if (const char* e = std::getenv("VPME_JOBS")) {
        const int j = std::atoi(e);
        if (j > 0) return j;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw std::runtime_error("cannot write " + path);
        }
    }
    std::ostream& os() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::string num(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10e", x);
    return buf;
}

json jnum(double x) {
    if (std::isfinite(x)) return x;
    return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

void note(bool converged) {
    if (!converged) all_converged = false;
}

// one evaluated parameter point
struct Evaluation {
    PhysicalParams params;
    VariationalSolution sol;
    RateReport report;
    std::shared_ptr<const Correlations> corr;
};

Evaluation evaluate(const PhysicalParams& params, const SpectralDensity& sd, Theory theory, int max_m,
                    bool nonresonant, std::optional<double> delta) {
    Evaluation ev;
    ev.params = params;
    ev.sol = solve_self_consistent(sd, params);
    note(ev.sol.converged);
    if (theory == Theory::wcme) {
        ev.report = wcme_rates(params, sd);
    } else {
        ev.corr = std::make_shared<Correlations>(sd, GProfile{ev.sol.gbar, params.beta()}, params.g, ev.sol.frak_b,
                                                 ev.sol.omega_r, QuadratureConfig{}, max_m);
        if (nonresonant || delta)
            ev.report = nonres_rates(params, ev.sol, *ev.corr, delta.value_or(ev.sol.delta));
        else
            ev.report = vpme_rates(params, ev.sol, *ev.corr);
    }
    note(ev.report.rates.truncation_converged);
    return ev;
}

Evaluation evaluate(const Common& c, const PhysicalParams& params) {
    return evaluate(params, load_density(c, params), parse_theory(c.theory), c.max_phonons, c.nonresonant, c.delta);
}

void print_warnings(const RateSet& rs) {
    for (const std::string& w : rs.warnings) std::cerr << "warning: " << w << "\n";
}

json solution_json(const VariationalSolution& s) {
    return {{"gbar", jnum(s.gbar)},
            {"frak_b", jnum(s.frak_b)},
            {"delta", jnum(s.delta)},
            {"lambda_v", jnum(s.lambda_v)},
            {"omega_r", jnum(s.omega_r)},
            {"theta", jnum(s.theta)},
            {"regime", to_string(s.regime.tag)},
            {"resonant", s.regime.resonant},
            {"f_fbp", jnum(s.f_fbp)},
            {"residual", jnum(s.residual)},
            {"iterations", s.iterations},
            {"converged", s.converged}};
}

// ---- solve ----

int cmd_solve(const Common& c) {
    const PhysicalParams p = load_params(c);
    const SpectralDensity sd = load_density(c, p);
    const VariationalSolution s = solve_self_consistent(sd, p);
    note(s.converged);
    Output out(c.output);
    out.os() << solution_json(s).dump(2) << "\n";
    return 0;
}

// ---- rates ----

const char* names[n_levels] = {"plus", "minus", "dark", "G"};

void rates_csv(std::ostream& os, const RateReport& r) {
    const RateSet& rs = r.rates;
    const LambShiftSet& ls = r.lamb;
    os << "quantity,from,to,single_eV,multi_eV,total_eV\n";
    auto row = [&](const char* q, int a, int b, double s, double m) {
        os << q << "," << (a >= 0 ? names[a] : "") << "," << (b >= 0 ? names[b] : "") << "," << num(s) << ","
           << num(m) << "," << num(s + m) << "\n";
    };
    for (int a = 0; a < n_levels; ++a)
        for (int b = 0; b < n_levels; ++b) {
            if (a == ground || b == ground) continue;
            if (a == b && a != dark) continue;
            row("transition", a, b, rs.k[a][b].single, rs.k[a][b].multi);
        }
    for (int a : {int(plus), int(minus)}) {
        const RateTerm t = rs.to_dark_total(a);
        row("transition_to_all_dark", a, dark, t.single, t.multi);
    }
    for (int a = 0; a < n_levels; ++a) row("loss", a, -1, rs.loss[a].single, rs.loss[a].multi);
    for (int a = 0; a < n_levels; ++a)
        for (int b = a; b < n_levels; ++b) {
            if (a == b && a != dark) continue;
            row("dephasing", a, b, rs.dephasing[a][b].single, rs.dephasing[a][b].multi);
        }
    for (int a = 0; a < n_levels; ++a) {
        row("lamb_transition", a, -1, ls.transition[a], 0.0);
        row("lamb_virtual", a, -1, ls.virtual_self[a], 0.0);
        row("lamb_total", a, -1, ls.total(a), 0.0);
        row("energy_offset", a, -1, ls.relative[a], 0.0);
    }
}

json rates_json(const Evaluation& ev) {
    const RateSet& rs = ev.report.rates;
    const LambShiftSet& ls = ev.report.lamb;
    auto term = [](const RateTerm& t) { return json{{"single", jnum(t.single)}, {"multi", jnum(t.multi)}, {"total", jnum(t.total())}}; };
    json j;
    j["theory"] = to_string(rs.theory);
    j["nonresonant"] = rs.nonresonant;
    j["N"] = rs.N;
    j["omega_r"] = jnum(rs.omega_r);
    j["delta"] = jnum(rs.delta);
    j["epsilon"] = jnum(rs.epsilon);
    j["solution"] = solution_json(ev.sol);
    for (int a = 0; a < n_levels; ++a) {
        for (int b = 0; b < n_levels; ++b) {
            if (a == ground || b == ground || (a == b && a != dark)) continue;
            j["transition"][names[a]][names[b]] = term(rs.k[a][b]);
        }
        j["loss"][names[a]] = term(rs.loss[a]);
        for (int b = 0; b < n_levels; ++b)
            if (a != b || a == dark) j["dephasing"][names[a]][names[b]] = term(rs.dephasing[a][b]);
        j["lamb"][names[a]] = {{"transition", jnum(ls.transition[a])},
                               {"virtual", jnum(ls.virtual_self[a])},
                               {"total", jnum(ls.total(a))},
                               {"energy_offset", jnum(ls.relative[a])}};
    }
    j["energy_origin"] = ls.origin;
    j["gamma1_zero"] = {{"tag", to_string(rs.gamma1_zero.tag)}, {"value", jnum(rs.gamma1_zero.value)}};
    j["markov_divergent"] = rs.markov_divergent;
    j["truncation_converged"] = rs.truncation_converged;
    j["truncation_ratio"] = rs.truncation_ratio;
    j["warnings"] = rs.warnings;
    return j;
}

int cmd_rates(const Common& c) {
    const Evaluation ev = evaluate(c, load_params(c));
    print_warnings(ev.report.rates);
    Output out(c.output);
    if (c.format == "json")
        out.os() << rates_json(ev).dump(2) << "\n";
    else
        rates_csv(out.os(), ev.report);
    return 0;
}

// ---- spectrum ----

struct SpectrumArgs {
    double lo = 0, hi = 0;
    std::size_t points = 0;
    double span = 40;
};

int cmd_spectrum(const Common& c, const SpectrumArgs& a) {
    const Evaluation ev = evaluate(c, load_params(c));
    print_warnings(ev.report.rates);
    const CoherenceMatrix coh = coherence_rates(ev.report.rates, ev.report.lamb);
    SpectrumGrid grid;
    grid.span_half_widths = a.span;
    if (a.hi > a.lo) {
        grid.lo = a.lo;
        grid.hi = a.hi;
        grid.points = a.points ? a.points : 4001;
    }
    const SpectrumResult sp = absorption_spectrum(coh, ev.report.rates.theory, grid);
    Output out(c.output);
    out.os() << "omega_eV,offset_eV,intensity\n";
    for (std::size_t i = 0; i < sp.omega.size(); ++i)
        out.os() << num(sp.omega[i]) << "," << num(sp.offset[i]) << "," << num(sp.intensity[i]) << "\n";
    std::fprintf(stderr, "# theory %s, origin %.10g eV, area/(pi A0) = %.8f (grid %.8f)\n", to_string(sp.theory),
                 sp.origin, sp.area_ratio(), sp.area_grid / (pi * sp.a0));
    std::fprintf(stderr, "# peak,center_offset_eV,found_offset_eV,half_width_eV,fwhm_found_eV,height,delta_line\n");
    for (const SpectrumPeak& pk : sp.peaks)
        std::fprintf(stderr, "%s,%.10e,%.10e,%.10e,%.10e,%.10e,%d\n", names[pk.level], pk.center, pk.center_found,
                     pk.half_width, pk.fwhm_found, pk.height, int(pk.delta_line));
    return 0;
}

// ---- dynamics ----

struct DynamicsArgs {
    double t_max = 1e8;
    std::size_t points = 101;
    std::string initial = "plus";
    bool nonmarkov = false;
};

int cmd_dynamics(const Common& c, const DynamicsArgs& a) {
    const PhysicalParams p = load_params(c);
    const Evaluation ev = evaluate(c, p);
    print_warnings(ev.report.rates);
    const CoherenceMatrix coh = coherence_rates(ev.report.rates, ev.report.lamb);
    InitialState init;
    init.pop = {0, 0, 0, 0};
    if (a.initial == "plus") {
        init.pop[plus] = 1;
    } else if (a.initial == "minus") {
        init.pop[minus] = 1;
    } else if (a.initial == "dark") {
        init.pop[dark] = 1;
    } else if (a.initial == "photon") {
        // |1, G>: equal polariton weights with their coherence
        init.pop[plus] = init.pop[minus] = 0.5;
        init.coherence[2] = 0.5;
    } else {
        throw ParamError("--initial must be plus, minus, dark or photon");
    }
    std::vector<double> tg{0.0};
    const double t0 = a.t_max * 1e-8;
    for (std::size_t i = 1; i < a.points; ++i)
        tg.push_back(t0 * std::pow(a.t_max / t0, double(i - 1) / double(std::max<std::size_t>(a.points - 2, 1))));
    DynamicsOptions opt;
    PropagatorGrid grid;
    if (a.nonmarkov && ev.corr) {
        grid = phi_displacement(ev.corr->density(), ev.corr->profile());
        opt.decoherence_grid = &grid;
    }
    const PopulationTrajectory tr = secular_dynamics(ev.report.rates, coh, init, tg, opt);
    Output out(c.output);
    out.os() << "t_inv_eV,p_plus,p_minus,p_dark_total,p_G,abs_rho_plus_G,abs_rho_minus_G,abs_rho_plus_minus\n";
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        out.os() << num(tr.t[i]);
        for (double v : tr.pop[i]) out.os() << "," << num(v);
        for (double v : tr.coherence[i]) out.os() << "," << num(v);
        out.os() << "\n";
    }
    std::fprintf(stderr, "# trace error %.3e\n", tr.max_trace_error);
    return 0;
}

// ---- sweeps ----

struct Axis {
    std::string name;
    std::vector<double> values;
};

Axis parse_axis(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() < 4 || parts.size() > 5) throw ParamError("--axis expects name:from:to:points[:log], got " + text);
    static const char* allowed[] = {"Omega_r", "N", "A", "T", "p", "Delta_override"};
    if (std::find(std::begin(allowed), std::end(allowed), parts[0]) == std::end(allowed))
        throw ParamError("unknown sweep axis " + parts[0]);
    Axis ax{parts[0], {}};
    const double lo = std::stod(parts[1]), hi = std::stod(parts[2]);
    const int n = std::stoi(parts[3]);
    const bool log = parts.size() == 5 && parts[4] == "log";
    if (n < 1) throw ParamError("sweep needs at least one point");
    if (log && !(lo > 0 && hi > 0)) throw ParamError("log sweep bounds must be positive");
    if (ax.name != "Delta_override" && !(lo > 0 && hi > 0) && ax.name != "T")
        throw ParamError("sweep bounds for " + ax.name + " must be positive");
    for (int i = 0; i < n; ++i) {
        const double f = n == 1 ? 0.0 : double(i) / double(n - 1);
        ax.values.push_back(log ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f);
    }
    return ax;
}

// adjusts N until the solved Omega_r hits the target
PhysicalParams params_for_omega_r(PhysicalParams p, const SpectralDensity& sd, double target) {
    VariationalSolution s = solve_self_consistent(sd, p);
    for (int it = 0; it < 30; ++it) {
        p.N = n_for_omega_r(target, p.g, s.frak_b);
        s = solve_self_consistent(sd, p);
        if (std::abs(s.omega_r / target - 1.0) < 1e-10) return p;
    }
    if (std::abs(s.omega_r / target - 1.0) > 1e-6) {
        std::ostringstream os;
        os << "warning: Omega_r target " << target << " eV not reached, got " << s.omega_r << " eV\n";
        std::cerr << os.str();
    }
    return p;
}

// runs f(i) for i in [0, n) on a bounded pool; callers store results by index
template <class F>
void parallel_for(std::size_t n, int jobs, F f) {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int k = std::max(1, std::min<int>(jobs, int(n)));
    for (int t = 0; t < k; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) f(i);
        });
    for (auto& th : pool) th.join();
}

int cmd_sweep(const Common& c, const std::vector<std::string>& axis_specs) {
    if (axis_specs.empty() || axis_specs.size() > 2) throw ParamError("sweep takes one or two --axis options");
    std::vector<Axis> axes;
    for (const auto& s : axis_specs) axes.push_back(parse_axis(s));
    const PhysicalParams base = load_params(c);
    const Theory theory = parse_theory(c.theory);

    std::vector<std::vector<double>> points;
    for (double a : axes[0].values) {
        if (axes.size() == 1) {
            points.push_back({a});
        } else {
            for (double b : axes[1].values) points.push_back({a, b});
        }
    }
    std::vector<std::string> rows(points.size());
    parallel_for(points.size(), c.jobs > 0 ? c.jobs : default_jobs(), [&](std::size_t i) {
        std::ostringstream os;
        try {
            PhysicalParams p = base;
            std::optional<double> delta = c.delta;
            std::optional<double> omega_r;
            for (std::size_t k = 0; k < axes.size(); ++k) {
                const std::string& n = axes[k].name;
                const double v = points[i][k];
                if (n == "N") p.N = v;
                if (n == "A") p.A = v;
                if (n == "T") p.T = v;
                if (n == "p") p.p = v;
                if (n == "Delta_override") delta = v;
                if (n == "Omega_r") omega_r = v;
            }
            const SpectralDensity sd = c.density_csv.empty() ? SpectralDensity(p.A, p.p, p.omega_0)
                                                             : SpectralDensity::from_csv(c.density_csv);
            if (omega_r) p = params_for_omega_r(p, sd, *omega_r);
            const Evaluation ev = evaluate(p, sd, theory, c.max_phonons, c.nonresonant, delta);
            const RateSet& rs = ev.report.rates;
            const LambShiftSet& ls = ev.report.lamb;
            for (double v : points[i]) os << num(v) << ",";
            os << num(p.N) << "," << num(ev.sol.omega_r) << "," << num(ev.sol.gbar) << "," << num(ev.sol.frak_b) << ","
               << num(ev.sol.delta) << "," << to_string(ev.sol.regime.tag) << "," << num(rs.k[plus][minus].single)
               << "," << num(rs.k[plus][minus].multi) << "," << num(rs.to_dark_total(plus).single) << ","
               << num(rs.to_dark_total(plus).multi) << "," << num(rs.loss[plus].total()) << ","
               << num(rs.loss[minus].total()) << "," << num(rs.loss[dark].total()) << ","
               << num(rs.dephasing[plus][ground].total()) << "," << num(rs.dephasing[plus][minus].total()) << ","
               << num(ls.total(plus)) << "," << num(ls.total(minus)) << "," << num(ls.total(dark)) << ","
               << int(ev.sol.converged && rs.truncation_converged);
        } catch (const std::exception& e) {
            all_converged = false;
            for (double v : points[i]) os << num(v) << ",";
            os << "nan,nan,nan,nan,nan,error,nan,nan,nan,nan,nan,nan,nan,nan,nan,nan,nan,nan,0";
            std::cerr << "point " << i << ": " << e.what() << "\n";
        }
        rows[i] = os.str();
    });
    Output out(c.output);
    for (const Axis& ax : axes) out.os() << ax.name << ",";
    out.os() << "N,omega_r_eV,gbar_eV,frak_b,delta_eV,regime,k_plus_minus_single,k_plus_minus_multi,"
                "k_plus_all_dark_single,k_plus_all_dark_multi,loss_plus,loss_minus,loss_dark,kphi_plus_G,"
                "kphi_plus_minus,lamb_plus,lamb_minus,lamb_dark,converged\n";
    for (const std::string& r : rows) out.os() << r << "\n";
    return 0;
}

// ---- figures ----

std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(lo * std::pow(hi / lo, n == 1 ? 0.0 : double(i) / double(n - 1)));
    return v;
}

std::ofstream open_csv(const std::filesystem::path& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    std::cerr << "wrote " << (dir / name).string() << "\n";
    return f;
}

void fig3(const std::filesystem::path& dir, int jobs) {
    const std::vector<double> As{0.02, 0.083, 0.3};
    const std::vector<double> xs = logspace(1e-2, 1e2, 41);
    struct Row {
        double N = NAN, omega_r = NAN, gbar = NAN, b = NAN, delta = NAN, g0 = NAN, reorg = NAN;
        std::string regime = "error";
    };
    std::vector<Row> rows(As.size() * xs.size());
    parallel_for(rows.size(), jobs, [&](std::size_t i) {
        PhysicalParams p = typical_params();
        p.A = As[i / xs.size()];
        const double x = xs[i % xs.size()];
        try {
            const SpectralDensity sd(p.A, p.p, p.omega_0);
            p = params_for_omega_r(p, sd, x * p.omega_beta());
            const VariationalSolution s = solve_self_consistent(sd, p);
            note(s.converged);
            rows[i] = {p.N, s.omega_r, s.gbar, s.frak_b, s.delta, gbar0_resonant(p.g, s.frak_b, p.beta()),
                       reorganization_energy(sd), to_string(s.regime.tag)};
        } catch (const std::exception& e) {
            all_converged = false;
            std::cerr << "fig3 point A=" << p.A << " x=" << x << ": " << e.what() << "\n";
        }
    });
    const char* panels[] = {"fig3_gbar.csv", "fig3_frak_b.csv", "fig3_delta.csv"};
    for (int k = 0; k < 3; ++k) {
        std::ofstream f = open_csv(dir, panels[k]);
        f << "A,omega_r_over_omega_beta,N,omega_r_eV,"
          << (k == 0 ? "gbar_eV,gbar_over_omega_r,gbar0_eV" : k == 1 ? "frak_b" : "delta_eV,reorganization_eV")
          << ",regime\n";
        const double ob = typical_params().omega_beta();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const Row& r = rows[i];
            f << num(As[i / xs.size()]) << "," << num(r.omega_r / ob) << "," << num(r.N) << "," << num(r.omega_r) << ",";
            if (k == 0) f << num(r.gbar) << "," << num(r.gbar / r.omega_r) << "," << num(r.g0);
            if (k == 1) f << num(r.b);
            if (k == 2) f << num(r.delta) << "," << num(r.reorg);
            f << "," << r.regime << "\n";
        }
    }
}

void fig4(const std::filesystem::path& dir, int jobs) {
    const std::vector<double> fs = logspace(0.2, 10.0, 25);
    struct Row {
        double omega_r = NAN;
        TwoPhononTerms t;
        double phi2 = NAN;
    };
    std::vector<Row> rows(fs.size());
    parallel_for(fs.size(), jobs, [&](std::size_t i) {
        try {
            PhysicalParams p = typical_params();
            const SpectralDensity sd(p.A, p.p, p.omega_0);
            p = params_for_omega_r(p, sd, fs[i] * p.omega_0);
            const VariationalSolution s = solve_self_consistent(sd, p);
            note(s.converged);
            const GProfile gp{s.gbar, p.beta()};
            const PropagatorGrid grid = phi_propagator(sd, gp);
            rows[i] = {s.omega_r, two_phonon_terms(sd, gp, s.omega_r),
                       phi_power_fourier(grid, {2}, {s.omega_r})[0][0].value.real() / pi};
        } catch (const std::exception& e) {
            all_converged = false;
            std::cerr << "fig4 point " << fs[i] << ": " << e.what() << "\n";
        }
    });
    std::ofstream f = open_csv(dir, "fig4_decomp.csv");
    f << "omega_r_over_omega0,omega_r_eV,emit_emit,absorb_emit,emit_absorb,sum,re_phi2_over_pi\n";
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const Row& r = rows[i];
        f << num(fs[i]) << "," << num(r.omega_r) << "," << num(r.t.emit_emit) << "," << num(r.t.absorb_emit) << ","
          << num(r.t.emit_absorb) << "," << num(r.t.total()) << "," << num(r.phi2) << "\n";
    }
}

void fig5(const std::filesystem::path& dir, int jobs) {
    const std::vector<double> fs = logspace(0.1, 10.0, 31);
    for (double pv : {2.0, 3.0, 4.0}) {
        PhysicalParams base = typical_params();
        base.p = pv;
        base.A = pv == 2.0 ? 0.0083 : 0.083;
        const SpectralDensity sd(base.A, base.p, base.omega_0);
        // single-phonon normalisation at N = 2
        PhysicalParams p2 = base;
        p2.N = 2;
        const VariationalSolution s2 = solve_self_consistent(sd, p2);
        const Correlations c2(sd, GProfile{s2.gbar, p2.beta()}, p2.g, s2.frak_b, s2.omega_r, {}, 3);
        const RateReport r2 = vpme_rates(p2, s2, c2);
        const double n_pm = r2.rates.k[plus][minus].single, n_pd = r2.rates.to_dark_total(plus).single;

        std::vector<std::array<double, 6>> rows(fs.size());
        parallel_for(fs.size(), jobs, [&](std::size_t i) {
            rows[i].fill(NAN);
            try {
                const PhysicalParams p = params_for_omega_r(base, sd, fs[i] * base.omega_0);
                const Evaluation ev = evaluate(p, sd, Theory::vpme, 3, false, std::nullopt);
                const RateSet& rs = ev.report.rates;
                rows[i] = {p.N, ev.sol.omega_r, rs.k[plus][minus].single, rs.k[plus][minus].multi,
                           rs.to_dark_total(plus).single, rs.to_dark_total(plus).multi};
            } catch (const std::exception& e) {
                all_converged = false;
                std::cerr << "fig5 point p=" << pv << " " << fs[i] << ": " << e.what() << "\n";
            }
        });
        std::ofstream f = open_csv(dir, "fig5_p" + std::to_string(int(pv)) + ".csv");
        f << "omega_r_over_omega0,N,omega_r_eV,K1_plus_minus,Kmulti_plus_minus,ratio_plus_minus,K1_plus_dark,"
             "Kmulti_plus_dark,ratio_plus_dark\n";
        for (std::size_t i = 0; i < fs.size(); ++i) {
            const auto& r = rows[i];
            f << num(fs[i]) << "," << num(r[0]) << "," << num(r[1]) << "," << num(r[2] / n_pm) << ","
              << num(r[3] / n_pm) << "," << num(r[3] / r[2]) << "," << num(r[4] / n_pd) << "," << num(r[5] / n_pd)
              << "," << num(r[5] / r[4]) << "\n";
        }
    }
}

void fig6(const std::filesystem::path& dir) {
    const std::vector<double> ps{1.0, 2.0, 3.0, 4.0};
    std::vector<PropagatorGrid> grids;
    const PhysicalParams base = typical_params();
    for (double pv : ps) {
        const SpectralDensity sd(base.A, pv, base.omega_0);
        grids.push_back(phi_displacement(sd, GProfile::untransformed(base.beta())));
    }
    const double tau_b = base.beta() / pi;
    {
        std::ofstream f = open_csv(dir, "fig6a.csv");
        f << "t_over_tau_beta";
        for (double pv : ps) f << ",D11_p" << int(pv);
        f << "\n";
        for (int i = 0; i <= 200; ++i) {
            const double x = 0.05 * i;
            f << num(x);
            for (const auto& g : grids) f << "," << num(decoherence_factor(1, 1, x * tau_b, g));
            f << "\n";
        }
    }
    std::ofstream f = open_csv(dir, "fig6b.csv");
    f << "N";
    for (double pv : ps) f << ",D8N_inf_p" << int(pv);
    f << "\n";
    for (double N : logspace(1, 1e6, 61)) {
        f << num(N);
        for (const auto& g : grids) f << "," << num(decoherence_factor(8, N, 0.95 * g.tau.back(), g));
        f << "\n";
    }
}

void tab1(const std::filesystem::path& dir, int jobs) {
    const std::vector<double> As{0.0083, 0.083, 0.83};
    const std::vector<double> xs{0.01, 0.1, 1.0, 10.0, 100.0};
    std::vector<std::string> rows(As.size() * xs.size());
    parallel_for(rows.size(), jobs, [&](std::size_t i) {
        PhysicalParams p = typical_params();
        p.A = As[i / xs.size()];
        const double x = xs[i % xs.size()];
        std::ostringstream os;
        os << num(p.A) << "," << num(x) << ",";
        try {
            const SpectralDensity sd(p.A, p.p, p.omega_0);
            p = params_for_omega_r(p, sd, x * p.omega_beta());
            const VariationalSolution s = solve_self_consistent(sd, p);
            note(s.converged);
            const double s10 = reorganization_energy(sd);
            os << num(p.N) << "," << num(s.omega_r) << "," << num(s.gbar) << "," << num(s.gbar / s.omega_r) << ","
               << num(g_of_omega(s.gbar, p.beta(), p.omega_0)) << "," << num(s.delta) << "," << num(s10) << ","
               << num(2.0 * s.omega_r / s10) << "," << to_string(s.regime.tag) << "," << int(s.regime.resonant);
        } catch (const std::exception& e) {
            all_converged = false;
            std::cerr << "tab1 point A=" << p.A << " x=" << x << ": " << e.what() << "\n";
            os << "nan,nan,nan,nan,nan,nan,nan,nan,error,0";
        }
        rows[i] = os.str();
    });
    std::ofstream f = open_csv(dir, "tab1.csv");
    f << "A,omega_r_over_omega_beta,N,omega_r_eV,gbar_eV,gbar_over_omega_r,G_at_omega0,delta_eV,abs_S1_0_eV,"
         "two_omega_r_over_abs_S1_0,regime,resonant\n";
    for (const auto& r : rows) f << r << "\n";
}

int cmd_figures(const std::string& name, const std::string& outdir, int jobs) {
    const std::filesystem::path dir(outdir);
    if (name == "fig3") fig3(dir, jobs);
    else if (name == "fig4-decomp") fig4(dir, jobs);
    else if (name == "fig5") fig5(dir, jobs);
    else if (name == "fig6") fig6(dir);
    else if (name == "tab1") tab1(dir, jobs);
    else throw ParamError("unknown figure " + name);
    return 0;
}

void add_common(CLI::App* sub, Common& c, bool rates_flags) {
    sub->add_option("-c,--config", c.config, "key=value config file (default: typical molecular parameters)");
    sub->add_option("--set", c.overrides, "override a config key, key=value (repeatable)");
    sub->add_option("--density", c.density_csv, "tabulated spectral density CSV (omega_eV,J)");
    sub->add_option("-o,--output", c.output, "output file (default stdout)");
    if (!rates_flags) return;
    sub->add_option("--theory", c.theory, "wcme or vpme")->check(CLI::IsMember({"wcme", "vpme"}));
    sub->add_option("--max-phonons", c.max_phonons, "multi-phonon truncation order M")->check(CLI::Range(1, 40));
    sub->add_flag("--nonresonant", c.nonresonant, "use the detuned eigenbasis with the solved Delta");
    sub->add_option("--delta", c.delta, "explicit detuning in eV (implies --nonresonant)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vpme: variational polaron rates, Lamb shifts, spectra and dynamics for molecules in a cavity"};
    app.require_subcommand(1);
    Common c;
    SpectrumArgs sa;
    DynamicsArgs da;
    std::vector<std::string> axes;
    std::string fig_name, outdir = "figures";
    int jobs = 0;

    auto* solve = app.add_subcommand("solve", "solve the variational problem (JSON)");
    add_common(solve, c, false);

    auto* rates = app.add_subcommand("rates", "secular rates and Lamb shifts");
    add_common(rates, c, true);
    rates->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    auto* spectrum = app.add_subcommand("spectrum", "cavity absorption spectrum (CSV); peak table on stderr");
    add_common(spectrum, c, true);
    spectrum->add_option("--omega-min", sa.lo, "lower bound in eV");
    spectrum->add_option("--omega-max", sa.hi, "upper bound in eV");
    spectrum->add_option("--points", sa.points, "uniform points on [omega-min, omega-max]");
    spectrum->add_option("--span", sa.span, "half-widths covered beyond the outer peaks");

    auto* dynamics = app.add_subcommand("dynamics", "secular population dynamics (CSV)");
    add_common(dynamics, c, true);
    dynamics->add_option("--t-max", da.t_max, "final time in 1/eV");
    dynamics->add_option("--points", da.points, "log-spaced time points after t = 0")->check(CLI::Range(2, 100000));
    dynamics->add_option("--initial", da.initial, "plus, minus, dark or photon");
    dynamics->add_flag("--nonmarkov", da.nonmarkov, "apply D_{a,N}(t) to gamma_1(0)-carrying coherences");

    auto* sweep = app.add_subcommand("sweep", "parameter sweep (CSV, deterministic order)");
    add_common(sweep, c, true);
    sweep->add_option("--axis", axes, "name:from:to:points[:log], name in {Omega_r,N,A,T,p,Delta_override}")
        ->required();
    sweep->add_option("-j,--jobs", c.jobs, "worker threads (default VPME_JOBS or hardware)");

    auto* figures = app.add_subcommand("figures", "figure data bundles (one CSV per panel)");
    figures->add_option("name", fig_name, "fig3, fig4-decomp, fig5, fig6 or tab1")
        ->required()
        ->check(CLI::IsMember({"fig3", "fig4-decomp", "fig5", "fig6", "tab1"}));
    figures->add_option("--outdir", outdir, "output directory");
    figures->add_option("-j,--jobs", jobs, "worker threads (default VPME_JOBS or hardware)");

    CLI11_PARSE(app, argc, argv);
    try {
        if (c.delta) c.nonresonant = true;
        int rc = 0;
        if (*solve) rc = cmd_solve(c);
        if (*rates) rc = cmd_rates(c);
        if (*spectrum) rc = cmd_spectrum(c, sa);
        if (*dynamics) rc = cmd_dynamics(c, da);
        if (*sweep) rc = cmd_sweep(c, axes);
        if (*figures) rc = cmd_figures(fig_name, outdir, jobs > 0 ? jobs : default_jobs());
        if (rc == 0 && !all_converged) {
            std::cerr << "error: at least one computation did not converge\n";
            return 3;
        }
        return rc;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
