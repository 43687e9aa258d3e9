#include "vpme/rates.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace vpme {

const char* to_string(Theory t) { return t == Theory::wcme ? "wcme" : "vpme"; }

Theory parse_theory(const std::string& s) {
    if (s == "wcme") return Theory::wcme;
    if (s == "vpme") return Theory::vpme;
    throw ParamError("unknown theory '" + s + "' (expected wcme or vpme)");
}

RateTerm RateSet::to_dark_total(int from) const {
    const RateTerm& r = k[from][dark];
    return {(N - 1.0) * r.single, (N - 1.0) * r.multi};
}

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// weight * gamma_1(0) under the tri-state policy
double zero_term(const ZeroLimit& z, double weight, RateSet& rs) {
    if (weight == 0.0) return 0.0;
    switch (z.tag) {
        case ZeroTag::zero: return 0.0;
        case ZeroTag::finite: return weight * z.value;
        case ZeroTag::divergent:
            rs.markov_divergent = true;
            return inf;
    }
    return 0.0;
}

void note_truncation(RateSet& rs, const MultiPhonon& m, double nu) {
    rs.truncation_ratio = std::max(rs.truncation_ratio, m.tail_ratio);
    if (!m.converged) {
        rs.truncation_converged = false;
        std::ostringstream os;
        os << "multi-phonon series truncated at m = " << m.max_m << " with tail ratio " << m.tail_ratio
           << " at nu = " << nu;
        rs.warnings.push_back(os.str());
    }
}

void finalize(RateSet& rs);

// losses from per-state rates with dark multiplicities
void finish(RateSet& rs) {
    rs.loss[plus] = {rs.k[plus][minus].single + rs.to_dark_total(plus).single,
                     rs.k[plus][minus].multi + rs.to_dark_total(plus).multi};
    rs.loss[minus] = {rs.k[minus][plus].single + rs.to_dark_total(minus).single,
                      rs.k[minus][plus].multi + rs.to_dark_total(minus).multi};
    const double dd = rs.N - 2.0;
    const double dd_single = rs.k[dark][dark].single == 0.0 || dd == 0.0 ? 0.0 : dd * rs.k[dark][dark].single;
    rs.loss[dark] = {rs.k[dark][plus].single + rs.k[dark][minus].single + dd_single,
                     rs.k[dark][plus].multi + rs.k[dark][minus].multi};
    finalize(rs);
}

void finalize(RateSet& rs) {
    rs.loss[ground] = {};
    for (int a = 0; a < n_levels; ++a)
        for (int b = 0; b < a; ++b) rs.dephasing[b][a] = rs.dephasing[a][b];
    if (rs.markov_divergent)
        rs.warnings.push_back("gamma_1(0) is Markovian-divergent for this density; zero-frequency single-phonon "
                              "terms are reported as inf and replaced by the non-Markovian factor D_{a,N}(t)");
}

void set_sym(RateSet& rs, int a, int b, RateTerm t) { rs.dephasing[a][b] = rs.dephasing[b][a] = t; }

}  // namespace

CoherenceMatrix coherence_rates(const RateSet& rates, const LambShiftSet& lamb) {
    CoherenceMatrix c;
    auto finite = [&](double x) {
        if (std::isinf(x)) {
            c.markov_divergent = true;
            return 0.0;
        }
        return x;
    };
    for (int a = 0; a < n_levels; ++a)
        for (int b = 0; b < n_levels; ++b) {
            if (a == b && a != dark) continue;
            const double la = finite(rates.loss[a].single) + rates.loss[a].multi;
            const double lb = finite(rates.loss[b].single) + rates.loss[b].multi;
            const double kp = finite(rates.dephasing[a][b].single) + rates.dephasing[a][b].multi;
            const double im = (a == b) ? 0.0 : lamb.delta_mn(a, b);
            c.R[a][b] = cplx(0.5 * (la + lb) + kp, im);
        }
    c.origin = lamb.origin;
    for (int l = 0; l < n_levels; ++l) c.offset[l] = lamb.offset(l);
    return c;
}

Channels wcme_channels(const SpectralDensity& sd, double beta, const QuadratureConfig& cfg) {
    Channels ch;
    ch.gamma1 = [sd, beta, cfg](double nu) { return gamma1_s1(sd, beta, nu, cfg).rate(); };
    ch.s1 = [sd, beta, cfg](double nu) { return gamma1_s1(sd, beta, nu, cfg).shift(); };
    ch.multi = [](double) { return MultiPhonon{}; };
    gamma1_s1(sd, beta, 0.0, cfg, &ch.gamma1_zero);
    return ch;
}

Channels vpme_channels(const Correlations& corr) {
    Channels ch;
    const Correlations* c = &corr;
    ch.gamma1 = [c](double nu) { return c->gamma1(nu).rate(); };
    ch.s1 = [c](double nu) { return c->s1v(nu); };
    ch.multi = [c](double nu) { return c->multi(nu); };
    ch.gamma1_zero = corr.gamma1_zero();
    ch.phi = corr.gamma_phi();
    ch.omega_r = corr.omega_r();
    return ch;
}

RateReport assemble_secular(const SecularWeights& w, const Channels& ch, Theory theory, double beta,
                            const std::array<double, 3>& e, double omega_c) {
    RateReport out;
    RateSet& rs = out.rates;
    LambShiftSet& ls = out.lamb;
    rs.theory = ls.theory = theory;
    rs.N = w.N;
    rs.beta = beta;
    rs.epsilon = w.epsilon;
    rs.theta = e[plus] - e[minus];
    rs.delta = e[dark];
    rs.omega_r = ch.omega_r;
    rs.nonresonant = e[dark] != 0.0;
    rs.gamma1_zero = ch.gamma1_zero;
    rs.energy = {omega_c + e[plus], omega_c + e[minus], omega_c + e[dark], 0.0};
    ls.energy = rs.energy;
    ls.origin = omega_c;
    ls.relative = {e[plus], e[minus], e[dark], -omega_c};

    const double s1_zero = ch.s1(0.0);
    auto transition = [&](const TransitionWeights& tw, double nu, double& shift) {
        RateTerm t;
        shift = 0;
        if (nu == 0.0) {
            t.single = zero_term(ch.gamma1_zero, tw.single, rs);
            if (tw.single != 0.0) shift += tw.single * s1_zero;
            return t;
        }
        if (tw.single != 0.0) {
            t.single = tw.single * ch.gamma1(nu);
            shift += tw.single * ch.s1(nu);
        }
        if (tw.even != 0.0 || tw.odd != 0.0) {
            const MultiPhonon m = ch.multi(nu);
            note_truncation(rs, m, nu);
            t.multi = tw.even * 2.0 * m.even.real() + tw.odd * 2.0 * m.odd.real();
            shift += tw.even * m.even.imag() + tw.odd * m.odd.imag();
        }
        return t;
    };

    double sh = 0, tmp = 0;
    // polaritons
    for (int p : {int(plus), int(minus)}) {
        const int q = p == plus ? minus : plus;
        rs.k[p][q] = transition(w.transition[p][q], e[p] - e[q], sh);
        double lt = sh;
        rs.k[p][dark] = transition(w.transition[p][dark], e[p] - e[dark], tmp);
        transition(w.to_dark_total[p], e[p] - e[dark], sh);
        lt += sh;
        ls.transition[p] = lt;
        rs.k[dark][p] = transition(w.transition[dark][p], e[dark] - e[p], tmp);
    }
    // dark states
    {
        double lt = 0;
        for (int p : {int(plus), int(minus)}) {
            transition(w.transition[dark][p], e[dark] - e[p], sh);
            lt += sh;
        }
        rs.k[dark][dark] = transition(w.transition[dark][dark], 0.0, tmp);
        transition(w.dark_dark_total, 0.0, sh);
        lt += sh;
        ls.transition[dark] = lt;
    }
    // virtual self transitions
    for (int a : {int(plus), int(minus), int(dark)})
        ls.virtual_self[a] = w.self[a].single * s1_zero + w.self[a].multi * ch.phi.shift();

    const double gphi = ch.phi.rate();
    for (int a = 0; a < n_levels; ++a)
        for (int b = 0; b <= a; ++b) {
            if (a == b && a != dark) continue;
            const DephasingWeights& dw = w.dephasing[a][b];
            RateTerm t;
            t.single = zero_term(ch.gamma1_zero, dw.single, rs);
            t.multi = dw.multi * gphi;
            set_sym(rs, a, b, t);
        }
    // losses use the dark totals so that an arbitrary dark basis stays exact
    for (int p : {int(plus), int(minus)}) {
        const int q = p == plus ? minus : plus;
        const RateTerm tot = transition(w.to_dark_total[p], e[p] - e[dark], tmp);
        rs.loss[p] = {rs.k[p][q].single + tot.single, rs.k[p][q].multi + tot.multi};
    }
    {
        const RateTerm dd = transition(w.dark_dark_total, 0.0, tmp);
        rs.loss[dark] = {rs.k[dark][plus].single + rs.k[dark][minus].single + dd.single,
                         rs.k[dark][plus].multi + rs.k[dark][minus].multi + dd.multi};
    }
    finalize(rs);
    return out;
}

RateReport wcme_rates(const PhysicalParams& params, const SpectralDensity& sd, const QuadratureConfig& cfg) {
    params.validate();
    const double N = params.N, beta = params.beta();
    const double W = params.bare_collective();
    const Channels ch = wcme_channels(sd, beta, cfg);

    RateReport out;
    RateSet& rs = out.rates;
    LambShiftSet& ls = out.lamb;
    rs.theory = ls.theory = Theory::wcme;
    rs.N = N;
    rs.beta = beta;
    rs.omega_r = W;
    rs.theta = 2.0 * W;
    rs.gamma1_zero = ch.gamma1_zero;
    rs.energy = {params.omega_c + W, params.omega_c - W, params.omega_c, 0.0};
    ls.energy = rs.energy;
    ls.origin = params.omega_c;
    ls.relative = {W, -W, 0.0, -params.omega_c};
    if (params.omega_m != params.omega_c)
        rs.warnings.push_back("weak-coupling rates assume the bare resonance omega_c = omega_m");

    const double q = 1.0 / (4.0 * N), h = 1.0 / (2.0 * N);
    rs.k[plus][minus].single = q * ch.gamma1(2.0 * W);
    rs.k[minus][plus].single = q * ch.gamma1(-2.0 * W);
    rs.k[plus][dark].single = h * ch.gamma1(W);
    rs.k[minus][dark].single = h * ch.gamma1(-W);
    rs.k[dark][plus].single = h * ch.gamma1(-W);
    rs.k[dark][minus].single = h * ch.gamma1(W);
    if (N > 2.0) rs.k[dark][dark].single = zero_term(ch.gamma1_zero, 1.0 / N, rs);

    const double g0 = zero_term(ch.gamma1_zero, 1.0, rs);
    auto z = [&](double wgt) { return wgt == 0.0 ? 0.0 : wgt * g0; };
    set_sym(rs, plus, minus, {0.0, 0.0});
    set_sym(rs, plus, ground, {z(1.0 / (8.0 * N)), 0.0});
    set_sym(rs, minus, ground, {z(1.0 / (8.0 * N)), 0.0});
    set_sym(rs, plus, dark, {z(1.0 / (8.0 * N)), 0.0});
    set_sym(rs, minus, dark, {z(1.0 / (8.0 * N)), 0.0});
    set_sym(rs, dark, ground, {z(1.0 / (2.0 * N)), 0.0});
    rs.dephasing[dark][dark] = {0.0, 0.0};

    const double s0 = ch.s1(0.0);
    ls.transition[plus] = q * ch.s1(2.0 * W) + (N - 1.0) * h * ch.s1(W);
    ls.transition[minus] = q * ch.s1(-2.0 * W) + (N - 1.0) * h * ch.s1(-W);
    ls.transition[dark] = h * (ch.s1(W) + ch.s1(-W)) + (N - 2.0) / N * s0;
    ls.virtual_self[plus] = ls.virtual_self[minus] = q * s0;
    ls.virtual_self[dark] = s0 / N;
    finish(rs);
    return out;
}

RateReport vpme_rates(const PhysicalParams& params, const VariationalSolution& sol, const Correlations& corr) {
    params.validate();
    const double N = params.N, beta = params.beta();
    const double Wr = corr.omega_r();
    if (!sol.converged) throw SolverError("vpme_rates: variational solution not converged");

    RateReport out;
    RateSet& rs = out.rates;
    LambShiftSet& ls = out.lamb;
    rs.theory = ls.theory = Theory::vpme;
    rs.N = N;
    rs.beta = beta;
    rs.omega_r = Wr;
    rs.theta = 2.0 * Wr;
    rs.energy = {params.omega_c + Wr, params.omega_c - Wr, params.omega_c, 0.0};
    ls.energy = rs.energy;
    ls.origin = params.omega_c;
    ls.relative = {Wr, -Wr, 0.0, -params.omega_c};
    if (!sol.regime.resonant)
        rs.warnings.push_back("solution is not resonant (2 Omega_r <= factor |Delta|); consider --nonresonant");

    const double r2 = Wr * Wr;
    // main-text multi-phonon functions: nu^2 sum over the m-set of the transition class
    auto multi_pd = [&](double nu) {
        const MultiPhonon m = corr.multi(nu);
        note_truncation(rs, m, nu);
        return (nu * nu / r2) * (m.even + m.odd);
    };
    auto multi_pp = [&](double nu) {
        const MultiPhonon m = corr.multi(nu);
        note_truncation(rs, m, nu);
        return (nu * nu / r2) * m.odd;
    };
    const double q = 1.0 / (4.0 * N), h = 1.0 / (2.0 * N);
    struct Edge {
        int from, to;
        double nu, pref;
        bool pp;
    };
    const Edge edges[] = {{plus, minus, 2.0 * Wr, q, true},  {minus, plus, -2.0 * Wr, q, true},
                          {plus, dark, Wr, h, false},        {minus, dark, -Wr, h, false},
                          {dark, plus, -Wr, h, false},       {dark, minus, Wr, h, false}};
    for (const Edge& e : edges) {
        const cplx gm = e.pp ? multi_pp(e.nu) : multi_pd(e.nu);
        rs.k[e.from][e.to] = {e.pref * corr.gamma1(e.nu).rate(), e.pref * 2.0 * gm.real()};
    }
    rs.gamma1_zero = corr.gamma1_zero();
    if (N > 2.0) rs.k[dark][dark].single = zero_term(rs.gamma1_zero, 1.0 / N, rs);

    const double g0 = zero_term(rs.gamma1_zero, 1.0, rs);
    const HalfFourier phi = corr.gamma_phi();
    const double gphi = phi.rate();
    set_sym(rs, plus, minus, {0.0, 2.0 * gphi});
    set_sym(rs, plus, ground, {g0 / (8.0 * N), 0.5 * gphi});
    set_sym(rs, minus, ground, {g0 / (8.0 * N), 0.5 * gphi});
    set_sym(rs, plus, dark, {g0 / (8.0 * N), 0.5 * gphi});
    set_sym(rs, minus, dark, {g0 / (8.0 * N), 0.5 * gphi});
    set_sym(rs, dark, ground, {g0 / (2.0 * N), 0.0});
    rs.dephasing[dark][dark] = {0.0, 0.0};

    auto sv_pd = [&](double nu) { return corr.s1v(nu) + multi_pd(nu).imag(); };
    auto sv_pp = [&](double nu) { return corr.s1v(nu) + multi_pp(nu).imag(); };
    const double s0 = corr.s1v(0.0);
    ls.transition[plus] = q * sv_pp(2.0 * Wr) + (N - 1.0) * h * sv_pd(Wr);
    ls.transition[minus] = q * sv_pp(-2.0 * Wr) + (N - 1.0) * h * sv_pd(-Wr);
    ls.transition[dark] = h * (sv_pd(Wr) + sv_pd(-Wr)) + (N - 2.0) / N * s0;
    ls.virtual_self[plus] = ls.virtual_self[minus] = q * s0 + phi.shift();
    ls.virtual_self[dark] = s0 / N;
    finish(rs);
    return out;
}

RateReport nonres_rates(const PhysicalParams& params, const VariationalSolution& sol, const Correlations& corr,
                        double delta) {
    params.validate();
    if (!sol.converged) throw SolverError("nonres_rates: variational solution not converged");
    const NonResonantEigensystem eig = nonres_eigensystem(params.N, params.omega_c, delta, corr.omega_r());
    const SecularWeights w = closed_form_weights(params.N, eig.epsilon);
    const std::array<double, 3> e{0.5 * (delta + eig.theta), 0.5 * (delta - eig.theta), delta};
    RateReport out = assemble_secular(w, vpme_channels(corr), Theory::vpme, params.beta(), e, params.omega_c);
    out.rates.nonresonant = true;
    return out;
}

SimplifiedNonres simplified_nonres(const RateReport& res, const RateReport& nr) {
    SimplifiedNonres s;
    const double e = nr.rates.epsilon;
    s.epsilon = e;
    s.k_plus_dark = (1.0 + e) * res.rates.k[plus][dark].total();
    s.k_minus_dark = (1.0 - e) * res.rates.k[minus][dark].total();
    const double m0 = res.rates.dephasing[plus][minus].multi;
    s.multi_dephasing_ratio = m0 != 0.0 ? nr.rates.dephasing[plus][minus].multi / m0 : 1.0 - e * e;
    auto rel = [](double approx, double full) { return full != 0.0 ? approx / full - 1.0 : 0.0; };
    s.rel_diff_plus_dark = rel(s.k_plus_dark, nr.rates.k[plus][dark].total());
    s.rel_diff_minus_dark = rel(s.k_minus_dark, nr.rates.k[minus][dark].total());
    return s;
}

double lamb_asymptote_low(double omega_r, double b2) { return 0.5 * omega_r * b2; }
double lamb_asymptote_high(double omega_r, double b0) { return b0 / (2.0 * omega_r); }

RateReport bruteforce_secular(const PhysicalParams& params, const VariationalSolution& sol, const Correlations& corr,
                              int n_small, double delta) {
    if (!sol.converged) throw SolverError("bruteforce_secular: variational solution not converged");
    const SecularWeights w = bruteforce_weights(n_small, delta, corr.omega_r());
    const std::array<double, 3> e{w.energy[plus], w.energy[minus], w.energy[dark]};
    return assemble_secular(w, vpme_channels(corr), Theory::vpme, params.beta(), e, params.omega_c);
}

}  // namespace vpme
