#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "vpme/rates.hpp"

using namespace vpme;

namespace {

struct Point {
    PhysicalParams p;
    SpectralDensity sd;
    VariationalSolution s;
    Correlations c;
    explicit Point(PhysicalParams params, int max_m = 6)
        : p(params),
          sd(p.A, p.p, p.omega_0),
          s(solve_self_consistent(sd, p)),
          c(sd, GProfile{s.gbar, p.beta()}, p.g, s.frak_b, s.omega_r, {}, max_m) {}
};

PhysicalParams at_omega_r(double target) {
    PhysicalParams p = typical_params();
    const SpectralDensity sd(p.A, p.p, p.omega_0);
    for (int i = 0; i < 20; ++i) p.N = n_for_omega_r(target, p.g, solve_self_consistent(sd, p).frak_b);
    return p;
}

}  // namespace

TEST_CASE("detailed balance between the polaritons and towards the dark manifold") {
    const Point pt(at_omega_r(1e-2));
    const RateReport r = vpme_rates(pt.p, pt.s, pt.c);
    const RateSet& rs = r.rates;
    const double beta = pt.p.beta();
    const double kms = std::exp(-beta * (rs.energy[plus] - rs.energy[minus]));
    CHECK(rs.k[minus][plus].single == doctest::Approx(kms * rs.k[plus][minus].single).epsilon(1e-9));
    CHECK(rs.k[minus][plus].multi == doctest::Approx(kms * rs.k[plus][minus].multi).epsilon(1e-8));
    const double kd = std::exp(-beta * (rs.energy[plus] - rs.energy[dark]));
    CHECK(rs.k[dark][plus].total() == doctest::Approx(kd * rs.k[plus][dark].total()).epsilon(1e-8));
}

TEST_CASE("polariton loss is the sum of outgoing transitions") {
    const Point pt(typical_params());
    const RateSet rs = vpme_rates(pt.p, pt.s, pt.c).rates;
    for (int l : {int(plus), int(minus)}) {
        const int o = l == plus ? minus : plus;
        CHECK(rs.loss[l].total() ==
              doctest::Approx(rs.k[l][o].total() + rs.to_dark_total(l).total()).epsilon(1e-12));
        CHECK(rs.to_dark_total(l).single == doctest::Approx((rs.N - 1) * rs.k[l][dark].single).epsilon(1e-12));
    }
    CHECK(rs.loss[ground].total() == 0.0);
    CHECK(rs.truncation_converged);
}

TEST_CASE("one-phonon truncation drops every multi-phonon term") {
    const Point pt(typical_params(), 1);
    const RateSet rs = vpme_rates(pt.p, pt.s, pt.c).rates;
    for (int a = 0; a < n_levels; ++a) {
        CHECK(rs.loss[a].multi == 0.0);
        for (int b = 0; b < n_levels; ++b) {
            CHECK(rs.k[a][b].multi == 0.0);
            CHECK(rs.dephasing[a][b].multi == 0.0);
        }
    }
    const Point full(typical_params());
    const RateSet ref = vpme_rates(full.p, full.s, full.c).rates;
    CHECK(rs.k[plus][minus].single == doctest::Approx(ref.k[plus][minus].single).epsilon(1e-12));
}

TEST_CASE("zero detuning reproduces the resonant rates") {
    const Point pt(typical_params());
    const RateReport a = vpme_rates(pt.p, pt.s, pt.c), b = nonres_rates(pt.p, pt.s, pt.c, 0.0);
    for (int x = 0; x < n_levels; ++x) {
        CHECK(b.rates.loss[x].total() == doctest::Approx(a.rates.loss[x].total()).epsilon(1e-12));
        CHECK(b.lamb.total(x) == doctest::Approx(a.lamb.total(x)).epsilon(1e-12));
        for (int y = 0; y < n_levels; ++y)
            CHECK(b.rates.k[x][y].total() == doctest::Approx(a.rates.k[x][y].total()).epsilon(1e-12));
    }
    CHECK(b.rates.nonresonant);
}

TEST_CASE("brute-force assembly agrees with the closed form for small N") {
    PhysicalParams p = typical_params();
    p.N = 4;
    p.g = 1e-4;
    const Point pt(p);
    const RateReport a = vpme_rates(pt.p, pt.s, pt.c), b = bruteforce_secular(pt.p, pt.s, pt.c, 4);
    for (int x = 0; x < n_levels; ++x)
        for (int y = 0; y < n_levels; ++y) {
            const double ref = a.rates.k[x][y].total();
            if (ref == 0.0)
                CHECK(std::abs(b.rates.k[x][y].total()) < 1e-25);
            else
                CHECK(b.rates.k[x][y].total() == doctest::Approx(ref).epsilon(1e-10));
        }
}

TEST_CASE("weak-coupling dephasing for an ohmic bath") {
    PhysicalParams p = typical_params();
    p.p = 1;
    const SpectralDensity sd(p.A, p.p, p.omega_0);
    const RateSet rs = wcme_rates(p, sd).rates;
    CHECK(rs.theory == Theory::wcme);
    CHECK(rs.gamma1_zero.tag == ZeroTag::finite);
    // each polariton coherence with the ground state dephases at gamma_1(0) / (8N)
    CHECK(rs.dephasing[plus][ground].total() * p.N == doctest::Approx(rs.gamma1_zero.value / 8).epsilon(1e-9));
}

TEST_CASE("coherence rates carry half the losses plus dephasing") {
    const Point pt(typical_params());
    const RateReport r = vpme_rates(pt.p, pt.s, pt.c);
    const CoherenceMatrix coh = coherence_rates(r.rates, r.lamb);
    const RateSet& rs = r.rates;
    CHECK(coh.R[plus][ground].real() ==
          doctest::Approx(0.5 * (rs.loss[plus].total() + rs.loss[ground].total()) + rs.dephasing[plus][ground].total())
              .epsilon(1e-12));
    CHECK(coh.origin == pt.p.omega_c);
    CHECK(coh.offset[plus] - coh.offset[minus] ==
          doctest::Approx(2 * pt.s.omega_r + r.lamb.total(plus) - r.lamb.total(minus)).epsilon(1e-9));
}

TEST_CASE("theory names") {
    CHECK(parse_theory("wcme") == Theory::wcme);
    CHECK(parse_theory("vpme") == Theory::vpme);
    CHECK_THROWS(parse_theory("other"));
}
