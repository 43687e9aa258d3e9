#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "vpme/variational.hpp"

using namespace vpme;

namespace {
const double inf = std::numeric_limits<double>::infinity();
}

TEST_CASE("G profile limits") {
    const double beta = 38.68;
    CHECK(g_of_omega(0.0, beta, 1e-3) == 1.0);
    CHECK(g_of_omega(inf, beta, 1e-3) == 0.0);
    const double gb = 2e-3, w = 5e-3;
    CHECK(one_minus_g(gb, beta, w) == doctest::Approx(1.0 - g_of_omega(gb, beta, w)).epsilon(1e-13));
    // tiny gbar: 1 - G keeps its leading order
    CHECK(one_minus_g(1e-20, beta, w) > 0.0);
}

TEST_CASE("typical point solves to a fixed point") {
    const PhysicalParams p = typical_params();
    const SpectralDensity sd(p.A, p.p, p.omega_0);
    const VariationalSolution s = solve_self_consistent(sd, p);
    REQUIRE(s.converged);
    CHECK(s.gbar == doctest::Approx(2.0494e-13).epsilon(1e-4));
    CHECK(s.frak_b == doctest::Approx(0.7279).epsilon(1e-4));
    CHECK(s.omega_r == doctest::Approx(p.g * std::sqrt(p.N) * s.frak_b).epsilon(1e-12));
    CHECK(gbar_update(sd, p, s.gbar) == doctest::Approx(s.gbar).epsilon(1e-8));
    CHECK(s.regime.tag == RegimeTag::HighT_WeakLM);
    CHECK(s.regime.resonant);
    CHECK(std::isfinite(s.f_fbp));
}

TEST_CASE("polaron dressing factor") {
    const PhysicalParams p = typical_params();
    const SpectralDensity sd(p.A, p.p, p.omega_0);
    CHECK(frak_b(sd, inf, p.beta()) == 1.0);
    CHECK(std::exp(log_frak_b(sd, 0.0, p.beta())) == doctest::Approx(frak_b(sd, 0.0, p.beta())).epsilon(1e-13));
    CHECK(frak_b(sd, 0.0, p.beta()) < frak_b(sd, 1e-3, p.beta()));
}

TEST_CASE("untransformed limit gives the reorganisation detuning") {
    const PhysicalParams p = typical_params();
    for (double pv : {1.0, 2.0, 3.0, 4.0}) {
        const SpectralDensity sd(p.A, pv, p.omega_0);
        const VariationalSolution s = solution_at(sd, p, inf);
        CHECK(s.delta == doctest::Approx(reorganization_energy(sd)).epsilon(1e-12));
        CHECK(s.frak_b == 1.0);
    }
}

TEST_CASE("full polaron limit has no measured detuning") {
    const PhysicalParams p = typical_params();
    const SpectralDensity sd(p.A, p.p, p.omega_0);
    CHECK(delta_measured(sd, 0.0, p.beta()) == 0.0);
}

TEST_CASE("large couplings tend to gbar = Omega_r") {
    PhysicalParams p = typical_params();
    const SpectralDensity sd(p.A, p.p, p.omega_0);
    p.N = n_for_omega_r(10 * p.omega_beta(), p.g, 1.0);
    const VariationalSolution s = solve_self_consistent(sd, p);
    REQUIRE(s.converged);
    CHECK(s.gbar == doctest::Approx(s.omega_r).epsilon(1e-3));
    CHECK(s.regime.tag == RegimeTag::HighT_StrongLM);
}

TEST_CASE("small-coupling closed form") {
    const double g = 1e-7, b = 0.73, beta = 38.68;
    const double gr = g * b;
    CHECK(gbar0_resonant(g, b, beta) == doctest::Approx(2 * gr * gr * beta / (2 + gr * gr * beta * beta)).epsilon(1e-14));
}
