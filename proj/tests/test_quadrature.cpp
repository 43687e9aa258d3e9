#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include <gsl/gsl_sf_expint.h>

#include "vpme/params.hpp"
#include "vpme/quadrature.hpp"

using namespace vpme;

TEST_CASE("finite interval") {
    CHECK(integrate([](double x) { return std::sin(x); }, 0.0, pi) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("semi-infinite integrals with endpoint singularities") {
    CHECK(integrate_semiinfinite([](double x) { return std::exp(-x); }) == doctest::Approx(1.0).epsilon(1e-10));
    // integrable 1/sqrt(x) at the origin, reached by dyadic descent
    const double v = integrate_semiinfinite([](double x) { return std::exp(-x) / std::sqrt(x); }, {}, {1.0});
    CHECK(v == doctest::Approx(std::sqrt(pi)).epsilon(1e-8));
}

TEST_CASE("non-convergence throws") {
    CHECK_THROWS_AS(integrate_semiinfinite([](double x) { return 1.0 / (1.0 + x); }), QuadratureError);
}

TEST_CASE("principal value against the exponential integral") {
    // P int_0^inf e^{-w} / (a - w) dw = e^{-a} Ei(a)
    for (double a : {0.3, 1.0, 4.0}) {
        const double pv = principal_value([](double w) { return std::exp(-w); }, a);
        CHECK(pv == doctest::Approx(std::exp(-a) * gsl_sf_expint_Ei(a)).epsilon(1e-8));
    }
}

TEST_CASE("half-line Fourier transform of a decaying exponential") {
    const double gamma = 1.0, h = 0.005;
    std::vector<cplx> f(1 << 14);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = std::exp(-gamma * h * double(k));
    const std::vector<double> nus{0.0, 0.5, 2.0, 5.0};
    const auto r = half_line_fourier(f, h, nus);
    for (std::size_t i = 0; i < nus.size(); ++i) {
        const cplx exact = 1.0 / cplx(gamma, -nus[i]);
        CHECK(std::abs(r[i].value - exact) < 1e-5 * std::abs(exact));
    }
}

TEST_CASE("half-line Fourier transform separates a constant tail") {
    const double h = 0.005;
    std::vector<cplx> f(1 << 14);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = 0.25 + std::exp(-h * double(k));
    FourierTailInfo info;
    const auto r = half_line_fourier(f, h, {0.0, 1.0}, &info);
    CHECK(std::abs(info.f_inf - 0.25) < 1e-9);
    CHECK(r[0].delta_spike == doctest::Approx(0.25 * pi).epsilon(1e-9));
    CHECK(std::abs(r[0].value - 1.0) < 1e-5);
    // at nu != 0 the constant contributes i c / nu
    CHECK(std::abs(r[1].value - (1.0 / cplx(1.0, -1.0) + cplx(0, 0.25))) < 1e-5);
}

TEST_CASE("Gauss-Legendre panels are exact for polynomials") {
    std::vector<double> x, w;
    gauss_legendre_panel(0.0, 1.0, 4, x, w);
    gauss_legendre_panel(1.0, 2.0, 4, x, w);
    REQUIRE(x.size() == 8);
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], 7);
    CHECK(s == doctest::Approx(256.0 / 8.0).epsilon(1e-14));
}

TEST_CASE("config validation") {
    QuadratureConfig c;
    c.samples = 1000;
    CHECK_THROWS(c.validate());
}
