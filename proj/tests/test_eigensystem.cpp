#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include <Eigen/QR>

#include "vpme/eigensystem.hpp"

using namespace vpme;

namespace {

void check_close(double a, double b, double tol = 1e-12) {
    if (std::abs(b) < 1e-300)
        CHECK(std::abs(a) < tol);
    else
        CHECK(a == doctest::Approx(b).epsilon(tol));
}

void check_weights(const TransitionWeights& a, const TransitionWeights& b) {
    check_close(a.single, b.single);
    check_close(a.even, b.even);
    check_close(a.odd, b.odd);
}

Eigen::MatrixXcd random_unitary(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = {g(rng), g(rng)};
    return Eigen::HouseholderQR<Eigen::MatrixXcd>(m).householderQ();
}

}  // namespace

TEST_CASE("Fourier dark basis is orthonormal and orthogonal to the bright state") {
    for (int N : {2, 3, 6}) {
        const DarkBasis b = dark_basis(N);
        const Eigen::MatrixXcd gram = b.u.adjoint() * b.u;
        CHECK((gram - Eigen::MatrixXcd::Identity(N - 1, N - 1)).norm() < 1e-13);
        const Eigen::VectorXcd bright = Eigen::VectorXcd::Constant(N, 1.0 / std::sqrt(double(N)));
        CHECK((b.u.adjoint() * bright).norm() < 1e-13);
        CHECK(b.u_plus == doctest::Approx(1.0 / std::sqrt(2.0 * N)));
        CHECK(b.u_minus == doctest::Approx(-1.0 / std::sqrt(2.0 * N)));
    }
}

TEST_CASE("non-resonant eigensystem") {
    const double N = 1e6, wc = 2.0, d = 3e-5, wr = 7e-5;
    const NonResonantEigensystem e = nonres_eigensystem(N, wc, d, wr);
    CHECK(e.theta == doctest::Approx(std::hypot(d, 2 * wr)));
    CHECK(e.omega_plus - e.omega_minus == doctest::Approx(e.theta).epsilon(1e-9));
    CHECK(e.omega_dark == doctest::Approx(wc + d));
    CHECK(N * (e.U_plus * e.U_plus + e.U_minus * e.U_minus) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(nonres_eigensystem(1, wc, d, wr), EigensystemError);
}

TEST_CASE("closed-form prefactors match explicit diagonalisation") {
    for (int N : {2, 3, 5, 8})
        for (double delta : {0.0, 2e-5, -5e-5}) {
            const double wr = 7e-5;
            const SecularWeights bf = bruteforce_weights(N, delta, wr);
            const SecularWeights cf = closed_form_weights(N, bf.epsilon);
            for (int a = 0; a < n_levels; ++a) {
                for (int b = 0; b < n_levels; ++b) {
                    check_weights(bf.transition[a][b], cf.transition[a][b]);
                    check_close(bf.dephasing[a][b].single, cf.dephasing[a][b].single);
                    check_close(bf.dephasing[a][b].multi, cf.dephasing[a][b].multi);
                }
                check_weights(bf.to_dark_total[a], cf.to_dark_total[a]);
                check_weights(bf.from_dark_total[a], cf.from_dark_total[a]);
            }
        }
}

TEST_CASE("dark-aggregated weights are invariant under a random rotation of the dark manifold") {
    for (int N : {3, 5, 8}) {
        const Eigen::MatrixXcd U = random_unitary(N - 1, 11 + N);
        CHECK((U.adjoint() * U - Eigen::MatrixXcd::Identity(N - 1, N - 1)).norm() < 1e-12);
        for (double delta : {0.0, 3e-5}) {
            const SecularWeights a = bruteforce_weights(N, delta, 7e-5);
            const SecularWeights b = bruteforce_weights(N, delta, 7e-5, &U);
            for (int l : {int(plus), int(minus)}) {
                check_weights(a.to_dark_total[l], b.to_dark_total[l]);
                check_weights(a.from_dark_total[l], b.from_dark_total[l]);
                check_weights(a.transition[l][minus], b.transition[l][minus]);
                check_weights(a.transition[l][plus], b.transition[l][plus]);
            }
            check_close(a.dephasing[plus][minus].multi, b.dephasing[plus][minus].multi);
            check_close(a.self[plus].single, b.self[plus].single);
            check_close(a.self[plus].multi, b.self[plus].multi);
        }
    }
}

TEST_CASE("two molecules have no dark pair") {
    const SecularWeights cf = closed_form_weights(2, 0.0);
    CHECK(cf.transition[dark][dark].single == 0.0);
    CHECK_THROWS_AS(bruteforce_weights(9, 0.0, 7e-5), EigensystemError);
}

TEST_CASE("coefficient sums") {
    const DarkBasis b = dark_basis(4);
    // sum_i u_+ u_+* = 1/2 for the resonant polariton
    CHECK(std::abs(coefficient_p(b, Label::p(), Label::p(), +1) - 0.5) < 1e-14);
    // dark states are orthogonal to the polaritons
    CHECK(std::abs(coefficient_p(b, Label::p(), Label::dk(1), +1)) < 1e-14);
}
