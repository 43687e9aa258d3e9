#ifndef VPME_EIGENSYSTEM_HPP
#define VPME_EIGENSYSTEM_HPP

#include <array>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

namespace vpme {

struct EigensystemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// eigenstate family of the single-excitation manifold plus the empty ground state; `dark`
// stands for one representative dark state, per-state quantities refer to it
enum Level : int { plus = 0, minus = 1, dark = 2, ground = 3 };
inline constexpr int n_levels = 4;
const char* level_name(int level);

// state label for coefficient sums: a polariton or dark state d in 1..N-1
struct Label {
    enum Kind { plus, minus, dark } kind;
    int d = 0;
    static Label p() { return {plus, 0}; }
    static Label m() { return {minus, 0}; }
    static Label dk(int d) { return {dark, d}; }
};

// molecular amplitudes u_{i alpha}; dark columns from the discrete Fourier construction
struct DarkBasis {
    int N = 2;
    Eigen::MatrixXcd u;     // N x (N-1), u(i, d-1)
    double u_plus = 0;      // U_+ (resonant: 1/sqrt(2N))
    double u_minus = 0;     // U_- (resonant: -1/sqrt(2N))
    std::complex<double> amp(int i, Label a) const;
};

// epsilon = Delta / theta sets the polariton amplitudes; 0 is the resonant basis
DarkBasis dark_basis(int N, double epsilon = 0.0);

// sum_i u_a u_b* u_c u_d*
std::complex<double> coefficient_c(const DarkBasis& b, Label a, Label bb, Label c, Label d);
// sign < 0: sum_i u_a u_b; sign > 0: sum_i u_a u_b*
std::complex<double> coefficient_p(const DarkBasis& b, Label a, Label bb, int sign);
// kind 1: sum_i u_a u_b* u_c; kind 2: sum_i u_a u_b* u_c*
std::complex<double> coefficient_v(const DarkBasis& b, Label a, Label bb, Label c, int kind);

struct NonResonantEigensystem {
    double N = 2;
    double U_plus = 0, U_minus = 0;
    double epsilon = 0;
    double theta = 0;
    double omega_plus = 0, omega_minus = 0, omega_dark = 0;  // absolute energies
};
// molecules at omega_c + delta, cavity at omega_c, renormalised collective coupling omega_r
NonResonantEigensystem nonres_eigensystem(double N, double omega_c, double delta, double omega_r);

// Secular coefficients, normalised so that
//   K_{mu->alpha} = single gamma_1(nu) + even gamma^even(nu) + odd gamma^odd(nu)
//   K^phi_{mu nu}  = single gamma_1(0) + multi gamma^phi(0)
//   Lambda^s_mu    = single S_1^v(0)   + multi S^phi(0)
// with gamma^M carrying the Omega_r^2 prefactor.
struct TransitionWeights {
    double single = 0, even = 0, odd = 0;
};
struct DephasingWeights {
    double single = 0, multi = 0;
};

struct SecularWeights {
    double N = 2;
    double epsilon = 0;
    std::array<double, n_levels> energy{};  // oracle only: eigenvalues relative to omega_c (ground unused)
    // per dark state; [dark][dark] is one ordered pair d -> d'
    std::array<std::array<TransitionWeights, n_levels>, n_levels> transition{};
    // symmetric; [dark][dark] is one pair d_i d_j
    std::array<std::array<DephasingWeights, n_levels>, n_levels> dephasing{};
    std::array<DephasingWeights, n_levels> self{};
    // sums over every dark state (basis invariant)
    std::array<TransitionWeights, n_levels> to_dark_total{}, from_dark_total{};
    TransitionWeights dark_dark_total{};  // from the representative to all d' != d
};

// explicit diagonalisation of the single-excitation Hamiltonian (N <= 8). The dark
// representative is the first column of the Fourier basis, optionally rotated by a unitary.
SecularWeights bruteforce_weights(int N, double delta, double omega_r,
                                  const Eigen::MatrixXcd* dark_rotation = nullptr);

// closed-form prefactors for the Fourier basis at detuning ratio epsilon
SecularWeights closed_form_weights(double N, double epsilon);

}  // namespace vpme

#endif
