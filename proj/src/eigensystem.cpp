#include "vpme/eigensystem.hpp"

#include <cmath>
#include <vector>

#include "vpme/params.hpp"

namespace vpme {

using cd = std::complex<double>;

const char* level_name(int level) {
    switch (level) {
        case plus: return "plus";
        case minus: return "minus";
        case dark: return "dark";
        case ground: return "ground";
    }
    return "?";
}

cd DarkBasis::amp(int i, Label a) const {
    if (i < 0 || i >= N) throw EigensystemError("molecule index out of range");
    switch (a.kind) {
        case Label::plus: return u_plus;
        case Label::minus: return u_minus;
        case Label::dark:
            if (a.d < 1 || a.d > N - 1) throw EigensystemError("dark label out of range");
            return u(i, a.d - 1);
    }
    throw EigensystemError("invalid label");
}

DarkBasis dark_basis(int N, double epsilon) {
    if (N < 2) throw EigensystemError("dark basis needs N >= 2");
    if (!(std::abs(epsilon) < 1.0)) throw EigensystemError("detuning ratio must satisfy |epsilon| < 1");
    DarkBasis b;
    b.N = N;
    b.u.resize(N, N - 1);
    const double norm = 1.0 / std::sqrt(double(N));
    for (int i = 0; i < N; ++i)
        for (int d = 1; d < N; ++d) {
            // reduce i d mod N first so the phase stays exact for large N
            const double ph = 2.0 * pi * double((long long)i * d % N) / double(N);
            b.u(i, d - 1) = norm * cd(std::cos(ph), std::sin(ph));
        }
    b.u_plus = std::sqrt((1.0 + epsilon) / (2.0 * N));
    b.u_minus = -std::sqrt((1.0 - epsilon) / (2.0 * N));
    return b;
}

cd coefficient_c(const DarkBasis& b, Label a, Label bb, Label c, Label d) {
    cd s = 0;
    for (int i = 0; i < b.N; ++i) s += b.amp(i, a) * std::conj(b.amp(i, bb)) * b.amp(i, c) * std::conj(b.amp(i, d));
    return s;
}

cd coefficient_p(const DarkBasis& b, Label a, Label bb, int sign) {
    cd s = 0;
    for (int i = 0; i < b.N; ++i) s += b.amp(i, a) * (sign > 0 ? std::conj(b.amp(i, bb)) : b.amp(i, bb));
    return s;
}

cd coefficient_v(const DarkBasis& b, Label a, Label bb, Label c, int kind) {
    if (kind != 1 && kind != 2) throw EigensystemError("coefficient_v kind must be 1 or 2");
    cd s = 0;
    for (int i = 0; i < b.N; ++i) {
        const cd uc = b.amp(i, c);
        s += b.amp(i, a) * std::conj(b.amp(i, bb)) * (kind == 1 ? uc : std::conj(uc));
    }
    return s;
}

NonResonantEigensystem nonres_eigensystem(double N, double omega_c, double delta, double omega_r) {
    if (!(N >= 2)) throw EigensystemError("non-resonant eigensystem needs N >= 2");
    if (!(omega_r > 0)) throw EigensystemError("non-resonant eigensystem needs omega_r > 0");
    NonResonantEigensystem e;
    e.N = N;
    e.theta = std::hypot(delta, 2.0 * omega_r);
    e.epsilon = delta / e.theta;
    e.U_plus = std::sqrt((1.0 + e.epsilon) / (2.0 * N));
    e.U_minus = -std::sqrt((1.0 - e.epsilon) / (2.0 * N));
    const double wm = omega_c + delta;
    e.omega_plus = 0.5 * (wm + omega_c + e.theta);
    e.omega_minus = 0.5 * (wm + omega_c - e.theta);
    e.omega_dark = wm;
    return e;
}

namespace {

// index 0 is the photon state |G,1>, index 1 + i the exciton |e_i,0>
struct SingleExcitation {
    int N;
    Eigen::VectorXcd plus, minus, dark, dark2;
    double e_plus, e_minus, e_dark;
};

SingleExcitation diagonalise(int N, double delta, double omega_r, const Eigen::MatrixXcd* rotation) {
    const int dim = N + 1;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
    const double gr = omega_r / std::sqrt(double(N));
    for (int i = 1; i <= N; ++i) {
        H(i, i) = delta;
        H(0, i) = H(i, 0) = gr;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    if (es.info() != Eigen::Success) throw EigensystemError("diagonalisation failed");
    SingleExcitation s;
    s.N = N;
    // the polaritons bracket the degenerate dark level
    Eigen::VectorXd vp = es.eigenvectors().col(dim - 1), vm = es.eigenvectors().col(0);
    if (vp(0) < 0) vp = -vp;
    if (vm(0) < 0) vm = -vm;
    s.plus = vp.cast<cd>();
    s.minus = vm.cast<cd>();
    s.e_plus = es.eigenvalues()(dim - 1);
    s.e_minus = es.eigenvalues()(0);

    DarkBasis b = dark_basis(N);
    Eigen::MatrixXcd u = b.u;
    if (rotation) {
        if (rotation->rows() != N - 1 || rotation->cols() != N - 1)
            throw EigensystemError("dark rotation must be (N-1) x (N-1)");
        u = u * (*rotation);
    }
    auto embed = [&](int col) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
        v.tail(N) = u.col(col);
        return v;
    };
    s.dark = embed(0);
    s.dark2 = N > 2 ? embed(1) : Eigen::VectorXcd();
    s.e_dark = delta;
    // the Fourier columns must be exact eigenvectors of H
    for (int c = 0; c < N - 1; ++c) {
        Eigen::VectorXcd v = embed(c);
        const double res = (H.cast<cd>() * v - delta * v).norm();
        if (res > 1e-10 * (std::abs(delta) + omega_r + 1e-300))
            throw EigensystemError("dark column is not an eigenvector");
    }
    return s;
}

// <to| n_i |from>
cd n_elem(const Eigen::VectorXcd& to, const Eigen::VectorXcd& from, int i) {
    return std::conj(to(1 + i)) * from(1 + i);
}
// <to| sigma_i^+ a |from>: photon -> exciton i
cd raise_elem(const Eigen::VectorXcd& to, const Eigen::VectorXcd& from, int i) {
    return std::conj(to(1 + i)) * from(0);
}
// <to| a^dag sigma_i^- |from>: exciton i -> photon
cd lower_elem(const Eigen::VectorXcd& to, const Eigen::VectorXcd& from, int i) {
    return std::conj(to(0)) * from(1 + i);
}

TransitionWeights transition_weights(const Eigen::VectorXcd& from, const Eigen::VectorXcd& to, int N) {
    TransitionWeights w;
    for (int i = 0; i < N; ++i) {
        w.single += std::norm(n_elem(to, from, i));
        const cd a = raise_elem(to, from, i), b = lower_elem(to, from, i);
        w.even += std::norm(a + b);
        w.odd += std::norm(a - b);
    }
    w.even /= double(N);
    w.odd /= double(N);
    return w;
}

void add(TransitionWeights& acc, const TransitionWeights& w) {
    acc.single += w.single;
    acc.even += w.even;
    acc.odd += w.odd;
}

}  // namespace

SecularWeights bruteforce_weights(int N, double delta, double omega_r, const Eigen::MatrixXcd* dark_rotation) {
    if (N < 2 || N > 8) throw EigensystemError("brute-force oracle supports 2 <= N <= 8");
    const SingleExcitation s = diagonalise(N, delta, omega_r, dark_rotation);
    SecularWeights w;
    w.N = N;
    w.epsilon = delta / std::hypot(delta, 2.0 * omega_r);
    w.energy = {s.e_plus, s.e_minus, s.e_dark, 0.0};

    // states of the single-excitation manifold; the ground state has no matrix elements
    const Eigen::VectorXcd* st[3] = {&s.plus, &s.minus, &s.dark};
    for (int f = 0; f < 3; ++f)
        for (int t = 0; t < 3; ++t) {
            if (f == t && f != dark) continue;
            if (f == dark && t == dark) {
                if (N > 2) w.transition[dark][dark] = transition_weights(*st[f], s.dark2, N);
                continue;
            }
            w.transition[f][t] = transition_weights(*st[f], *st[t], N);
        }

    // diagonal elements <mu|n_i|mu> and <mu|(sigma^+ a + a^dag sigma^-)|mu>
    auto pops = [&](const Eigen::VectorXcd* v, std::vector<double>& n, std::vector<double>& x) {
        n.assign(N, 0.0);
        x.assign(N, 0.0);
        if (!v) return;
        for (int i = 0; i < N; ++i) {
            n[i] = n_elem(*v, *v, i).real();
            x[i] = (raise_elem(*v, *v, i) + lower_elem(*v, *v, i)).real();
        }
    };
    std::array<std::vector<double>, n_levels> nd, xd;
    pops(&s.plus, nd[plus], xd[plus]);
    pops(&s.minus, nd[minus], xd[minus]);
    pops(&s.dark, nd[dark], xd[dark]);
    pops(nullptr, nd[ground], xd[ground]);
    std::vector<double> nd2, xd2;
    pops(N > 2 ? &s.dark2 : nullptr, nd2, xd2);

    auto deph = [&](const std::vector<double>& n1, const std::vector<double>& x1, const std::vector<double>& n2,
                    const std::vector<double>& x2) {
        DephasingWeights d;
        for (int i = 0; i < N; ++i) {
            d.single += 0.5 * (n1[i] - n2[i]) * (n1[i] - n2[i]);
            d.multi += 0.5 * (x1[i] - x2[i]) * (x1[i] - x2[i]);
        }
        return d;
    };
    for (int a = 0; a < n_levels; ++a)
        for (int b = 0; b < n_levels; ++b) {
            if (a == b && a != dark) continue;
            if (a == dark && b == dark) {
                if (N > 2) w.dephasing[dark][dark] = deph(nd[dark], xd[dark], nd2, xd2);
                continue;
            }
            w.dephasing[a][b] = deph(nd[a], xd[a], nd[b], xd[b]);
        }
    for (int a = 0; a < n_levels; ++a)
        for (int i = 0; i < N; ++i) {
            w.self[a].single += nd[a][i] * nd[a][i];
            w.self[a].multi += xd[a][i] * xd[a][i];
        }

    // aggregates over every dark column
    DarkBasis b = dark_basis(N);
    Eigen::MatrixXcd u = b.u;
    if (dark_rotation) u = u * (*dark_rotation);
    for (int c = 0; c < N - 1; ++c) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(N + 1);
        v.tail(N) = u.col(c);
        add(w.to_dark_total[plus], transition_weights(s.plus, v, N));
        add(w.to_dark_total[minus], transition_weights(s.minus, v, N));
        add(w.from_dark_total[plus], transition_weights(v, s.plus, N));
        add(w.from_dark_total[minus], transition_weights(v, s.minus, N));
        if (c > 0) add(w.dark_dark_total, transition_weights(s.dark, v, N));
    }
    return w;
}

SecularWeights closed_form_weights(double N, double eps) {
    if (!(N >= 2)) throw EigensystemError("closed-form weights need N >= 2");
    if (!(std::abs(eps) < 1.0)) throw EigensystemError("detuning ratio must satisfy |epsilon| < 1");
    SecularWeights w;
    w.N = N;
    w.epsilon = eps;
    const double q = 1.0 / (4.0 * N), h = 1.0 / (2.0 * N);
    // polariton <-> polariton: {1 - e^2, 4 e^2, 4} / (4N)
    const TransitionWeights pp{(1.0 - eps * eps) * q, 4.0 * eps * eps * q, 4.0 * q};
    w.transition[plus][minus] = w.transition[minus][plus] = pp;
    // polariton <-> dark: {1 +- e, 1 -+ e, 1 -+ e} / (2N)
    const TransitionWeights pd{(1.0 + eps) * h, (1.0 - eps) * h, (1.0 - eps) * h};
    const TransitionWeights md{(1.0 - eps) * h, (1.0 + eps) * h, (1.0 + eps) * h};
    w.transition[plus][dark] = w.transition[dark][plus] = pd;
    w.transition[minus][dark] = w.transition[dark][minus] = md;
    if (N > 2.0) w.transition[dark][dark] = {1.0 / N, 0.0, 0.0};

    auto sym = [&](int a, int b, DephasingWeights d) { w.dephasing[a][b] = w.dephasing[b][a] = d; };
    const double m2 = 1.0 - eps * eps;
    sym(plus, minus, {eps * eps / (2.0 * N), 2.0 * m2});
    sym(plus, ground, {(1.0 + eps) * (1.0 + eps) / (8.0 * N), 0.5 * m2});
    sym(minus, ground, {(1.0 - eps) * (1.0 - eps) / (8.0 * N), 0.5 * m2});
    sym(plus, dark, {(1.0 - eps) * (1.0 - eps) / (8.0 * N), 0.5 * m2});
    sym(minus, dark, {(1.0 + eps) * (1.0 + eps) / (8.0 * N), 0.5 * m2});
    sym(dark, ground, {1.0 / (2.0 * N), 0.0});
    w.dephasing[dark][dark] = {0.0, 0.0};

    w.self[plus] = {(1.0 + eps) * (1.0 + eps) * q, m2};
    w.self[minus] = {(1.0 - eps) * (1.0 - eps) * q, m2};
    w.self[dark] = {1.0 / N, 0.0};
    w.self[ground] = {0.0, 0.0};

    auto scaled = [&](const TransitionWeights& t, double k) { return TransitionWeights{k * t.single, k * t.even, k * t.odd}; };
    w.to_dark_total[plus] = w.from_dark_total[plus] = scaled(pd, N - 1.0);
    w.to_dark_total[minus] = w.from_dark_total[minus] = scaled(md, N - 1.0);
    w.dark_dark_total = {(N - 2.0) / N, 0.0, 0.0};
    return w;
}

}  // namespace vpme
