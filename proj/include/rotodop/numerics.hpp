// numerics.hpp — special functions, Gaussian quadrature rules, and the small
// optimization/differentiation helpers shared by the physics modules.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace rotodop {

using Complex = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

// exp(0.5*(ln q! - ln Q!)) without overflow; valid up to q,Q ~ 170 and beyond.
inline double sqrt_factorial_ratio(int q, int Q) {
    if (q < 0 || Q < 0) throw std::domain_error("sqrt_factorial_ratio: negative index");
    return std::exp(0.5 * (std::lgamma(q + 1.0) - std::lgamma(Q + 1.0)));
}

// Normalized Hermite functions psi_n(x) = H_n(x) e^{-x^2/2} / sqrt(2^n n! sqrt(pi)),
// orthonormal on the line. The scaled recurrence keeps every intermediate bounded.
inline std::vector<double> hermite_psi_all(int n_max, double x) {
    if (n_max < 0) throw std::domain_error("hermite_psi_all: n_max < 0");
    std::vector<double> psi(n_max + 1);
    psi[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
    if (n_max == 0) return psi;
    psi[1] = std::sqrt(2.0) * x * psi[0];
    for (int k = 1; k < n_max; ++k) {
        psi[k + 1] = x * std::sqrt(2.0 / (k + 1.0)) * psi[k]
                   - std::sqrt(k / (k + 1.0)) * psi[k - 1];
    }
    return psi;
}

inline double hermite_psi(int n, double x) {
    return hermite_psi_all(n, x)[n];
}

// Associated Laguerre L_p^a(x) by the three-term recurrence.
inline double assoc_laguerre(int p, int a, double x) {
    if (p < 0) throw std::domain_error("assoc_laguerre: p < 0");
    double lkm1 = 1.0;
    if (p == 0) return lkm1;
    double lk = 1.0 + a - x;
    for (int k = 1; k < p; ++k) {
        double lkp1 = ((2.0 * k + 1.0 + a - x) * lk - (k + a) * lkm1) / (k + 1.0);
        lkm1 = lk;
        lk = lkp1;
    }
    return lk;
}

struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

// Golub-Welsch: nodes/weights from the symmetric Jacobi matrix of the
// orthogonal-polynomial family. mu0 is the total weight-function mass.
inline QuadRule golub_welsch(const std::vector<double>& diag,
                             const std::vector<double>& offdiag, double mu0) {
    const int n = static_cast<int>(diag.size());
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) J(i, i) = diag[i];
    for (int i = 0; i + 1 < n; ++i) {
        J(i, i + 1) = offdiag[i];
        J(i + 1, i) = offdiag[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    if (es.info() != Eigen::Success) throw std::runtime_error("golub_welsch: eigensolver failed");
    QuadRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = es.eigenvalues()(i);
        const double q0 = es.eigenvectors()(0, i);
        rule.weights[i] = mu0 * q0 * q0;
    }
    return rule;
}

}  // namespace detail

// Gauss-Hermite: integrates f against e^{-x^2} on the line. Nodes come from
// the Jacobi-matrix eigenvalues; weights from the Christoffel function
// 1 / sum_k p_k(x_i)^2 over the orthonormal Hermite polynomials, which keeps
// full relative accuracy in the far tail where eigenvector components
// underflow. Valid up to order ~170 before the Christoffel sum overflows.
inline QuadRule gauss_hermite(int n) {
    if (n < 1) throw std::domain_error("gauss_hermite: order < 1");
    if (n > 170) throw std::domain_error("gauss_hermite: order too large for weight evaluation");
    std::vector<double> d(n, 0.0), e(n - 1);
    for (int k = 1; k < n; ++k) e[k - 1] = std::sqrt(k / 2.0);
    QuadRule rule = detail::golub_welsch(d, e, std::sqrt(kPi));
    for (int i = 0; i < n; ++i) {
        const double x = rule.nodes[i];
        // orthonormal Hermite polynomials p_k = H_k / sqrt(2^k k! sqrt(pi))
        double pkm1 = std::pow(kPi, -0.25);
        double pk = std::sqrt(2.0) * x * pkm1;
        double acc = pkm1 * pkm1;
        for (int k = 1; k < n; ++k) {
            acc += pk * pk;
            const double pkp1 = x * std::sqrt(2.0 / (k + 1.0)) * pk - std::sqrt(k / (k + 1.0)) * pkm1;
            pkm1 = pk;
            pk = pkp1;
        }
        rule.weights[i] = 1.0 / acc;
    }
    return rule;
}

// Gauss-Laguerre: integrates f against e^{-t} on [0, inf).
inline QuadRule gauss_laguerre(int n) {
    if (n < 1) throw std::domain_error("gauss_laguerre: order < 1");
    std::vector<double> d(n), e(n - 1);
    for (int k = 0; k < n; ++k) d[k] = 2.0 * k + 1.0;
    for (int k = 1; k < n; ++k) e[k - 1] = static_cast<double>(k);
    return detail::golub_welsch(d, e, 1.0);
}

// ---------------------------- scalar optimization ----------------------------

struct ScalarMax {
    double x = 0.0;
    double value = 0.0;
};

// Golden-section maximization of a unimodal f on [lo, hi]; deterministic,
// converges to an interval of width x_tol.
inline ScalarMax golden_section_max(const std::function<double(double)>& f,
                                    double lo, double hi, double x_tol) {
    if (!(hi >= lo)) throw std::invalid_argument("golden_section_max: bad bracket");
    const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > x_tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2; f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1; f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        }
    }
    const double xm = 0.5 * (a + b);
    return {xm, f(xm)};
}

// ------------------------- numerical differentiation -------------------------

struct DerivEstimate {
    double value = 0.0;
    double err = 0.0;  // from the last Richardson increment
};

// Central-difference first derivative with Richardson extrapolation.
inline DerivEstimate deriv_richardson(const std::function<double(double)>& f,
                                      double x0, double h0,
                                      double rel_target = 1e-10, int max_levels = 6) {
    std::vector<std::vector<double>> R;
    double h = h0;
    DerivEstimate best;
    best.err = std::numeric_limits<double>::infinity();
    for (int i = 0; i < max_levels; ++i) {
        std::vector<double> row(i + 1);
        row[0] = (f(x0 + h) - f(x0 - h)) / (2.0 * h);
        for (int j = 1; j <= i; ++j) {
            const double p = std::pow(4.0, j);
            row[j] = (p * row[j - 1] - R[i - 1][j - 1]) / (p - 1.0);
        }
        if (i > 0) {
            const double err = std::abs(row[i] - R[i - 1][i - 1]);
            if (err < best.err) best = {row[i], err};
            if (err <= rel_target * std::max(1.0, std::abs(row[i]))) {
                return {row[i], err};
            }
        }
        R.push_back(std::move(row));
        h *= 0.5;
    }
    return best;
}

inline double second_deriv_central(const std::function<double(double)>& f, double x0, double h) {
    return (f(x0 + h) - 2.0 * f(x0) + f(x0 - h)) / (h * h);
}

inline double rel_diff(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

}  // namespace rotodop
