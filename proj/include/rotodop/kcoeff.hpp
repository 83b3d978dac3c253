// kcoeff.hpp — basis-change coefficients K_{m;n}(beta) between temporal
// Hermite-Gauss families whose carriers differ by beta * sigma, in closed form
// and by an independent quadrature oracle.

#pragma once

#include "rotodop/modes.hpp"
#include "rotodop/numerics.hpp"

#include <complex>

namespace rotodop {

// Closed form of the overlap between Hermite-Gauss packets at shifted carriers.
// This is the number-basis matrix element of a displacement by -i*beta:
//   K_{m;n}(beta) = (-i)^{|n-m|} sqrt(q!/Q!) beta^{|n-m|} e^{-beta^2/2} L_q^{|n-m|}(beta^2),
// with q = min(m,n), Q = max(m,n). The Laguerre index q and the overall
// normalization are fixed by K(0) = identity and by unitarity of the full
// matrix; both are enforced against k_oracle in the test suite. The matrix is
// symmetric, K_{m;n} = K_{n;m}, which also fixes the m > n triangle.
inline Complex k_coefficient(int m, int n, double beta) {
    if (m < 0 || n < 0) throw std::domain_error("k_coefficient: negative index");
    const int q = std::min(m, n);
    const int d = std::abs(n - m);
    if (d == 0 && beta == 0.0) return {1.0, 0.0};
    const double mag = sqrt_factorial_ratio(q, q + d) * std::pow(beta, d) *
        std::exp(-0.5 * beta * beta) * assoc_laguerre(q, d, beta * beta);
    // (-i)^d
    static const Complex phases[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    return phases[d % 4] * mag;
}

struct KOracleResult {
    Complex value{0.0, 0.0};
    double quad_error = 0.0;
};

namespace detail {

// Direct time-domain overlap of the two packets on a Gauss-Hermite grid in
// x = sigma (t - tau0) / sqrt(2). Both envelopes together supply the e^{-x^2}
// weight, which is divided back out for the quadrature rule.
inline Complex k_overlap_gh(int m, int n, const BasisParams& in_basis,
                            const BasisParams& out_basis, int order) {
    const QuadRule rule = gauss_hermite(order);
    const double s2_over_sigma = std::sqrt(2.0) / in_basis.sigma;
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = rule.nodes[i];
        const double t = in_basis.tau0 + s2_over_sigma * x;
        const Complex f = hg_temporal(n, t, in_basis) * std::conj(hg_temporal(m, t, out_basis));
        acc += rule.weights[i] * f * std::exp(x * x);
    }
    return acc * s2_over_sigma;
}

}  // namespace detail

// Quadrature oracle: the time-domain overlap of Phi_n at carrier omega_in with
// the conjugate of Phi_m at carrier omega_out, with the reference phase choice
// theta_out = (omega_in - omega_out) * tau0 + theta_in that removes the
// carrier-offset phase. Gauss-Hermite order grows with n+m; convergence is
// declared when two successive orders agree.
inline KOracleResult k_oracle(int m, int n, double omega_in, double omega_out,
                              const BasisParams& basis) {
    if (m < 0 || n < 0) throw std::domain_error("k_oracle: negative index");
    basis.validate();
    BasisParams in_basis = basis;
    in_basis.omega0 = omega_in;
    BasisParams out_basis = basis;
    out_basis.omega0 = omega_out;
    out_basis.theta0 = (omega_in - omega_out) * basis.tau0 + basis.theta0;

    const int order = std::max(64, 2 * (n + m) + 40);
    const Complex a = detail::k_overlap_gh(m, n, in_basis, out_basis, order);
    const Complex b = detail::k_overlap_gh(m, n, in_basis, out_basis, order + 24);
    const double err = std::abs(a - b);
    if (err > 1e-9) throw std::runtime_error("k_oracle: quadrature did not converge");
    return {b, err};
}

}  // namespace rotodop
