#include "doctest.h"

#include "rotodop/kcoeff.hpp"

#include <cmath>
#include <complex>

using namespace rotodop;

namespace {

const BasisParams kBasis{12.0, 0.35, 0.6, 1.0};

// closed form vs oracle with a floor for entries at the quadrature noise level
bool agrees(Complex closed, Complex oracle, double rel = 1e-8, double abs_floor = 1e-12) {
    const double gap = std::abs(closed - oracle);
    return gap <= rel * std::max(std::abs(closed), std::abs(oracle)) || gap <= abs_floor;
}

}  // namespace

TEST_CASE("k coefficient is the identity at beta = 0") {
    for (int n = 0; n <= 10; ++n) {
        CHECK(std::abs(k_coefficient(n, n, 0.0) - Complex(1.0, 0.0)) < 1e-15);
        for (int m = 0; m <= 10; ++m)
            if (m != n) CHECK(std::abs(k_coefficient(m, n, 0.0)) < 1e-15);
    }
}

TEST_CASE("closed form matches the quadrature oracle") {
    for (double beta : {0.0, 0.1, 0.5, 1.0, 3.0}) {
        const double omega_out = kBasis.omega0 - beta * kBasis.sigma;
        for (int n = 0; n <= 10; ++n) {
            for (int m = 0; m <= 10; ++m) {
                const auto or_ = k_oracle(m, n, kBasis.omega0, omega_out, kBasis);
                CHECK(or_.quad_error < 1e-10);
                const Complex cf = k_coefficient(m, n, beta);
                CHECK_MESSAGE(agrees(cf, or_.value),
                              "m=", m, " n=", n, " beta=", beta, " closed=", std::abs(cf),
                              " oracle=", std::abs(or_.value));
            }
        }
    }
}

TEST_CASE("spot check against the oracle at (n,m,beta) = (2,1,0.3)") {
    const double beta = 0.3;
    const auto oracle = k_oracle(1, 2, kBasis.omega0, kBasis.omega0 - beta * kBasis.sigma, kBasis);
    CHECK(std::abs(k_coefficient(1, 2, beta) - oracle.value) < 1e-10);
}

TEST_CASE("negative carrier offsets agree with the oracle too") {
    const double beta = -0.8;
    const double omega_out = kBasis.omega0 - beta * kBasis.sigma;
    for (int n = 0; n <= 6; ++n)
        for (int m = 0; m <= 6; ++m) {
            const auto oracle = k_oracle(m, n, kBasis.omega0, omega_out, kBasis);
            CHECK(agrees(k_coefficient(m, n, beta), oracle.value));
        }
}

TEST_CASE("matrix is symmetric in its indices") {
    for (double beta : {0.25, 1.3})
        for (int n = 0; n <= 8; ++n)
            for (int m = 0; m < n; ++m)
                CHECK(std::abs(k_coefficient(m, n, beta) - k_coefficient(n, m, beta)) < 1e-15);
}

TEST_CASE("parseval: every column has unit mass") {
    for (double beta : {0.1, 0.5, 1.0, 3.0}) {
        for (int n = 0; n <= 8; ++n) {
            double acc = 0.0;
            for (int m = 0; m <= n + 60; ++m) acc += std::norm(k_coefficient(m, n, beta));
            CHECK(std::abs(acc - 1.0) < 1e-8);
        }
    }
}

TEST_CASE("parseval holds on oracle values as well") {
    const double beta = 0.7;
    const double omega_out = kBasis.omega0 - beta * kBasis.sigma;
    for (int n = 0; n <= 3; ++n) {
        double acc = 0.0;
        for (int m = 0; m <= n + 24; ++m)
            acc += std::norm(k_oracle(m, n, kBasis.omega0, omega_out, kBasis).value);
        CHECK(std::abs(acc - 1.0) < 1e-8);
    }
}

TEST_CASE("oracle at equal carriers is the identity") {
    for (int n = 0; n <= 5; ++n)
        for (int m = 0; m <= 5; ++m) {
            const auto oracle = k_oracle(m, n, kBasis.omega0, kBasis.omega0, kBasis);
            CHECK(std::abs(oracle.value - (m == n ? 1.0 : 0.0)) < 1e-12);
        }
}

TEST_CASE("truncated K matrix is unitary up to the tail mass") {
    const double beta = 0.9;
    const int big_n = 24;
    Eigen::MatrixXcd k(big_n + 1, big_n + 1);
    for (int m = 0; m <= big_n; ++m)
        for (int n = 0; n <= big_n; ++n) k(m, n) = k_coefficient(m, n, beta);
    const Eigen::MatrixXcd gram = k.adjoint() * k;
    for (int n = 0; n <= 12; ++n) {
        double tail_n = 1.0;
        for (int m = 0; m <= big_n; ++m) tail_n -= std::norm(k(m, n));
        for (int np = 0; np <= 12; ++np) {
            double tail_np = 1.0;
            for (int m = 0; m <= big_n; ++m) tail_np -= std::norm(k(m, np));
            const double bound = std::sqrt(std::abs(tail_n)) * std::sqrt(std::abs(tail_np)) + 1e-8;
            const double gap = std::abs(gram(n, np) - (n == np ? 1.0 : 0.0));
            CHECK(gap <= bound + std::abs(tail_n) + std::abs(tail_np));
        }
    }
}

TEST_CASE("carrier derivative of the packets follows the ladder expansion") {
    // d/domega Phi_n = -i tau0 Phi_n - (i/sigma)(sqrt(n) Phi_{n-1} + sqrt(n+1) Phi_{n+1})
    BasisParams basis{40.0, 0.8, 0.15, 2.2};
    for (int n : {0, 1, 3}) {
        for (double t : {0.5, 0.81, 1.4}) {
            auto re = deriv_richardson(
                [&](double w) {
                    BasisParams b = basis;
                    b.omega0 = w;
                    return hg_temporal(n, t, b).real();
                },
                basis.omega0, 1e-3, 1e-12);
            auto im = deriv_richardson(
                [&](double w) {
                    BasisParams b = basis;
                    b.omega0 = w;
                    return hg_temporal(n, t, b).imag();
                },
                basis.omega0, 1e-3, 1e-12);
            Complex ladder = Complex(0.0, -basis.tau0) * hg_temporal(n, t, basis) +
                Complex(0.0, -std::sqrt(n + 1.0) / basis.sigma) * hg_temporal(n + 1, t, basis);
            if (n > 0)
                ladder += Complex(0.0, -std::sqrt(double(n)) / basis.sigma) *
                    hg_temporal(n - 1, t, basis);
            CHECK(std::abs(Complex(re.value, im.value) - ladder) < 1e-6);
        }
    }
}

TEST_CASE("carrier derivative of K at beta = 0 sits on the first off-diagonals") {
    // dK_{m;n}/dbeta|_0 = -i sqrt(n+1) on m = n+1 and -i sqrt(n) on m = n-1
    for (int n : {0, 1, 2, 5}) {
        for (int m = 0; m <= n + 2; ++m) {
            const auto d = deriv_richardson(
                [&](double b) { return k_coefficient(m, n, b).imag(); }, 0.0, 1e-3, 1e-12);
            double expected = 0.0;
            if (m == n + 1) expected = -std::sqrt(n + 1.0);
            if (m == n - 1) expected = -std::sqrt(double(n));
            CHECK(d.value == doctest::Approx(expected).epsilon(1e-8).scale(1.0));
            const auto dre = deriv_richardson(
                [&](double b) { return k_coefficient(m, n, b).real(); }, 0.0, 1e-3, 1e-12);
            CHECK(std::abs(dre.value) < 1e-8);
        }
    }
}

TEST_CASE("negative indices are rejected") {
    CHECK_THROWS_AS(k_coefficient(-1, 0, 0.1), std::domain_error);
    CHECK_THROWS_AS(k_oracle(0, -2, 10.0, 9.0, kBasis), std::domain_error);
}
