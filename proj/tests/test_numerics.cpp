#include "doctest.h"

#include "rotodop/numerics.hpp"

#include <cmath>

using namespace rotodop;

TEST_CASE("gauss-hermite integrates low moments of e^{-x^2} exactly") {
    const auto rule = gauss_hermite(24);
    double m0 = 0.0, m2 = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = rule.nodes[i], w = rule.weights[i];
        m0 += w;
        m2 += w * x * x;
        m4 += w * x * x * x * x;
    }
    CHECK(m0 == doctest::Approx(std::sqrt(kPi)).epsilon(1e-13));
    CHECK(m2 == doctest::Approx(0.5 * std::sqrt(kPi)).epsilon(1e-13));
    CHECK(m4 == doctest::Approx(0.75 * std::sqrt(kPi)).epsilon(1e-13));
}

TEST_CASE("gauss-laguerre integrates e^{-t} t^k") {
    const auto rule = gauss_laguerre(32);
    double m1 = 0.0, m3 = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        m1 += rule.weights[i] * rule.nodes[i];
        m3 += rule.weights[i] * std::pow(rule.nodes[i], 3);
    }
    CHECK(m1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m3 == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("hermite functions are orthonormal under gauss-hermite") {
    const auto rule = gauss_hermite(64);
    for (int n = 0; n <= 12; ++n) {
        for (int m = 0; m <= n; ++m) {
            double acc = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const auto psi = hermite_psi_all(n, rule.nodes[i]);
                acc += rule.weights[i] * psi[n] * psi[m] * std::exp(rule.nodes[i] * rule.nodes[i]);
            }
            CHECK(acc == doctest::Approx(n == m ? 1.0 : 0.0).epsilon(1e-11).scale(1.0));
        }
    }
}

TEST_CASE("associated laguerre values") {
    // L_p^a(0) = binom(p+a, p)
    CHECK(assoc_laguerre(2, 1, 0.0) == doctest::Approx(3.0));
    CHECK(assoc_laguerre(3, 2, 0.0) == doctest::Approx(10.0));
    // L_1^a(x) = 1 + a - x
    CHECK(assoc_laguerre(1, 2, 0.7) == doctest::Approx(2.3));
    // L_2^0(x) = 1 - 2x + x^2/2
    CHECK(assoc_laguerre(2, 0, 1.5) == doctest::Approx(1.0 - 3.0 + 1.125));
}

TEST_CASE("golden section finds an interior maximum") {
    const auto best = golden_section_max([](double x) { return -(x - 2.0) * (x - 2.0); }, 0.0, 5.0, 1e-12);
    CHECK(best.x == doctest::Approx(2.0).epsilon(1e-9));
    const auto edge = golden_section_max([](double x) { return x; }, 0.0, 1.0, 1e-12);
    CHECK(edge.x == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("richardson derivative of sin") {
    const auto d = deriv_richardson([](double x) { return std::sin(x); }, 0.7, 1e-2);
    CHECK(d.value == doctest::Approx(std::cos(0.7)).epsilon(1e-12));
    CHECK(d.err < 1e-10);
}

TEST_CASE("sqrt factorial ratio stays finite for large indices") {
    CHECK(sqrt_factorial_ratio(0, 0) == doctest::Approx(1.0));
    CHECK(sqrt_factorial_ratio(3, 5) == doctest::Approx(std::sqrt(6.0 / 120.0)));
    CHECK(std::isfinite(sqrt_factorial_ratio(10, 170)));
}
