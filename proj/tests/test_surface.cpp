#include "doctest.h"

#include "rotodop/surface.hpp"

#include <cmath>
#include <complex>

using namespace rotodop;

TEST_CASE("metasurface couples exactly one OAM shift") {
    SurfaceModel m = Metasurface{2};
    CHECK(scatter_coeff(m, 3, 0, 1, 0) == Complex(-1.0, 0.0));
    CHECK(scatter_coeff(m, 2, 0, 1, 0) == Complex(0.0, 0.0));
    CHECK(scatter_coeff(m, 3, 1, 1, 0) == Complex(0.0, 0.0));
    CHECK_THROWS_AS(validate(SurfaceModel{Metasurface{0}}), std::domain_error);
    CHECK_THROWS_AS(scatter_coeff(m, 0, -1, 0, 0), std::domain_error);
}

TEST_CASE("rough surface at epsilon = 0 is a perfect mirror") {
    SurfaceModel m = RoughGaussian{0.0, 1.0, 1.0};
    CHECK(std::abs(scatter_coeff(m, 2, 1, 2, 1) - Complex(-1.0, 0.0)) < 1e-15);
    CHECK(std::abs(scatter_coeff(m, 3, 1, 2, 1)) < 1e-15);
    CHECK(column_norm_check(m, 0, 0, 8, 8) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("rough diffuse magnitude matches the displayed profile") {
    SurfaceModel m = RoughGaussian{0.1, 1.0, 1.0};
    const double nrm = normalization(1.0, 1.0);
    const Complex c = scatter_coeff(m, 1, 0, 0, 0);  // dl = 1, dp = 0
    CHECK(std::abs(c) == doctest::Approx(0.1 * std::exp(-0.25) / nrm).epsilon(1e-14));
    // on the diagonal the imaginary specular piece cancels the diffuse one
    const Complex diag = scatter_coeff(m, 0, 0, 0, 0);
    CHECK(diag.real() == doctest::Approx(-std::sqrt(1.0 - 0.01)).epsilon(1e-14));
    CHECK(std::abs(diag.imag()) < 1e-15);
}

TEST_CASE("normalization constant against the lattice-sum identity") {
    // each theta_3 factor is a one-axis Gaussian lattice sum by Poisson summation
    for (double sig : {0.5, 1.0, 2.0}) {
        const double expected = gaussian_lattice_sum(sig) - 1.0;
        const double fl = std::sqrt(2.0 * kPi) * sig *
            jacobi_theta3(kPi, std::exp(-2.0 * kPi * kPi * sig * sig)) - 1.0;
        CHECK(fl == doctest::Approx(expected).epsilon(1e-13));
    }
    CHECK(std::pow(normalization(1.0, 1.0), 2) == doctest::Approx(2.2699288).epsilon(1e-6));
    // equal widths make the square of a single factor
    const double n2 = std::pow(normalization(0.7, 0.7), 2);
    CHECK(n2 == doctest::Approx(std::pow(gaussian_lattice_sum(0.7) - 1.0, 2)).epsilon(1e-13));
    // wide-surface limit: theta3 -> 1
    const double big = 40.0;
    CHECK(std::pow(normalization(big, big), 2) ==
          doctest::Approx(std::pow(std::sqrt(2.0 * kPi) * big - 1.0, 2)).epsilon(1e-12));
    CHECK_THROWS_AS(normalization(0.0, 1.0), std::domain_error);
}

TEST_CASE("column sums: windowed result equals the analytic lattice value") {
    for (double eps : {0.05, 0.1, 0.2}) {
        for (double sig : {0.5, 1.0, 2.0}) {
            RoughGaussian rough{eps, sig, sig};
            SurfaceModel m = rough;
            for (int p_in : {0, 3}) {
                const int win = 10 * static_cast<int>(std::ceil(sig)) + 2;
                const double sum = column_norm_check(m, 0, p_in, win, win + p_in);
                CHECK(sum == doctest::Approx(rough_column_norm_expected(rough, p_in)).epsilon(1e-10));
            }
        }
    }
    // metasurface columns are exactly one unit entry
    CHECK(column_norm_check(SurfaceModel{Metasurface{-2}}, 1, 1, 4, 2) == doctest::Approx(1.0));
}

TEST_CASE("the displayed normalization leaves an O(eps^2) column-norm excess") {
    // sum_{(dl,dp) != 0} g(dl) g(dp) = S_l S_p - 1, while N^2 = (S_l - 1)(S_p - 1);
    // the mismatch is a property of the model constants, not of the truncation.
    RoughGaussian rough{0.1, 1.0, 1.0};
    const double sum = column_norm_check(SurfaceModel{rough}, 0, 5, 14, 16);
    const double s = gaussian_lattice_sum(1.0);
    const double kappa = (s * s - 1.0) / ((s - 1.0) * (s - 1.0)) - 1.0;
    CHECK(sum == doctest::Approx(1.0 + 0.01 * kappa).epsilon(1e-6));
    CHECK(std::abs(sum - 1.0) > 1e-3);  // not unit-normalized
}

TEST_CASE("window-too-small raises") {
    SurfaceModel m = RoughGaussian{0.1, 2.0, 2.0};
    CHECK_THROWS_AS(column_norm_check(m, 0, 0, 3, 3), std::invalid_argument);
    CHECK_THROWS_AS(column_norm_check(SurfaceModel{Metasurface{4}}, 0, 0, 2, 0),
                    std::invalid_argument);
}

TEST_CASE("seeded phase tables are antisymmetric and leave magnitudes alone") {
    RoughGaussian zero{0.15, 1.2, 0.8};
    RoughGaussian seeded = zero;
    seeded.phases = PhaseTable::seeded(42);
    for (int lo = -3; lo <= 3; ++lo)
        for (int po = 0; po <= 2; ++po)
            for (int li = -3; li <= 3; ++li)
                for (int pi = 0; pi <= 2; ++pi) {
                    const double th = seeded.phases.theta(lo, po, li, pi);
                    CHECK(th == -seeded.phases.theta(li, pi, lo, po));
                    const Complex a = scatter_coeff(SurfaceModel{seeded}, lo, po, li, pi);
                    const Complex b = scatter_coeff(SurfaceModel{zero}, lo, po, li, pi);
                    if (lo != li || po != pi) CHECK(std::abs(a) == doctest::Approx(std::abs(b)));
                }
    // different off-diagonal pairs do get nontrivial phases
    CHECK(std::abs(seeded.phases.theta(1, 0, 0, 0)) > 1e-3);
}

TEST_CASE("epsilon -> 0 continuity is linear") {
    for (double eps : {0.2, 0.1, 0.05, 0.01}) {
        SurfaceModel m = RoughGaussian{eps, 1.0, 1.0};
        SurfaceModel mirror = RoughGaussian{0.0, 1.0, 1.0};
        for (int lo : {0, 1, 3})
            for (int li : {0, 1}) {
                const double gap = std::abs(scatter_coeff(m, lo, 0, li, 0) -
                                            scatter_coeff(mirror, lo, 0, li, 0));
                CHECK(gap <= 1.1 * eps);
            }
    }
}

TEST_CASE("surface model validation") {
    CHECK_THROWS_AS(validate(SurfaceModel{RoughGaussian{-0.1, 1.0, 1.0}}), std::domain_error);
    CHECK_THROWS_AS(validate(SurfaceModel{RoughGaussian{1.0, 1.0, 1.0}}), std::domain_error);
    CHECK_THROWS_AS(validate(SurfaceModel{RoughGaussian{0.1, 0.0, 1.0}}), std::domain_error);
}

// --------------------------- height-field oracle ----------------------------

namespace {
const LGGeometry kGeom{1.0e-3, 1064e-9, 1.0};
const double kWavenumber = kGeom.wavenumber();
}  // namespace

TEST_CASE("constant height only shifts the diagonal phase") {
    const double h0 = 2e-9;
    HeightField field{[h0](double, double) { return h0; }, h0, "constant offset"};
    for (auto [lo, po, li, pi] : {std::tuple{0, 0, 0, 0}, {2, 1, 2, 1}}) {
        const auto c = height_field_coeffs(field, kGeom, kWavenumber, lo, po, li, pi);
        CHECK(c.weak_scattering_ok);
        CHECK(std::abs(c.value - Complex(-1.0, -2.0 * kWavenumber * h0)) < 1e-10);
    }
    const auto off = height_field_coeffs(field, kGeom, kWavenumber, 1, 0, 0, 0);
    CHECK(std::abs(off.value) < 1e-10);
    const auto offp = height_field_coeffs(field, kGeom, kWavenumber, 0, 1, 0, 0);
    CHECK(std::abs(offp.value) < 1e-10);
}

TEST_CASE("rotationally symmetric height couples no OAM change") {
    const double w = kGeom.w0;
    HeightField field{[w](double r, double) { return 3e-9 * std::exp(-r * r / (w * w)); },
                      3e-9, "radial bump"};
    for (int dl : {1, 2, -1}) {
        const auto c = height_field_coeffs(field, kGeom, kWavenumber, dl, 0, 0, 0);
        CHECK(std::abs(c.value) < 1e-8);
    }
    // but it does couple radial indices
    const auto rad = height_field_coeffs(field, kGeom, kWavenumber, 0, 1, 0, 0);
    CHECK(std::abs(rad.value) > 1e-6);
}

TEST_CASE("cos(phi) ripple couples |dl| = 1 only") {
    HeightField field{[](double, double phi) { return 1.5e-9 * std::cos(phi); },
                      1.5e-9 / std::sqrt(2.0), "single azimuthal ripple"};
    double strongest = 0.0;
    for (int dl = -3; dl <= 3; ++dl) {
        const auto c = height_field_coeffs(field, kGeom, kWavenumber, dl, 0, 0, 0);
        Complex coupling = c.value;
        if (dl == 0) coupling -= Complex(-1.0, 0.0);
        if (std::abs(dl) == 1) {
            CHECK(std::abs(coupling) > 1e-8);
            strongest = std::max(strongest, std::abs(coupling));
        } else {
            CHECK(std::abs(coupling) < 1e-8);
        }
    }
    CHECK(strongest > 1e-6);
}

TEST_CASE("height operator matrix elements are hermitian") {
    HeightField field{[](double r, double phi) {
                          return 1e-9 * (std::cos(phi) + 0.4 * std::sin(2 * phi)) *
                              std::exp(-r * r / (2.0 * kGeom.w0 * kGeom.w0));
                      },
                      1e-9, "mixed ripple"};
    for (auto [lo, po, li, pi] : {std::tuple{1, 0, 0, 0}, {2, 1, 0, 0}, {1, 1, 2, 0}}) {
        const auto ab = height_field_coeffs(field, kGeom, kWavenumber, lo, po, li, pi);
        const auto ba = height_field_coeffs(field, kGeom, kWavenumber, li, pi, lo, po);
        // strip the specular delta and the -2ik factor to recover <out| h |in>
        auto strip = [&](Complex c, bool diag) {
            if (diag) c -= Complex(-1.0, 0.0);
            return c / Complex(0.0, -2.0 * kWavenumber);
        };
        const Complex hab = strip(ab.value, lo == li && po == pi);
        const Complex hba = strip(ba.value, lo == li && po == pi);
        CHECK(std::abs(hab - std::conj(hba)) <= 1e-8 * std::max(1.0, std::abs(hab)));
    }
}

TEST_CASE("weak-scattering validity flag and strict mode") {
    HeightField tall{[](double, double phi) { return 1e-7 * std::cos(phi); }, 1e-7, "too tall"};
    const auto c = height_field_coeffs(tall, kGeom, kWavenumber, 1, 0, 0, 0);
    CHECK_FALSE(c.weak_scattering_ok);
    HeightFieldOptions strict;
    strict.strict_validity = true;
    CHECK_THROWS_AS(height_field_coeffs(tall, kGeom, kWavenumber, 1, 0, 0, 0, strict),
                    std::domain_error);
}

TEST_CASE("sampled grids reproduce the functional field") {
    const int nr = 220, nphi = 256;
    std::vector<double> r_axis(nr), phi_axis(nphi);
    for (int i = 0; i < nr; ++i) r_axis[i] = 6.0 * kGeom.w0 * i / (nr - 1);
    for (int j = 0; j < nphi; ++j) phi_axis[j] = 2.0 * kPi * j / nphi;
    std::vector<std::vector<double>> values(nr, std::vector<double>(nphi));
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nphi; ++j) values[i][j] = 1.5e-9 * std::cos(phi_axis[j]);
    const auto grid = height_field_from_grid(r_axis, phi_axis, values, 1.5e-9 / std::sqrt(2.0));
    HeightField exact{[](double, double phi) { return 1.5e-9 * std::cos(phi); }, 1e-9, ""};
    const auto a = height_field_coeffs(grid, kGeom, kWavenumber, 1, 0, 0, 0);
    const auto b = height_field_coeffs(exact, kGeom, kWavenumber, 1, 0, 0, 0);
    CHECK(std::abs(a.value - b.value) < 1e-4 * std::abs(b.value));
}
