// modes.hpp — beam mode labels, spatial Laguerre-Gauss profiles, temporal
// Hermite-Gauss packets, and paraxial-validity diagnostics.

#pragma once

#include "rotodop/numerics.hpp"

#include <compare>
#include <cstdint>
#include <string>

namespace rotodop {

// Discrete label {n, l, p} of a temporal-HG x spatial-LG mode. Ordered
// lexicographically so mode sets map deterministically to vector indices.
struct ModeIndex {
    int n = 0;  // temporal Hermite-Gauss index, n >= 0
    int l = 0;  // orbital angular momentum
    int p = 0;  // radial Laguerre-Gauss index, p >= 0

    friend auto operator<=>(const ModeIndex&, const ModeIndex&) = default;
};

inline void validate(const ModeIndex& m) {
    if (m.n < 0 || m.p < 0) throw std::domain_error("ModeIndex: n and p must be non-negative");
}

inline std::string to_string(const ModeIndex& m) {
    return "(" + std::to_string(m.n) + "," + std::to_string(m.l) + "," + std::to_string(m.p) + ")";
}

// Temporal-basis parameters: carrier, time center, global phase, frequency width.
struct BasisParams {
    double omega0 = 0.0;  // rad/s
    double tau0 = 0.0;    // s
    double theta0 = 0.0;  // rad
    double sigma = 1.0;   // rad/s

    void validate() const {
        if (!(sigma > 0.0)) throw std::domain_error("BasisParams: sigma must be > 0");
        if (!(omega0 > 0.0)) throw std::domain_error("BasisParams: omega0 must be > 0");
    }
};

struct LGGeometry {
    double w0 = 1e-3;              // waist radius, m
    double wavelength = 1064e-9;   // m
    double refractive_index = 1.0;

    void validate() const {
        if (!(w0 > 0.0) || !(wavelength > 0.0) || !(refractive_index > 0.0))
            throw std::domain_error("LGGeometry: w0, wavelength, n must be > 0");
    }
    double rayleigh_range() const { return kPi * w0 * w0 * refractive_index / wavelength; }
    double wavenumber() const { return 2.0 * kPi * refractive_index / wavelength; }
    double waist_at(double z) const {
        const double zr = rayleigh_range();
        return w0 * std::sqrt(1.0 + (z / zr) * (z / zr));
    }
};

// Radial LG profile at the waist in the scaled variable t = 2 r^2 / w^2,
// without the Gaussian envelope: C_lp * t^{|l|/2} * L_p^{|l|}(t).
// u(z=0) = profile * e^{-t/2} * e^{-i l phi} / w0.
inline double lg_waist_profile(int l, int p, double t) {
    if (p < 0) throw std::domain_error("lg_waist_profile: p < 0");
    const int al = std::abs(l);
    const double norm = std::sqrt(2.0 / kPi) *
        std::exp(0.5 * (std::lgamma(p + 1.0) - std::lgamma(p + al + 1.0)));
    return norm * std::pow(t, 0.5 * al) * assoc_laguerre(p, al, t);
}

// Full LG mode u_{l,p}(r, phi, z): azimuthal phase e^{-il phi}, wavefront
// curvature, and Gouy phase (N+1) atan(z/z_R).
inline Complex lg_mode(int l, int p, double r, double phi, double z, const LGGeometry& geom) {
    if (p < 0) throw std::domain_error("lg_mode: p < 0");
    if (r < 0.0) throw std::domain_error("lg_mode: r < 0");
    geom.validate();
    const double zr = geom.rayleigh_range();
    const double w = geom.waist_at(z);
    const double k = geom.wavenumber();
    const int al = std::abs(l);
    const int big_n = al + 2 * p;

    const double t = 2.0 * r * r / (w * w);
    const double norm = std::sqrt(2.0 / kPi) *
        std::exp(0.5 * (std::lgamma(p + 1.0) - std::lgamma(p + al + 1.0)));
    const double radial = norm / w * std::pow(t, 0.5 * al) * assoc_laguerre(p, al, t) *
        std::exp(-r * r / (w * w));

    // 1/R(z) = z / (z^2 + z_R^2); finite at the waist.
    const double inv_r = z / (z * z + zr * zr);
    const double phase = -0.5 * k * r * r * inv_r - l * phi + (big_n + 1) * std::atan2(z, zr);
    return radial * std::exp(Complex(0.0, phase));
}

// Temporal Hermite-Gauss packet Phi_n(t) = sqrt(sigma) 2^{-1/4} psi_n(x) e^{-i(omega0 t + theta0)},
// x = sigma (t - tau0) / sqrt(2); orthonormal under integration in time.
inline Complex hg_temporal(int n, double t, const BasisParams& basis) {
    if (n < 0) throw std::domain_error("hg_temporal: n < 0");
    basis.validate();
    const double x = basis.sigma * (t - basis.tau0) / std::sqrt(2.0);
    const double amp = std::sqrt(basis.sigma) * std::pow(2.0, -0.25) * hermite_psi(n, x);
    return amp * std::exp(Complex(0.0, -(basis.omega0 * t + basis.theta0)));
}

// --------------------------- paraxial diagnostics ---------------------------

struct ParaxialityReport {
    double epsilon_p = 0.0;     // ratio of the neglected d^2/dz^2 term
    bool paraxial = false;      // epsilon_p below the "much less than" threshold
    bool sufficient = false;    // |(omega/ck)^2 - 1| << 1/(k w0)^2 << 1
    bool hierarchy = false;     // 4 l Omega / omega << 1/(k z_R) << 1
};

// epsilon_P on the fundamental mode, with C(k) = (omega^2/c^2 - k^2) / (2k)
// measuring the mismatch between the carrier and the chosen axial wavenumber.
inline ParaxialityReport paraxiality_ratio(const LGGeometry& geom, double omega, double k,
                                           int l = 0, double capital_omega = 0.0,
                                           double much_less = 0.01) {
    if (!(k > 0.0) || !(geom.w0 > 0.0))
        throw std::domain_error("paraxiality_ratio: k and w0 must be > 0");
    const double w0 = geom.w0;
    const double c = kSpeedOfLight;
    const double ck = (omega / (c * k)) * (omega / (c * k));
    const double inv_kw2 = 1.0 / (k * k * w0 * w0);
    const double cap_c = (omega * omega / (c * c) - k * k) / (2.0 * k);

    ParaxialityReport rep;
    const double mean_h = cap_c - 1.0 / (k * w0 * w0);
    if (mean_h == 0.0) {
        rep.epsilon_p = std::numeric_limits<double>::infinity();
    } else {
        rep.epsilon_p = std::abs(inv_kw2 - cap_c * cap_c / (2.0 * k * mean_h));
    }
    rep.paraxial = rep.epsilon_p < much_less;
    rep.sufficient = std::abs(ck - 1.0) < much_less * inv_kw2 && inv_kw2 < much_less;

    const double zr = geom.rayleigh_range();
    const double inv_kzr = 1.0 / (k * zr);
    const bool left = capital_omega == 0.0 ||
        4.0 * std::abs(l) * capital_omega / omega < much_less * inv_kzr;
    rep.hierarchy = left && inv_kzr < much_less;
    return rep;
}

}  // namespace rotodop
