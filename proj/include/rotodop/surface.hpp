// surface.hpp — scattering coefficients c_{l',p';l,p} for the two rotating-
// surface models, plus a weak-scattering oracle that computes coefficients
// from an explicit height field by 2D quadrature.

#pragma once

#include "rotodop/modes.hpp"
#include "rotodop/numerics.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <tuple>
#include <variant>

namespace rotodop {

// ------------------------------ surface models ------------------------------

// Ideal reflector that shifts the OAM of the incident beam by a fixed amount.
struct Metasurface {
    int delta_l_star = 1;  // != 0; a rotationally symmetric mirror shows no effect

    void validate() const {
        if (delta_l_star == 0) throw std::domain_error("Metasurface: delta_l_star must be nonzero");
    }
};

// Antisymmetric phase table theta(out; in) = -theta(in; out) for the diffuse
// part. Either identically zero or generated pairwise from a seed, so the
// table is deterministic and independent of any truncation window.
class PhaseTable {
public:
    PhaseTable() = default;
    static PhaseTable zero() { return PhaseTable{}; }
    static PhaseTable seeded(std::uint64_t seed) {
        PhaseTable t;
        t.seed_ = seed;
        t.seeded_ = true;
        return t;
    }

    double theta(int l_out, int p_out, int l_in, int p_in) const {
        if (!seeded_) return 0.0;
        if (l_out == l_in && p_out == p_in) return 0.0;
        const bool swapped = std::tie(l_out, p_out) > std::tie(l_in, p_in);
        const double raw = swapped ? unit(l_in, p_in, l_out, p_out) : unit(l_out, p_out, l_in, p_in);
        const double th = kPi * (2.0 * raw - 1.0);
        return swapped ? -th : th;
    }

    bool is_seeded() const { return seeded_; }
    std::uint64_t seed() const { return seed_; }

private:
    // splitmix64 over the packed pair; uniform in [0,1)
    double unit(int a, int b, int c, int d) const {
        std::uint64_t z = seed_;
        for (int v : {a, b, c, d}) {
            z += 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(static_cast<std::uint32_t>(v));
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            z = z ^ (z >> 31);
        }
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    }

    std::uint64_t seed_ = 0;
    bool seeded_ = false;
};

// Partially diffusing mirror: specular fraction sqrt(1-eps^2) plus a Gaussian
// spread over mode-index changes with widths (sigma_l, sigma_p).
struct RoughGaussian {
    double epsilon = 0.1;
    double sigma_l = 1.0;
    double sigma_p = 1.0;
    PhaseTable phases;  // default all-zero

    void validate() const {
        if (epsilon < 0.0 || epsilon >= 1.0)
            throw std::domain_error("RoughGaussian: epsilon must be in [0,1)");
        if (!(sigma_l > 0.0) || !(sigma_p > 0.0))
            throw std::domain_error("RoughGaussian: sigma_l and sigma_p must be > 0");
    }
};

using SurfaceModel = std::variant<Metasurface, RoughGaussian>;

inline void validate(const SurfaceModel& model) {
    std::visit([](const auto& m) { m.validate(); }, model);
}

// --------------------------- normalization factor ---------------------------

// theta_3(u, q) = 1 + 2 sum_{n>=1} q^{n^2} cos(2nu), truncated when a term
// drops below 1e-16.
inline double jacobi_theta3(double u, double q) {
    double acc = 1.0;
    double qn = q;
    for (int n = 1; n < 64; ++n) {
        const double term = 2.0 * qn * std::cos(2.0 * n * u);
        acc += term;
        if (std::abs(2.0 * qn) < 1e-16) break;
        qn = std::pow(q, (n + 1.0) * (n + 1.0));
    }
    return acc;
}

// N^2 = (sqrt(2 pi) sigma_l theta3(pi, e^{-2 pi^2 sigma_l^2}) - 1)
//     * (sqrt(2 pi) sigma_p theta3(pi, e^{-2 pi^2 sigma_p^2}) - 1).
// By Poisson summation each factor equals sum_{j != 0} e^{-j^2 / (2 sigma^2)};
// NOTE: the product of the two single-axis sums is NOT the full 2D off-
// diagonal mass sum_{(dl,dp) != 0} e^{-dl^2/2sl^2 - dp^2/2sp^2}, so with this
// constant the diffuse columns are not exactly normalized (the shortfall is
// O(epsilon^2); see rough_column_norm_expected below). Kept as the model's
// defining constant; the closed-form Fisher ratios are insensitive to it.
inline double normalization(double sigma_l, double sigma_p) {
    if (!(sigma_l > 0.0) || !(sigma_p > 0.0))
        throw std::domain_error("normalization: widths must be > 0");
    const double fl = std::sqrt(2.0 * kPi) * sigma_l *
        jacobi_theta3(kPi, std::exp(-2.0 * kPi * kPi * sigma_l * sigma_l)) - 1.0;
    const double fp = std::sqrt(2.0 * kPi) * sigma_p *
        jacobi_theta3(kPi, std::exp(-2.0 * kPi * kPi * sigma_p * sigma_p)) - 1.0;
    return std::sqrt(fl * fp);
}

// sum_{j in Z} e^{-j^2/(2 sigma^2)} by direct summation (series oracle).
inline double gaussian_lattice_sum(double sigma) {
    double acc = 1.0;
    for (int j = 1;; ++j) {
        const double term = 2.0 * std::exp(-0.5 * j * j / (sigma * sigma));
        acc += term;
        if (term < 1e-18) break;
    }
    return acc;
}

// ---------------------------- scattering entries ----------------------------

// c_{l_out, p_out; l_in, p_in}. Metasurface: -1 on (l_out = l_in + dl*, p_out = p_in).
// RoughGaussian: (-sqrt(1-eps^2) - i eps/N) delta delta
//                + i eps e^{-dl^2/4sl^2} e^{-dp^2/4sp^2} e^{i theta} / N.
inline Complex scatter_coeff(const SurfaceModel& model, int l_out, int p_out, int l_in, int p_in) {
    if (p_out < 0 || p_in < 0) throw std::domain_error("scatter_coeff: p indices must be >= 0");
    if (const auto* meta = std::get_if<Metasurface>(&model)) {
        meta->validate();
        return (l_out == l_in + meta->delta_l_star && p_out == p_in) ? Complex(-1.0, 0.0)
                                                                     : Complex(0.0, 0.0);
    }
    const auto& rough = std::get<RoughGaussian>(model);
    rough.validate();
    const double nrm = normalization(rough.sigma_l, rough.sigma_p);
    const double dl = l_out - l_in;
    const double dp = p_out - p_in;
    Complex c{0.0, 0.0};
    if (l_out == l_in && p_out == p_in)
        c += Complex(-std::sqrt(1.0 - rough.epsilon * rough.epsilon), -rough.epsilon / nrm);
    const double gauss = std::exp(-dl * dl / (4.0 * rough.sigma_l * rough.sigma_l)) *
        std::exp(-dp * dp / (4.0 * rough.sigma_p * rough.sigma_p));
    const double th = rough.phases.theta(l_out, p_out, l_in, p_in);
    c += Complex(0.0, rough.epsilon / nrm) * gauss * std::exp(Complex(0.0, th));
    return c;
}

// sum over the out-window of |c|^2 for one input column. Throws when the
// window leaves more than tail_tol of the Gaussian mass outside.
inline double column_norm_check(const SurfaceModel& model, int l_in, int p_in,
                                int l_window, int p_window, double tail_tol = 1e-10) {
    if (p_in < 0) throw std::domain_error("column_norm_check: p_in must be >= 0");
    if (const auto* meta = std::get_if<Metasurface>(&model)) {
        if (std::abs(meta->delta_l_star) > l_window)
            throw std::invalid_argument("column_norm_check: window misses the shifted mode");
        double acc = 0.0;
        for (int lo = l_in - l_window; lo <= l_in + l_window; ++lo)
            for (int po = std::max(0, p_in - p_window); po <= p_in + p_window; ++po)
                acc += std::norm(scatter_coeff(model, lo, po, l_in, p_in));
        return acc;
    }
    const auto& rough = std::get<RoughGaussian>(model);
    const double tail_l = gaussian_lattice_sum(rough.sigma_l) -
        [&] { double s = 1.0; for (int j = 1; j <= l_window; ++j) s += 2.0 * std::exp(-0.5 * j * j / (rough.sigma_l * rough.sigma_l)); return s; }();
    const double tail_p = gaussian_lattice_sum(rough.sigma_p) -
        [&] { double s = 1.0; for (int j = 1; j <= p_window; ++j) s += 2.0 * std::exp(-0.5 * j * j / (rough.sigma_p * rough.sigma_p)); return s; }();
    const double nrm2 = normalization(rough.sigma_l, rough.sigma_p);
    const double tail_mass = rough.epsilon * rough.epsilon *
        (tail_l + tail_p) * gaussian_lattice_sum(std::max(rough.sigma_l, rough.sigma_p)) /
        (nrm2 * nrm2);
    if (tail_mass > tail_tol)
        throw std::invalid_argument("column_norm_check: window too small for requested tolerance");
    double acc = 0.0;
    for (int lo = l_in - l_window; lo <= l_in + l_window; ++lo)
        for (int po = std::max(0, p_in - p_window); po <= p_in + p_window; ++po)
            acc += std::norm(scatter_coeff(model, lo, po, l_in, p_in));
    return acc;
}

// Analytic value of the column sum for the rough model over the full lattice
// l' in Z, p' >= p_in - p_window_to_zero. Used by the validation tool as the
// independent oracle for the windowed sum above.
inline double rough_column_norm_expected(const RoughGaussian& rough, int p_in) {
    const double nrm2 = std::pow(normalization(rough.sigma_l, rough.sigma_p), 2);
    const double sl = gaussian_lattice_sum(rough.sigma_l);
    // p' runs over [0, inf): one-sided partial sum of the p lattice
    double sp = 1.0;
    for (int j = 1;; ++j) {
        const double up = std::exp(-0.5 * j * j / (rough.sigma_p * rough.sigma_p));
        double term = up;                 // p' = p_in + j
        if (j <= p_in) term += up;        // p' = p_in - j, present only if >= 0
        sp += term;
        if (up < 1e-18) break;
    }
    const double eps2 = rough.epsilon * rough.epsilon;
    return 1.0 - eps2 + eps2 * (sl * sp - 1.0) / nrm2;
}

// ------------------------------ height fields -------------------------------

struct HeightField {
    std::function<double(double r, double phi)> h;  // meters
    double rms = 0.0;                               // sigma_h
    std::string correlation_note;
};

struct HeightFieldOptions {
    int radial_order = 64;     // Gauss-Laguerre nodes (doubled for convergence)
    int azimuthal_points = 512;  // trapezoid points (doubled for convergence)
    double convergence_tol = 1e-9;
    bool strict_validity = false;  // throw instead of flag when k*sigma_h >= 0.1
};

struct HeightCoeff {
    Complex value{0.0, 0.0};
    double quad_error = 0.0;
    bool weak_scattering_ok = true;  // k * sigma_h < 0.1
};

namespace detail {

inline Complex height_overlap(const HeightField& field, const LGGeometry& geom,
                              int l_out, int p_out, int l_in, int p_in,
                              int n_rad, int n_phi) {
    const QuadRule rad = gauss_laguerre(n_rad);
    const double w0 = geom.w0;
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < rad.nodes.size(); ++i) {
        const double t = rad.nodes[i];
        const double r = w0 * std::sqrt(0.5 * t);
        const double prof = lg_waist_profile(l_out, p_out, t) * lg_waist_profile(l_in, p_in, t);
        Complex ring{0.0, 0.0};
        const double dphi = 2.0 * kPi / n_phi;
        for (int j = 0; j < n_phi; ++j) {
            const double phi = j * dphi;
            // e^{+i l_out phi} from the conjugated output mode, e^{-i l_in phi} from the input
            ring += field.h(r, phi) * std::exp(Complex(0.0, (l_out - l_in) * phi));
        }
        ring *= dphi;
        acc += rad.weights[i] * prof * ring;
    }
    return 0.25 * acc;
}

}  // namespace detail

// Weak-scattering coefficient c = -delta delta - 2ik * <out| h |in> at the waist.
inline HeightCoeff height_field_coeffs(const HeightField& field, const LGGeometry& geom, double k,
                                       int l_out, int p_out, int l_in, int p_in,
                                       const HeightFieldOptions& opt = {}) {
    if (p_out < 0 || p_in < 0) throw std::domain_error("height_field_coeffs: p indices must be >= 0");
    geom.validate();
    HeightCoeff out;
    out.weak_scattering_ok = k * field.rms < 0.1;
    if (!out.weak_scattering_ok && opt.strict_validity)
        throw std::domain_error("height_field_coeffs: k * sigma_h outside the weak-scattering regime");

    const Complex a = detail::height_overlap(field, geom, l_out, p_out, l_in, p_in,
                                             opt.radial_order, opt.azimuthal_points);
    const Complex b = detail::height_overlap(field, geom, l_out, p_out, l_in, p_in,
                                             2 * opt.radial_order, 2 * opt.azimuthal_points);
    out.quad_error = std::abs(a - b);
    if (out.quad_error > opt.convergence_tol)
        throw std::runtime_error("height_field_coeffs: quadrature did not converge");

    out.value = Complex(0.0, -2.0 * k) * b;
    if (l_out == l_in && p_out == p_in) out.value += Complex(-1.0, 0.0);
    return out;
}

// Bilinear interpolation on a regular (r, phi) grid, phi periodic.
inline HeightField height_field_from_grid(const std::vector<double>& r_axis,
                                          const std::vector<double>& phi_axis,
                                          const std::vector<std::vector<double>>& values,
                                          double rms, std::string note = "sampled grid") {
    if (r_axis.size() < 2 || phi_axis.size() < 2)
        throw std::invalid_argument("height_field_from_grid: need at least a 2x2 grid");
    if (values.size() != r_axis.size())
        throw std::invalid_argument("height_field_from_grid: row count mismatch");
    for (const auto& row : values)
        if (row.size() != phi_axis.size())
            throw std::invalid_argument("height_field_from_grid: column count mismatch");

    auto h = [r_axis, phi_axis, values](double r, double phi) {
        const double two_pi = 2.0 * kPi;
        phi = std::fmod(phi, two_pi);
        if (phi < 0.0) phi += two_pi;
        const auto& ra = r_axis;
        double rc = std::clamp(r, ra.front(), ra.back());
        auto rit = std::upper_bound(ra.begin(), ra.end(), rc);
        std::size_t i1 = std::min(ra.size() - 1, static_cast<std::size_t>(rit - ra.begin()));
        std::size_t i0 = i1 == 0 ? 0 : i1 - 1;
        const double fr = (i1 == i0) ? 0.0 : (rc - ra[i0]) / (ra[i1] - ra[i0]);

        const double dphi = phi_axis[1] - phi_axis[0];
        const double fj = (phi - phi_axis.front()) / dphi;
        const std::size_t jn = phi_axis.size();
        std::size_t j0 = static_cast<std::size_t>(std::floor(fj)) % jn;
        std::size_t j1 = (j0 + 1) % jn;
        const double fp = fj - std::floor(fj);

        const double v00 = values[i0][j0], v01 = values[i0][j1];
        const double v10 = values[i1][j0], v11 = values[i1][j1];
        return (1 - fr) * ((1 - fp) * v00 + fp * v01) + fr * ((1 - fp) * v10 + fp * v11);
    };
    return HeightField{h, rms, std::move(note)};
}

}  // namespace rotodop
