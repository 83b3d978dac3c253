// transform.hpp — the Omega-dependent input->output mode map over a finite
// truncated mode set: U at the prior Omega0, its exact Omega-derivative, and
// the first-order (affine in dOmega) transform the estimation protocol uses.
//
// Index conventions. Rows are output modes o, columns are input modes i; the
// out-operator row pulls in-modes through the scattering matrix with the roles
// transposed, so the coupling weight of (o, i) is scatter_coeff(l_i, p_i; l_o, p_o).
// The carrier mismatch of a channel is beta = (omega_in - dl*Omega - omega_out)/sigma
// with dl = l_in - l_out, and each entry carries the center-time phase
// e^{-i sigma tau0 beta} of the fixed detector reference basis.

#pragma once

#include "rotodop/gaussian.hpp"
#include "rotodop/kcoeff.hpp"
#include "rotodop/surface.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rotodop {

struct Truncation {
    int n_max = 3;
    int l_window = 2;
    int p_window = 0;
};

struct ProtocolConfig {
    double omega_in = 0.0;
    double Omega0 = 0.0;
    BasisParams basis;  // supplies sigma/tau0/theta0; omega_in above is the carrier
    SurfaceModel surface = Metasurface{1};
    ModeIndex measured;
    Truncation trunc;
    std::optional<double> omega_out_override;
    // input-minus-output OAM of the dominant coupling; fixes the default
    // omega_out = omega_in - delta_l_ref * Omega0 that makes its beta vanish
    int delta_l_ref = 0;
    double validity_threshold = 0.01;  // for Omega0/omega_in << 1

    int dominant_delta_l() const {
        if (const auto* meta = std::get_if<Metasurface>(&surface)) return meta->delta_l_star;
        return delta_l_ref;
    }
    double omega_out() const {
        if (omega_out_override) return *omega_out_override;
        return omega_in - dominant_delta_l() * Omega0;
    }
    // (omega_in - dl*Omega - omega_out)/sigma, with the large carriers
    // cancelled first so the Omega dependence keeps full relative precision
    double carrier_offset() const {
        if (omega_out_override) return omega_in - *omega_out_override;
        return dominant_delta_l() * Omega0;
    }
    double beta(int delta_l_in_minus_out, double angular_velocity) const {
        return (carrier_offset() - delta_l_in_minus_out * angular_velocity) / basis.sigma;
    }
    bool prior_ratio_ok() const { return std::abs(Omega0) < validity_threshold * omega_in; }

    void validate() const {
        if (!(omega_in > 0.0)) throw std::domain_error("ProtocolConfig: omega_in must be > 0");
        if (!(basis.sigma > 0.0)) throw std::domain_error("ProtocolConfig: sigma must be > 0");
        rotodop::validate(measured);
        rotodop::validate(surface);
        if (trunc.n_max < measured.n + 1)
            throw std::invalid_argument("ProtocolConfig: n_max must reach measured.n + 1");
        if (const auto* meta = std::get_if<Metasurface>(&surface)) {
            if (std::abs(meta->delta_l_star) > trunc.l_window)
                throw std::invalid_argument("ProtocolConfig: l_window misses the shifted OAM");
        }
    }
};

// Lexicographic (n, l, p) enumeration of the truncation box around the
// measured mode; generated already sorted.
inline std::vector<ModeIndex> build_mode_set(const ProtocolConfig& cfg) {
    std::vector<ModeIndex> modes;
    const int l0 = cfg.measured.l - cfg.trunc.l_window;
    const int l1 = cfg.measured.l + cfg.trunc.l_window;
    const int p0 = std::max(0, cfg.measured.p - cfg.trunc.p_window);
    const int p1 = cfg.measured.p + cfg.trunc.p_window;
    for (int n = 0; n <= cfg.trunc.n_max; ++n)
        for (int l = l0; l <= l1; ++l)
            for (int p = p0; p <= p1; ++p) modes.push_back({n, l, p});
    return modes;
}

// Per-unit-dOmega first-order coefficients of the carrier shift, per (n, dl).
struct GeneratorCoeffs {
    double sigma = 1.0;
    double tau0 = 0.0;

    Complex nu(int n, int dl) const { return Complex(0.0, -std::sqrt(double(n)) * dl / sigma); }
    Complex mu(int dl) const { return Complex(0.0, -tau0 * dl); }
    Complex gamma(int n, int dl) const { return Complex(0.0, -std::sqrt(n + 1.0) * dl / sigma); }
};

inline GeneratorCoeffs build_generator(const ProtocolConfig& cfg) {
    return GeneratorCoeffs{cfg.basis.sigma, cfg.basis.tau0};
}

namespace detail {

// One scattering channel: all K entries for a given OAM change at a given Omega.
struct ChannelK {
    Eigen::MatrixXcd k;  // (n_max+1)^2, indices (n_out, n_in)
    Complex phase;       // e^{-i sigma tau0 beta}
};

inline ChannelK channel_k(const ProtocolConfig& cfg, int dl_in_minus_out, double omega, int n_max) {
    ChannelK ch;
    const double b = cfg.beta(dl_in_minus_out, omega);
    ch.k.resize(n_max + 1, n_max + 1);
    for (int no = 0; no <= n_max; ++no)
        for (int ni = 0; ni <= n_max; ++ni) ch.k(no, ni) = k_coefficient(no, ni, b);
    ch.phase = std::exp(Complex(0.0, -cfg.basis.sigma * cfg.basis.tau0 * b));
    return ch;
}

}  // namespace detail

// Exact transform over the truncated set at angular velocity omega.
inline Eigen::MatrixXcd build_U_at(const ProtocolConfig& cfg, double omega) {
    cfg.validate();
    const auto modes = build_mode_set(cfg);
    const int d = static_cast<int>(modes.size());
    const int nmx = cfg.trunc.n_max;
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(d, d);
    std::map<int, detail::ChannelK> channels;
    for (int o = 0; o < d; ++o) {
        for (int i = 0; i < d; ++i) {
            const auto& mo = modes[o];
            const auto& mi = modes[i];
            const Complex c = scatter_coeff(cfg.surface, mi.l, mi.p, mo.l, mo.p);
            if (c == Complex(0.0, 0.0)) continue;
            const int dl = mi.l - mo.l;
            auto it = channels.find(dl);
            if (it == channels.end())
                it = channels.emplace(dl, detail::channel_k(cfg, dl, omega, nmx)).first;
            u(o, i) = c * it->second.phase * it->second.k(mo.n, mi.n);
        }
    }
    return u;
}

inline Eigen::MatrixXcd build_U(const ProtocolConfig& cfg) { return build_U_at(cfg, cfg.Omega0); }

// Exact dU/dOmega at Omega0. Uses d/dbeta K(no, ni, beta) =
// -i [sqrt(ni+1) K(no, ni+1, beta) + sqrt(ni) K(no, ni-1, beta)] together with
// the derivative of the center-time phase; tridiagonal in n when beta = 0.
inline Eigen::MatrixXcd build_dU(const ProtocolConfig& cfg) {
    cfg.validate();
    const auto modes = build_mode_set(cfg);
    const int d = static_cast<int>(modes.size());
    const int nmx = cfg.trunc.n_max;
    Eigen::MatrixXcd du = Eigen::MatrixXcd::Zero(d, d);
    std::map<int, detail::ChannelK> channels;
    const double sigma = cfg.basis.sigma;
    const double tau0 = cfg.basis.tau0;
    for (int o = 0; o < d; ++o) {
        for (int i = 0; i < d; ++i) {
            const auto& mo = modes[o];
            const auto& mi = modes[i];
            const Complex c = scatter_coeff(cfg.surface, mi.l, mi.p, mo.l, mo.p);
            if (c == Complex(0.0, 0.0)) continue;
            const int dl = mi.l - mo.l;
            auto it = channels.find(dl);
            if (it == channels.end())
                it = channels.emplace(dl, detail::channel_k(cfg, dl, cfg.Omega0, nmx)).first;
            const auto& k = it->second.k;
            // K entries one step outside the box are evaluated directly
            const double b = cfg.beta(dl, cfg.Omega0);
            const Complex k_up = (mi.n + 1 <= nmx) ? k(mo.n, mi.n + 1)
                                                   : k_coefficient(mo.n, mi.n + 1, b);
            const Complex k_dn = (mi.n >= 1) ? k(mo.n, mi.n - 1) : Complex(0.0, 0.0);
            Complex bracket = std::sqrt(mi.n + 1.0) * k_up + sigma * tau0 * k(mo.n, mi.n);
            if (mi.n >= 1) bracket += std::sqrt(double(mi.n)) * k_dn;
            du(o, i) = c * it->second.phase * Complex(0.0, dl / sigma) * bracket;
        }
    }
    return du;
}

struct TransformPair {
    std::vector<ModeIndex> modes;
    Eigen::MatrixXcd u0;            // U(Omega0)
    Eigen::MatrixXcd du;            // dU/dOmega at Omega0, per unit dOmega
    std::vector<ModeIndex> input_support;
    std::vector<int> support_cols;  // column indices of input_support
    int measured_index = -1;
    double row_tail = 0.0;          // truncation tail of the measured row
    std::vector<std::string> warnings;
};

inline TransformPair build_transform(const ProtocolConfig& cfg, double support_threshold = 1e-12,
                                     double tail_tol = 1e-8) {
    cfg.validate();
    TransformPair pair;
    pair.modes = build_mode_set(cfg);
    pair.u0 = build_U_at(cfg, cfg.Omega0);
    pair.du = build_dU(cfg);
    const int d = static_cast<int>(pair.modes.size());
    pair.measured_index = -1;
    for (int i = 0; i < d; ++i)
        if (pair.modes[i] == cfg.measured) pair.measured_index = i;
    if (pair.measured_index < 0)
        throw std::invalid_argument("build_transform: measured mode outside the truncation");

    const int m = pair.measured_index;
    double row_mass = 0.0;
    for (int i = 0; i < d; ++i) {
        row_mass += std::norm(pair.u0(m, i));
        if (std::abs(pair.u0(m, i)) > support_threshold || std::abs(pair.du(m, i)) > support_threshold) {
            pair.input_support.push_back(pair.modes[i]);
            pair.support_cols.push_back(i);
        }
    }
    double expected = 1.0;
    if (const auto* rough = std::get_if<RoughGaussian>(&cfg.surface))
        expected = rough_column_norm_expected(*rough, cfg.measured.p);
    pair.row_tail = expected - row_mass;
    if (pair.row_tail > tail_tol)
        throw std::runtime_error("build_transform: measured-row truncation tail exceeds tolerance");

    if (!cfg.prior_ratio_ok())
        pair.warnings.push_back("Omega0/omega_in is not small against the validity threshold");
    return pair;
}

struct FirstOrderTransform {
    Eigen::MatrixXcd u;  // U(Omega0) + dOmega * dU
    bool validity_warning = false;
};

// First-order transform; affine in dOmega because the generator is linear.
// Exact along the measured row; rows at other OAM are not used downstream.
inline FirstOrderTransform first_order_transform(const ProtocolConfig& cfg,
                                                 const TransformPair& pair, double d_omega) {
    FirstOrderTransform out;
    out.u = pair.u0 + d_omega * pair.du;
    int max_dl = 0;
    for (const auto& m : pair.input_support)
        max_dl = std::max(max_dl, std::abs(m.l - cfg.measured.l));
    const double scale = std::max(std::sqrt(cfg.trunc.n_max + 1.0) / cfg.basis.sigma,
                                  std::abs(cfg.basis.tau0));
    out.validity_warning = std::abs(d_omega) * max_dl * scale >= 0.1;
    return out;
}

}  // namespace rotodop
