// fisher.hpp — classical Fisher information of homodyne on the measured mode,
// single-mode quantum Fisher information, the closed-form F_Q / F_C / R for
// both surface models, and the optimal displacement/squeezing energy split.

#pragma once

#include "rotodop/gaussian.hpp"
#include "rotodop/transform.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rotodop {

// ------------------------------- probe states -------------------------------

struct ProbeEntry {
    ModeIndex mode;
    Complex alpha{0.0, 0.0};
    double s = 0.0;
    double theta = 0.0;
};

struct ProbeSpec {
    std::vector<ProbeEntry> entries;

    double n_coh() const {
        double acc = 0.0;
        for (const auto& e : entries) acc += std::norm(e.alpha);
        return acc;
    }
    double n_sq() const {
        double acc = 0.0;
        for (const auto& e : entries) acc += std::sinh(e.s) * std::sinh(e.s);
        return acc;
    }
    double n_total() const { return n_coh() + n_sq(); }
    bool is_classical() const {
        for (const auto& e : entries)
            if (e.s != 0.0) return false;
        return true;
    }
};

// e^{-2s} and e^{+2s} from the squeezed-mode photon number, exact:
// e^{2s} = 1 + 2 N_sq + 2 sqrt(N_sq (N_sq + 1)). The minus branch is evaluated
// as 1/(sqrt(N_sq+1) + sqrt(N_sq))^2 to avoid cancellation.
inline double exp_minus_2s(double n_sq) {
    if (n_sq < 0.0) throw std::domain_error("exp_minus_2s: negative photon number");
    const double root = std::sqrt(n_sq + 1.0) + std::sqrt(n_sq);
    return 1.0 / (root * root);
}
inline double exp_plus_2s(double n_sq) {
    const double root = std::sqrt(n_sq + 1.0) + std::sqrt(n_sq);
    return root * root;
}

inline GaussianState probe_state(const std::vector<ModeIndex>& modes, const ProbeSpec& probe) {
    GaussianState st = vacuum(modes);
    for (const auto& e : probe.entries) {
        if (e.s > 0.0) st = squeeze(std::move(st), e.mode, e.s, e.theta);
    }
    for (const auto& e : probe.entries) {
        if (e.alpha != Complex(0.0, 0.0)) st = displace(std::move(st), e.mode, e.alpha);
    }
    return st;
}

// Squeezing angle that concentrates the squeezed quadrature in the measured x
// after the (complex scalar) coupling u: theta = 2 arg(u).
inline double optimal_squeeze_angle(Complex u) { return 2.0 * std::arg(u); }

// Two-mode probe: displacement in the channel that feeds the measured mean at
// first order, squeezing in the channel that sets the measured variance.
// probe_delta_l is the input-minus-output OAM of the displaced channel.
inline ProbeSpec quantum_probe(const ProtocolConfig& cfg, const TransformPair& pair,
                               int probe_delta_l, double n_coh, double n_sq) {
    const ModeIndex m = cfg.measured;
    const bool meta = std::holds_alternative<Metasurface>(cfg.surface);
    const ModeIndex displaced{m.n + 1, m.l + probe_delta_l, m.p};
    const ModeIndex squeezed = meta ? ModeIndex{m.n, m.l + probe_delta_l, m.p}
                                    : ModeIndex{m.n, m.l, m.p};
    const int dcol = static_cast<int>(
        std::lower_bound(pair.modes.begin(), pair.modes.end(), displaced) - pair.modes.begin());
    const int scol = static_cast<int>(
        std::lower_bound(pair.modes.begin(), pair.modes.end(), squeezed) - pair.modes.begin());
    if (dcol >= static_cast<int>(pair.modes.size()) || pair.modes[dcol] != displaced ||
        scol >= static_cast<int>(pair.modes.size()) || pair.modes[scol] != squeezed)
        throw std::invalid_argument("quantum_probe: probe modes outside the truncation");

    ProbeSpec probe;
    const Complex du_md = pair.du(pair.measured_index, dcol);
    const Complex u_ms = pair.u0(pair.measured_index, scol);
    if (n_coh > 0.0) {
        const double phase = (du_md == Complex(0.0, 0.0)) ? 0.0 : -std::arg(du_md);
        probe.entries.push_back({displaced, std::sqrt(n_coh) * std::exp(Complex(0.0, phase)), 0.0, 0.0});
    }
    if (n_sq > 0.0) {
        const double s = std::asinh(std::sqrt(n_sq));
        probe.entries.push_back({squeezed, Complex(0.0, 0.0), s, optimal_squeeze_angle(u_ms)});
    }
    return probe;
}

inline ProbeSpec classical_probe(const ProtocolConfig& cfg, const TransformPair& pair,
                                 int probe_delta_l, double n_photons) {
    return quantum_probe(cfg, pair, probe_delta_l, n_photons, 0.0);
}

// ------------------------- measured-mode propagation ------------------------

struct MeasuredMoments {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
};

inline MeasuredMoments measured_block(const GaussianState& st, const ModeIndex& mode) {
    const int k = st.index_of(mode);
    MeasuredMoments mm;
    mm.mean = st.mean.segment<2>(2 * k);
    mm.cov = st.cov.block<2, 2>(2 * k, 2 * k);
    return mm;
}

// Full pipeline: probe state -> first-order transform -> loss on the measured
// mode -> measured-mode block.
inline MeasuredMoments propagate(const ProtocolConfig& cfg, const TransformPair& pair,
                                 const GaussianState& probe, double eta, double d_omega) {
    const auto fo = first_order_transform(cfg, pair, d_omega);
    TransformOptions opt;
    opt.allow_nonunitary = true;  // unitary up to first order only
    GaussianState out = apply_complex_transform(probe, fo.u, opt);
    out = loss_channel(std::move(out), cfg.measured, eta);
    return measured_block(out, cfg.measured);
}

using MomentFamily = std::function<MeasuredMoments(double)>;

inline MomentFamily pipeline_family(const ProtocolConfig& cfg, const TransformPair& pair,
                                    const ProbeSpec& probe, double eta) {
    auto st = std::make_shared<GaussianState>(probe_state(pair.modes, probe));
    auto cfg_p = std::make_shared<ProtocolConfig>(cfg);
    auto pair_p = std::make_shared<TransformPair>(pair);
    return [cfg_p, pair_p, st, eta](double d_omega) {
        return propagate(*cfg_p, *pair_p, *st, eta, d_omega);
    };
}

// ------------------------------- homodyne CFI -------------------------------

struct HomodyneCfi {
    double value = 0.0;      // analytic chain-rule result
    double value_fd = 0.0;   // central-difference / Richardson result
    double dqbar = 0.0;      // d qbar / d Omega
    double dvar = 0.0;       // d Sigma_q / d Omega
    double var = 1.0;        // Sigma_q at Omega0
    std::vector<std::string> flags;
};

// F = (d qbar)^2 / Sigma_q + (1/2) (d Sigma_q / Sigma_q)^2, evaluated both by
// finite differences through the Gaussian pipeline and by the chain rule
// through dU; the two must agree to 1e-6 relative.
inline HomodyneCfi homodyne_cfi(const ProtocolConfig& cfg, const TransformPair& pair,
                                const ProbeSpec& probe, double eta,
                                double quadrature_angle = 0.0, double agree_tol = 1e-6) {
    const GaussianState in = probe_state(pair.modes, probe);
    const int m = pair.measured_index;
    const int d = static_cast<int>(pair.modes.size());
    const double cq = std::cos(quadrature_angle), sq = std::sin(quadrature_angle);
    const Eigen::Vector2d v(cq, sq);

    // analytic: the measured block is sum_i B_i Sigma_i B_i^T (product input),
    // so its Omega-derivative needs only the measured rows of U and dU.
    Eigen::Vector2d r0 = Eigen::Vector2d::Zero(), dr = Eigen::Vector2d::Zero();
    Eigen::Matrix2d s0 = Eigen::Matrix2d::Zero(), ds = Eigen::Matrix2d::Zero();
    for (int i = 0; i < d; ++i) {
        Eigen::Matrix2d b, db;
        const Complex u = pair.u0(m, i), w = pair.du(m, i);
        b << u.real(), -u.imag(), u.imag(), u.real();
        db << w.real(), -w.imag(), w.imag(), w.real();
        const Eigen::Vector2d mi = in.mean.segment<2>(2 * i);
        const Eigen::Matrix2d si = in.cov.block<2, 2>(2 * i, 2 * i);
        r0 += b * mi;
        dr += db * mi;
        s0 += b * si * b.transpose();
        ds += db * si * b.transpose() + b * si * db.transpose();
    }
    const double root = std::sqrt(1.0 - eta);
    const double var0 = (1.0 - eta) * v.dot(s0 * v) + eta;
    const double dqbar = root * v.dot(dr);
    const double dvar = (1.0 - eta) * v.dot(ds * v);
    if (!(var0 > 0.0)) throw std::runtime_error("homodyne_cfi: non-positive variance");

    HomodyneCfi out;
    out.var = var0;
    out.dqbar = dqbar;
    out.dvar = dvar;
    out.value = dqbar * dqbar / var0 + 0.5 * (dvar / var0) * (dvar / var0);

    // finite differences through the full gaussian-core pipeline
    auto qbar_of = [&](double x) {
        const auto mm = propagate(cfg, pair, in, eta, x);
        return cq * mm.mean(0) + sq * mm.mean(1);
    };
    auto var_of = [&](double x) {
        const auto mm = propagate(cfg, pair, in, eta, x);
        return v.dot(mm.cov * v);
    };
    const double h0 = 1e-6 * std::max(std::abs(cfg.Omega0), cfg.basis.sigma);
    const auto dq_fd = deriv_richardson(qbar_of, 0.0, std::max(h0, 1e-9), 1e-10);
    const auto dv_fd = deriv_richardson(var_of, 0.0, std::max(h0, 1e-9), 1e-10);
    out.value_fd = dq_fd.value * dq_fd.value / var0 + 0.5 * std::pow(dv_fd.value / var0, 2);

    const double gap = std::abs(out.value - out.value_fd);
    if (gap > agree_tol * std::max(std::abs(out.value), std::abs(out.value_fd)) && gap > 1e-10)
        throw std::runtime_error("homodyne_cfi: analytic and finite-difference routes disagree");
    out.flags = pair.warnings;
    return out;
}

// ------------------------------- closed forms -------------------------------

struct NoiseSplit {
    double a = 1.0;  // weight of the squeezable quadrature noise
    double b = 0.0;  // unsqueezable noise floor; a + b = 1
};

inline NoiseSplit noise_split(const SurfaceModel& surface, double eta) {
    if (std::holds_alternative<Metasurface>(surface)) return {1.0 - eta, eta};
    const auto& rough = std::get<RoughGaussian>(surface);
    const double e2 = rough.epsilon * rough.epsilon;
    return {(1.0 - eta) * (1.0 - e2), (1.0 - eta) * e2 + eta};
}

// |dU/dOmega| of the displaced channel, squared: the surface-dependent weight
// 4 (n+1) dl^2 / sigma^2 times the diffuse amplitude for the rough model.
inline double channel_weight_sq(const ProtocolConfig& cfg, int probe_delta_l) {
    const int n = cfg.measured.n;
    const double sigma = cfg.basis.sigma;
    const double base = (n + 1.0) * probe_delta_l * probe_delta_l / (sigma * sigma);
    if (const auto* meta = std::get_if<Metasurface>(&cfg.surface)) {
        if (probe_delta_l != meta->delta_l_star)
            throw std::invalid_argument("channel_weight_sq: metasurface couples only its own OAM shift");
        return base;
    }
    const auto& rough = std::get<RoughGaussian>(cfg.surface);
    const double nrm = normalization(rough.sigma_l, rough.sigma_p);
    const double g = std::exp(-probe_delta_l * probe_delta_l / (4.0 * rough.sigma_l * rough.sigma_l));
    const double amp = rough.epsilon * g / nrm;
    return amp * amp * base;
}

inline double classical_cfi_closed(const ProtocolConfig& cfg, double n_photons, double eta,
                                   int probe_delta_l) {
    if (n_photons < 0.0) throw std::domain_error("classical_cfi_closed: N < 0");
    return 4.0 * (1.0 - eta) * n_photons * channel_weight_sq(cfg, probe_delta_l);
}

inline double quantum_cfi_closed(const ProtocolConfig& cfg, double n_coh, double n_sq, double eta,
                                 int probe_delta_l) {
    if (n_coh < 0.0 || n_sq < 0.0) throw std::domain_error("quantum_cfi_closed: negative energy");
    const NoiseSplit ns = noise_split(cfg.surface, eta);
    const double denom = ns.a * exp_minus_2s(n_sq) + ns.b;
    return 4.0 * (1.0 - eta) * n_coh * channel_weight_sq(cfg, probe_delta_l) / denom;
}

// ----------------------------------- QFI ------------------------------------

struct QfiResult {
    double j = 0.0;
    bool purity_constant = true;
    double purity = 1.0;
};

// Generic single-mode QFI for constant-purity Gaussian families:
// J = (1/2) Tr[(Sigma^{-1} Sigma')^2] / (1 + P) + r'^T Sigma^{-1} r',
// with derivatives by Richardson-extrapolated central differences.
inline QfiResult qfi_single_mode(const MomentFamily& family, double h0 = 1e-5) {
    const MeasuredMoments at0 = family(0.0);
    const Eigen::Matrix2d sigma = at0.cov;
    const double det = sigma.determinant();
    if (!(det > 0.0)) throw std::runtime_error("qfi_single_mode: singular covariance");
    const double p = 1.0 / std::sqrt(det);

    Eigen::Vector2d dr;
    Eigen::Matrix2d dsig;
    for (int c = 0; c < 2; ++c)
        dr(c) = deriv_richardson([&](double x) { return family(x).mean(c); }, 0.0, h0).value;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            dsig(r, c) = deriv_richardson([&](double x) { return family(x).cov(r, c); }, 0.0, h0).value;

    const Eigen::Matrix2d inv = sigma.inverse();
    const Eigen::Matrix2d q = inv * dsig;
    QfiResult out;
    out.purity = p;
    out.j = 0.5 * (q * q).trace() / (1.0 + p) + dr.dot(inv * dr);

    const double dp = deriv_richardson(
        [&](double x) { return 1.0 / std::sqrt(family(x).cov.determinant()); }, 0.0, h0).value;
    out.purity_constant = std::abs(dp) * h0 < 1e-6;
    return out;
}

// Closed-form QFI for the two protocol probes.
// Metasurface: the homodyne term plus a squeezing-rotation term scaling with
// the center time tau0; D is det of the lossy covariance.
inline double qfi_closed_meta(const ProtocolConfig& cfg, double n_coh, double n_sq, double eta) {
    const int dl = std::get<Metasurface>(cfg.surface).delta_l_star;
    const double em = exp_minus_2s(n_sq), ep = exp_plus_2s(n_sq);
    const double a = (1.0 - eta) * em + eta;
    const double b = (1.0 - eta) * ep + eta;
    const double f_hom = quantum_cfi_closed(cfg, n_coh, n_sq, eta, dl);
    const double tau = cfg.basis.tau0;
    const double disc = a * b;  // equals 1 - 2 eta + (em + ep) eta (1 - eta) + 2 eta^2
    const double second = (em - ep) * (em - ep) * double(dl) * dl * (1.0 - eta) * (1.0 - eta) *
        tau * tau / (disc * (1.0 + 1.0 / std::sqrt(disc)));
    return f_hom + second;
}

// Rough surface: the squeezed input feeds the measured mode through the
// OAM-preserving specular channel, so the measured covariance is stationary
// at first order and the QFI reduces to the displacement term, i.e. homodyne
// saturates it.
inline double qfi_closed_cs(const ProtocolConfig& cfg, double n_coh, double n_sq, double eta,
                            int probe_delta_l) {
    return quantum_cfi_closed(cfg, n_coh, n_sq, eta, probe_delta_l);
}

inline double qfi_closed_forms(const ProtocolConfig& cfg, double n_coh, double n_sq, double eta,
                               int probe_delta_l) {
    if (std::holds_alternative<Metasurface>(cfg.surface))
        return qfi_closed_meta(cfg, n_coh, n_sq, eta);
    return qfi_closed_cs(cfg, n_coh, n_sq, eta, probe_delta_l);
}

// Idealized measured-mode family of the rough-surface probe (unit-normalized
// scattering columns): linear mean, stationary covariance. Used as the
// generic-QFI oracle input for the closed form above.
inline MomentFamily cs_protocol_family(const ProtocolConfig& cfg, double n_coh, double n_sq,
                                       double eta, int probe_delta_l) {
    const auto& rough = std::get<RoughGaussian>(cfg.surface);
    const double e2 = rough.epsilon * rough.epsilon;
    const double slope = 2.0 * std::sqrt((1.0 - eta) * n_coh * channel_weight_sq(cfg, probe_delta_l));
    const double em = exp_minus_2s(n_sq), ep = exp_plus_2s(n_sq);
    Eigen::Matrix2d cov;
    cov << (1.0 - eta) * ((1.0 - e2) * em + e2) + eta, 0.0, 0.0,
        (1.0 - eta) * ((1.0 - e2) * ep + e2) + eta;
    return [slope, cov](double d_omega) {
        MeasuredMoments mm;
        mm.mean = Eigen::Vector2d(slope * d_omega, 0.0);
        mm.cov = cov;
        return mm;
    };
}

// --------------------------- allocation optimizer ---------------------------

struct AllocationReport {
    double n_coh_numeric = 0.0;
    double r_numeric = 1.0;
    double n_coh_closed = 0.0;
    double r_closed = 1.0;
};

// Max of F_Q/F_C over the split N = N_coh + N_sq at fixed N, as a function of
// the noise split (a, b): ratio(x) = (x/N) / (a e^{-2s(N-x)} + b).
inline double allocation_ratio(double n_coh, double n_total, const NoiseSplit& ns) {
    const double n_sq = std::max(0.0, n_total - n_coh);  // bracket endpoints to the ulp
    return (n_coh / n_total) / (ns.a * exp_minus_2s(n_sq) + ns.b);
}

inline double ratio_closed_form(double n_total, const NoiseSplit& ns) {
    if (ns.b == 0.0) return 1.0 + n_total;
    return (1.0 + 2.0 * n_total * ns.b - std::sqrt(1.0 + 4.0 * n_total * ns.a * ns.b)) /
        (2.0 * n_total * ns.b * ns.b);
}

// Optimal N_coh via the stationarity condition: e^{2s*} = (sqrt(1+4NAB) - A)/B.
inline double ncoh_closed_form(double n_total, const NoiseSplit& ns) {
    if (ns.b == 0.0) return n_total * (1.0 + n_total) / (1.0 + 2.0 * n_total);
    const double y = (std::sqrt(1.0 + 4.0 * n_total * ns.a * ns.b) - ns.a) / ns.b;
    const double n_sq = 0.25 * (y + 1.0 / y - 2.0);
    return n_total - n_sq;
}

// The displayed metasurface constraint N_coh(N, eta), kept verbatim as a
// cross-check of ncoh_closed_form for eta > 0.
inline double ncoh_meta_displayed(double n, double eta) {
    const double root = std::sqrt(1.0 - 4.0 * (eta - 1.0) * eta * n);
    const double num = 2.0 * n * (eta * eta * (4.0 * n + 2.0) -
        eta * (root + 4.0 * n + 2.0) + root - 1.0) + root - 1.0;
    const double den = 2.0 * eta * (eta + 4.0 * (eta - 1.0) * n - 2.0);
    return num / den;
}

inline AllocationReport optimize_allocation(double n_total, double eta, const SurfaceModel& surface,
                                            double agree_tol = 1e-6) {
    if (!(n_total > 0.0)) throw std::domain_error("optimize_allocation: N must be > 0");
    const NoiseSplit ns = noise_split(surface, eta);
    AllocationReport rep;
    const auto best = golden_section_max(
        [&](double x) { return allocation_ratio(x, n_total, ns); }, 0.0, n_total,
        1e-10 * std::max(1.0, n_total));
    rep.n_coh_numeric = best.x;
    rep.r_numeric = best.value;
    rep.r_closed = ratio_closed_form(n_total, ns);
    rep.n_coh_closed = ncoh_closed_form(n_total, ns);
    if (rel_diff(rep.r_numeric, rep.r_closed) > agree_tol ||
        std::abs(rep.n_coh_numeric - rep.n_coh_closed) > agree_tol * std::max(1.0, n_total))
        throw std::runtime_error("optimize_allocation: numeric and closed-form optima disagree");
    return rep;
}

// ------------------------ classical-strategy optimality ----------------------

struct OptimalityReport {
    ModeIndex best_mode;
    double f_homodyne = 0.0;
    double j_qfi = 0.0;
    double formula = 0.0;            // 4 (1-eta) sum_i |dU_mi|^2 |alpha_i|^2
    double single_mode_margin = 0.0;  // F(best single mode) - F(runner-up), >= 0
    double coherent_spread_gain = 0.0;  // F(alpha propto conj dU) - F(best single)
    double worst_violation = 0.0;       // relative gap between f and j
    std::vector<std::string> notes;
};

// With displacement phases phi_i = -arg dU_mi, homodyne CFI equals the QFI of
// the coherent strategy, and among single-mode placements the strongest
// channel wins. When several channels couple, a displacement spread
// proportional to |dU| adds the mean derivatives coherently and can beat any
// single placement; the gain is reported, not asserted away.
inline OptimalityReport classical_optimality_check(const ProtocolConfig& cfg,
                                                   const TransformPair& pair, double n_photons,
                                                   double eta) {
    const int m = pair.measured_index;
    const int d = static_cast<int>(pair.modes.size());
    int best = -1, second = -1;
    double best_w = -1.0, second_w = -1.0;
    for (int i = 0; i < d; ++i) {
        const double w = std::abs(pair.du(m, i));
        if (w > best_w) {
            second_w = best_w;
            second = best;
            best_w = w;
            best = i;
        } else if (w > second_w) {
            second_w = w;
            second = i;
        }
    }
    OptimalityReport rep;
    rep.best_mode = pair.modes[best];

    auto aligned_single = [&](int col, double energy) {
        ProbeSpec p;
        const Complex du_col = pair.du(m, col);
        p.entries.push_back(
            {pair.modes[col], std::sqrt(energy) * std::exp(Complex(0.0, -std::arg(du_col))), 0.0, 0.0});
        return p;
    };

    const auto cfi = homodyne_cfi(cfg, pair, aligned_single(best, n_photons), eta);
    rep.f_homodyne = cfi.value;
    rep.j_qfi = qfi_single_mode(pipeline_family(cfg, pair, aligned_single(best, n_photons), eta)).j;
    rep.formula = 4.0 * (1.0 - eta) * best_w * best_w * n_photons;
    rep.worst_violation = rel_diff(rep.f_homodyne, rep.j_qfi);

    if (second >= 0 && second_w > 0.0)
        rep.single_mode_margin =
            rep.f_homodyne - homodyne_cfi(cfg, pair, aligned_single(second, n_photons), eta).value;

    double wsum = 0.0;
    for (int i = 0; i < d; ++i) wsum += std::norm(pair.du(m, i));
    if (wsum > 0.0) {
        ProbeSpec spread;
        for (int i = 0; i < d; ++i) {
            const Complex w = pair.du(m, i);
            if (std::abs(w) < 1e-14) continue;
            const double energy = n_photons * std::norm(w) / wsum;
            spread.entries.push_back(
                {pair.modes[i], std::sqrt(energy) * std::exp(Complex(0.0, -std::arg(w))), 0.0, 0.0});
        }
        rep.coherent_spread_gain = homodyne_cfi(cfg, pair, spread, eta).value - rep.f_homodyne;
        if (rep.coherent_spread_gain > 1e-9 * std::max(1.0, rep.f_homodyne))
            rep.notes.push_back("several channels couple: displacement spread over them "
                                "adds the mean derivatives coherently and beats any single mode");
    }
    if (rel_diff(rep.f_homodyne, rep.formula) > 1e-9)
        rep.notes.push_back("homodyne CFI deviates from 4(1-eta) sum |dU|^2 |alpha|^2 "
                            "(scattering columns of this model are not unit-normalized)");
    return rep;
}

struct FisherReport {
    double n_total = 0.0;
    double eta = 0.0;
    double n_coh_opt = 0.0;
    double f_q = 0.0;
    double f_c = 0.0;
    double j = 0.0;
    double ratio = 1.0;
    std::vector<std::string> flags;
};

}  // namespace rotodop
