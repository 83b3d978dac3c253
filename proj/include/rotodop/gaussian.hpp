// gaussian.hpp — finite-mode Gaussian states over an ordered mode set and the
// operations the protocol needs: preparation, linear mode transforms, loss,
// and single-mode homodyne statistics.
//
// Conventions, fixed here and assumed by every other module: hbar = 2,
// x = a^dag + a, p = i(a^dag - a), vacuum covariance = identity. The real
// basis is ordered (x_1, p_1, ..., x_d, p_d) with the mode list sorted
// lexicographically on (n, l, p).

#pragma once

#include "rotodop/modes.hpp"
#include "rotodop/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <vector>

namespace rotodop {

struct QuadratureStats {
    double mean = 0.0;
    double var = 1.0;
};

struct GaussianState {
    std::vector<ModeIndex> modes;  // sorted, duplicate-free
    Eigen::VectorXd mean;          // length 2d
    Eigen::MatrixXd cov;           // 2d x 2d, symmetric

    int dim() const { return static_cast<int>(modes.size()); }

    int index_of(const ModeIndex& m) const {
        const auto it = std::lower_bound(modes.begin(), modes.end(), m);
        if (it == modes.end() || *it != m)
            throw std::invalid_argument("GaussianState: mode " + to_string(m) + " not found");
        return static_cast<int>(it - modes.begin());
    }
};

// Block-diagonal symplectic form, one [[0,1],[-1,0]] block per mode.
inline Eigen::MatrixXd symplectic_form(int d) {
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * d, 2 * d);
    for (int k = 0; k < d; ++k) {
        omega(2 * k, 2 * k + 1) = 1.0;
        omega(2 * k + 1, 2 * k) = -1.0;
    }
    return omega;
}

inline GaussianState vacuum(std::vector<ModeIndex> modes) {
    if (modes.empty()) throw std::invalid_argument("vacuum: empty mode list");
    for (const auto& m : modes) validate(m);
    std::sort(modes.begin(), modes.end());
    if (std::adjacent_find(modes.begin(), modes.end()) != modes.end())
        throw std::invalid_argument("vacuum: duplicate mode in set");
    GaussianState st;
    const int d = static_cast<int>(modes.size());
    st.modes = std::move(modes);
    st.mean = Eigen::VectorXd::Zero(2 * d);
    st.cov = Eigen::MatrixXd::Identity(2 * d, 2 * d);
    return st;
}

inline GaussianState displace(GaussianState st, const ModeIndex& mode, Complex alpha) {
    const int k = st.index_of(mode);
    st.mean(2 * k) += 2.0 * alpha.real();
    st.mean(2 * k + 1) += 2.0 * alpha.imag();
    return st;
}

// Single-mode squeezed-vacuum preparation. Rejects anything but a vacuum block
// so that silent convention mismatches cannot creep in; displace afterwards.
inline GaussianState squeeze(GaussianState st, const ModeIndex& mode, double s, double theta) {
    if (s < 0.0) throw std::domain_error("squeeze: s must be >= 0");
    const int k = st.index_of(mode);
    const auto block = st.cov.block<2, 2>(2 * k, 2 * k);
    const bool vacuum_block = (block - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12 &&
        std::abs(st.mean(2 * k)) < 1e-12 && std::abs(st.mean(2 * k + 1)) < 1e-12;
    if (!vacuum_block)
        throw std::runtime_error("squeeze: mode block is not vacuum (preparation-only contract)");
    const double ch = std::cosh(2.0 * s), sh = std::sinh(2.0 * s);
    st.cov(2 * k, 2 * k) = ch - std::cos(theta) * sh;
    st.cov(2 * k + 1, 2 * k + 1) = ch + std::cos(theta) * sh;
    st.cov(2 * k, 2 * k + 1) = std::sin(theta) * sh;
    st.cov(2 * k + 1, 2 * k) = std::sin(theta) * sh;
    return st;
}

// Realification of a complex mode map: each scalar u becomes [[Re,-Im],[Im,Re]].
inline Eigen::MatrixXd realify(const Eigen::MatrixXcd& u) {
    const int d = static_cast<int>(u.rows());
    Eigen::MatrixXd t(2 * d, 2 * u.cols());
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < u.cols(); ++j) {
            const Complex v = u(i, j);
            t(2 * i, 2 * j) = v.real();
            t(2 * i, 2 * j + 1) = -v.imag();
            t(2 * i + 1, 2 * j) = v.imag();
            t(2 * i + 1, 2 * j + 1) = v.real();
        }
    }
    return t;
}

struct TransformOptions {
    double unitarity_tol = 1e-8;
    bool allow_nonunitary = false;  // first-order maps are unitary only up to O(dOmega^2)
};

inline GaussianState apply_complex_transform(GaussianState st, const Eigen::MatrixXcd& u,
                                             const TransformOptions& opt = {}) {
    const int d = st.dim();
    if (u.rows() != d || u.cols() != d)
        throw std::invalid_argument("apply_complex_transform: dimension mismatch");
    if (!opt.allow_nonunitary) {
        const double dev = (u.adjoint() * u - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff();
        if (dev > opt.unitarity_tol)
            throw std::runtime_error("apply_complex_transform: map is not unitary to tolerance");
    }
    const Eigen::MatrixXd t = realify(u);
    st.mean = t * st.mean;
    st.cov = t * st.cov * t.transpose();
    st.cov = 0.5 * (st.cov + st.cov.transpose().eval());
    return st;
}

// Vacuum admixture on one mode: Sigma -> (1-eta) Sigma + eta I on the block,
// sqrt(1-eta) on the mean and on every cross-covariance with other modes.
inline GaussianState loss_channel(GaussianState st, const ModeIndex& mode, double eta) {
    if (eta < 0.0 || eta > 1.0) throw std::domain_error("loss_channel: eta must be in [0,1]");
    const int k = st.index_of(mode);
    const int d = st.dim();
    const double root = std::sqrt(1.0 - eta);
    for (int r = 0; r < 2; ++r) {
        st.mean(2 * k + r) *= root;
        for (int c = 0; c < 2 * d; ++c) {
            st.cov(2 * k + r, c) *= root;
            st.cov(c, 2 * k + r) *= root;
        }
    }
    // the block picked up (1-eta); add the environment vacuum
    st.cov(2 * k, 2 * k) += eta;
    st.cov(2 * k + 1, 2 * k + 1) += eta;
    return st;
}

inline QuadratureStats homodyne_stats(const GaussianState& st, const ModeIndex& mode,
                                      double quadrature_angle = 0.0) {
    const int k = st.index_of(mode);
    const double c = std::cos(quadrature_angle), s = std::sin(quadrature_angle);
    QuadratureStats out;
    out.mean = c * st.mean(2 * k) + s * st.mean(2 * k + 1);
    out.var = c * c * st.cov(2 * k, 2 * k) + 2.0 * c * s * st.cov(2 * k, 2 * k + 1) +
        s * s * st.cov(2 * k + 1, 2 * k + 1);
    if (!(out.var > 0.0)) throw std::runtime_error("homodyne_stats: non-positive variance");
    return out;
}

inline double purity(const GaussianState& st, const ModeIndex& mode) {
    const int k = st.index_of(mode);
    const double det = st.cov(2 * k, 2 * k) * st.cov(2 * k + 1, 2 * k + 1) -
        st.cov(2 * k, 2 * k + 1) * st.cov(2 * k + 1, 2 * k);
    if (!(det > 0.0)) throw std::runtime_error("purity: singular covariance block");
    const double p = 1.0 / std::sqrt(det);
    if (p > 1.0 + 1e-10) throw std::runtime_error("purity: block violates the uncertainty relation");
    return p;
}

// <n> of one mode: |mean|^2/4 + (tr block - 2)/4.
inline double mean_photons(const GaussianState& st, const ModeIndex& mode) {
    const int k = st.index_of(mode);
    const double m2 = st.mean(2 * k) * st.mean(2 * k) + st.mean(2 * k + 1) * st.mean(2 * k + 1);
    const double tr = st.cov(2 * k, 2 * k) + st.cov(2 * k + 1, 2 * k + 1);
    return 0.25 * m2 + 0.25 * (tr - 2.0);
}

// Uncertainty relation: cov + i*Omega must be positive semidefinite.
inline double min_physicality_eigenvalue(const GaussianState& st) {
    const int d = st.dim();
    Eigen::MatrixXcd m = st.cov.cast<Complex>() + Complex(0.0, 1.0) * symplectic_form(d).cast<Complex>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("min_physicality_eigenvalue: eigensolver failed");
    return es.eigenvalues().minCoeff();
}

inline bool is_physical(const GaussianState& st, double tol = 1e-10) {
    const double sym = (st.cov - st.cov.transpose()).cwiseAbs().maxCoeff();
    if (sym > 1e-12 * std::max(1.0, st.cov.cwiseAbs().maxCoeff())) return false;
    return min_physicality_eigenvalue(st) >= -tol;
}

}  // namespace rotodop
