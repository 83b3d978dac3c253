// estimator.hpp — seeded homodyne sampling and maximum-likelihood estimation
// of dOmega, with Cramér-Rao comparisons over replica ensembles.

#pragma once

#include "rotodop/fisher.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace rotodop {

// Deterministic normal sampler: mt19937_64 (output fully specified by the
// standard) with an explicit Box-Muller transform, so runs replay bit-exactly
// across implementations of the same choice.
inline constexpr const char* kRngAlgorithm = "mt19937_64/box-muller";

class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : eng_(seed) {}

    double standard() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1], u2 in [0, 1)
        const double u1 = 1.0 - static_cast<double>(eng_() >> 11) * 0x1.0p-53;
        const double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
        const double rad = std::sqrt(-2.0 * std::log(u1));
        spare_ = rad * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return rad * std::cos(2.0 * kPi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * standard(); }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

struct MeasurementRun {
    std::vector<double> samples;
    double d_omega_true = 0.0;
    std::uint64_t seed = 0;

    std::size_t count() const { return samples.size(); }
};

inline MeasurementRun sample_homodyne(const ProtocolConfig& cfg, const TransformPair& pair,
                                      const ProbeSpec& probe, double eta, double d_omega_true,
                                      std::size_t m_samples, std::uint64_t seed) {
    if (m_samples < 1) throw std::invalid_argument("sample_homodyne: need at least one sample");
    const auto fo = first_order_transform(cfg, pair, d_omega_true);
    if (fo.validity_warning)
        throw std::domain_error("sample_homodyne: d_omega_true outside first-order validity");
    const GaussianState in = probe_state(pair.modes, probe);
    const MeasuredMoments mm = propagate(cfg, pair, in, eta, d_omega_true);
    if (!(mm.cov(0, 0) > 0.0)) throw std::runtime_error("sample_homodyne: non-physical variance");
    const double sd = std::sqrt(mm.cov(0, 0));

    MeasurementRun run;
    run.d_omega_true = d_omega_true;
    run.seed = seed;
    run.samples.resize(m_samples);
    NormalSampler rng(seed);
    for (auto& q : run.samples) q = rng.normal(mm.mean(0), sd);
    return run;
}

struct EstimateReport {
    double d_omega_hat = 0.0;
    double stderr_hat = 0.0;  // from the observed information
    double crb = 0.0;         // 1 / sqrt(M * F)
    double ratio_var_to_crb = 0.0;
};

// Gaussian log-likelihood of the run in terms of the sufficient statistics;
// both the mean and the variance of the outcome model vary with dOmega.
inline EstimateReport mle_d_omega(const MeasurementRun& run, const ProtocolConfig& cfg,
                                  const TransformPair& pair, const ProbeSpec& probe, double eta) {
    const std::size_t m = run.count();
    if (m < 1) throw std::invalid_argument("mle_d_omega: empty run");
    double s1 = 0.0, s2 = 0.0;
    for (double q : run.samples) {
        s1 += q;
        s2 += q * q;
    }
    const double mean_hat = s1 / m;
    const double second_hat = s2 / m;

    const GaussianState in = probe_state(pair.modes, probe);
    auto loglik = [&](double x) {
        const MeasuredMoments mm = propagate(cfg, pair, in, eta, x);
        const double var = mm.cov(0, 0);
        const double mu = mm.mean(0);
        return -0.5 * (std::log(var) + (second_hat - 2.0 * mu * mean_hat + mu * mu) / var);
    };

    const auto cfi = homodyne_cfi(cfg, pair, probe, eta);
    const double fisher = cfi.value;
    if (!(fisher > 0.0)) throw std::runtime_error("mle_d_omega: zero Fisher information");

    // moment estimate as the center of the bounded search window
    const MeasuredMoments at0 = propagate(cfg, pair, in, eta, 0.0);
    double center = 0.0;
    if (std::abs(cfi.dqbar) > 0.0) center = (mean_hat - at0.mean(0)) / cfi.dqbar;
    const double half_width = 10.0 / std::sqrt(static_cast<double>(m) * fisher);
    const auto best = golden_section_max([&](double x) { return loglik(x); },
                                         center - half_width, center + half_width,
                                         1e-12 * std::max(1.0, half_width));

    if (std::abs(best.x - (center - half_width)) < 4e-12 * half_width ||
        std::abs(best.x - (center + half_width)) < 4e-12 * half_width)
        throw std::runtime_error("mle_d_omega: maximum pinned at the search boundary");

    EstimateReport rep;
    rep.d_omega_hat = best.x;
    const double h = std::max(1e-2 * half_width, 1e-14);
    const double obs_info = -static_cast<double>(m) *
        second_deriv_central([&](double x) { return loglik(x); }, best.x, h);
    if (!(obs_info > 0.0)) throw std::runtime_error("mle_d_omega: likelihood search did not converge");
    rep.stderr_hat = 1.0 / std::sqrt(obs_info);
    rep.crb = 1.0 / std::sqrt(static_cast<double>(m) * fisher);
    const double z = rep.stderr_hat / rep.crb;
    rep.ratio_var_to_crb = z * z;
    return rep;
}

struct ReplicaSummary {
    std::size_t replicas = 0;
    std::size_t m_samples = 0;
    double var_emp = 0.0;       // empirical variance of d_omega_hat
    double mean_hat = 0.0;      // mean of the estimates
    double crb_var = 0.0;       // 1 / (M F)
    double ratio = 0.0;         // var_emp * M * F
    double ratio_mc_err = 0.0;  // chi^2 spread of the variance estimate
    std::vector<EstimateReport> reports;
};

// Independent replicas with seeds base_seed + 1 ... base_seed + replicas; the
// aggregation is a pure fold so any evaluation order gives the same result.
inline ReplicaSummary run_replicas(const ProtocolConfig& cfg, const TransformPair& pair,
                                   const ProbeSpec& probe, double eta, double d_omega_true,
                                   std::size_t m_samples, std::size_t replicas,
                                   std::uint64_t base_seed = 0) {
    if (replicas < 1) throw std::invalid_argument("run_replicas: need at least one replica");
    ReplicaSummary sum;
    sum.replicas = replicas;
    sum.m_samples = m_samples;
    sum.reports.resize(replicas);
    for (std::size_t r = 0; r < replicas; ++r) {
        const auto run = sample_homodyne(cfg, pair, probe, eta, d_omega_true, m_samples,
                                         base_seed + r + 1);
        sum.reports[r] = mle_d_omega(run, cfg, pair, probe, eta);
    }
    double s1 = 0.0, s2 = 0.0;
    for (const auto& rep : sum.reports) {
        s1 += rep.d_omega_hat;
        s2 += rep.d_omega_hat * rep.d_omega_hat;
    }
    sum.mean_hat = s1 / replicas;
    sum.var_emp = s2 / replicas - sum.mean_hat * sum.mean_hat;
    if (replicas > 1) sum.var_emp *= static_cast<double>(replicas) / (replicas - 1.0);
    sum.crb_var = sum.reports.front().crb * sum.reports.front().crb;
    sum.ratio = sum.var_emp / sum.crb_var;
    if (replicas > 1) sum.ratio_mc_err = sum.ratio * std::sqrt(2.0 / (replicas - 1.0));
    return sum;
}

}  // namespace rotodop
