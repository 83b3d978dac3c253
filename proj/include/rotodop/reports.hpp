// reports.hpp — machine-readable report builders behind the command-line
// tool: Fisher sweeps, figure-data grids, estimator runs, coefficient tables,
// and the oracle cross-check battery. Everything returns deterministic text
// (17 significant digits, LF endings) so outputs are diffable byte for byte.

#pragma once

#include "rotodop/estimator.hpp"
#include "rotodop/fisher.hpp"
#include "rotodop/io.hpp"
#include "rotodop/kcoeff.hpp"

#include <atomic>
#include <functional>
#include <sstream>
#include <thread>

namespace rotodop {

// Deterministic worker pool: results land by index, any schedule gives the
// same output. ROTODOP_JOBS overrides the requested size.
inline int resolve_jobs(int requested) {
    if (const char* env = std::getenv("ROTODOP_JOBS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return std::max(1, requested);
}

inline void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
    if (jobs <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int n_threads = std::min<std::size_t>(jobs, count);
    std::vector<std::exception_ptr> errors(n_threads);
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// ------------------------------ fisher sweeps -------------------------------

struct SweepPoint {
    double n_total = 0.0;
    double eta = 0.0;
};

struct FisherSweepSettings {
    SurfaceModel surface = Metasurface{1};
    int measured_n = 0;
    double sigma = 1.0;
    double tau0 = 0.0;
    int probe_delta_l = 1;
    std::vector<double> n_grid;
    std::vector<double> eta_grid;
};

inline FisherReport fisher_point(const FisherSweepSettings& s, double n_total, double eta) {
    ProtocolConfig cfg;
    cfg.omega_in = 2.0e5;
    cfg.Omega0 = 0.0;
    cfg.basis = BasisParams{cfg.omega_in, s.tau0, 0.0, s.sigma};
    cfg.surface = s.surface;
    cfg.measured = ModeIndex{s.measured_n, 0, 0};
    cfg.trunc = Truncation{s.measured_n + 2, std::max(1, std::abs(s.probe_delta_l)), 0};

    const auto alloc = optimize_allocation(n_total, eta, s.surface);
    const double n_coh = alloc.n_coh_closed;
    const double n_sq = n_total - n_coh;
    FisherReport rep;
    rep.n_total = n_total;
    rep.eta = eta;
    rep.n_coh_opt = n_coh;
    rep.f_q = quantum_cfi_closed(cfg, n_coh, n_sq, eta, s.probe_delta_l);
    rep.f_c = classical_cfi_closed(cfg, n_total, eta, s.probe_delta_l);
    rep.ratio = alloc.r_closed;
    rep.j = qfi_closed_forms(cfg, n_coh, n_sq, eta, s.probe_delta_l);
    return rep;
}

inline std::string fisher_sweep_csv(const FisherSweepSettings& s, int jobs = 1) {
    double epsilon = 0.0, sigma_l = 0.0;
    if (const auto* rough = std::get_if<RoughGaussian>(&s.surface)) {
        epsilon = rough->epsilon;
        sigma_l = rough->sigma_l;
    }
    std::vector<SweepPoint> points;
    for (double n : s.n_grid)
        for (double eta : s.eta_grid) points.push_back({n, eta});
    std::vector<FisherReport> reports(points.size());
    parallel_for(points.size(), jobs,
                 [&](std::size_t i) { reports[i] = fisher_point(s, points[i].n_total, points[i].eta); });

    CsvWriter csv({"N", "eta", "epsilon", "sigma_l", "N_coh_opt", "F_Q", "F_C", "J", "R", "flags"});
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& r = reports[i];
        std::string flags;
        for (const auto& f : r.flags) flags += (flags.empty() ? "" : ";") + f;
        csv.row({fp17(r.n_total), fp17(r.eta), fp17(epsilon), fp17(sigma_l), fp17(r.n_coh_opt),
                 fp17(r.f_q), fp17(r.f_c), fp17(r.j), fp17(r.ratio), flags});
    }
    return csv.str();
}

// ------------------------------- figure grids -------------------------------

// F_Q / F_C over the (N_sq, N_coh) plane at eta = 0.1 for the OAM-shifting
// mirror; the ratio depends only on the energies and the noise.
inline std::string figure2_csv(double eta = 0.1, double max_n = 30.0, double step = 0.25) {
    CsvWriter csv({"N_sq", "N_coh", "ratio"});
    const NoiseSplit ns = noise_split(Metasurface{1}, eta);
    for (double n_sq = step; n_sq <= max_n + 1e-12; n_sq += step) {
        for (double n_coh = step; n_coh <= max_n + 1e-12; n_coh += step) {
            const double n_total = n_sq + n_coh;
            const double ratio = (n_coh / n_total) / (ns.a * exp_minus_2s(n_sq) + ns.b);
            csv.row({fp17(n_sq), fp17(n_coh), fp17(ratio)});
        }
    }
    return csv.str();
}

inline std::string figure3_csv(int n_max = 100) {
    CsvWriter csv({"N", "eta", "R"});
    for (double eta : {0.0, 0.05, 0.1, 0.2, 0.5})
        for (int n = 1; n <= n_max; ++n)
            csv.row({fp17(n), fp17(eta), fp17(ratio_closed_form(n, noise_split(Metasurface{1}, eta)))});
    return csv.str();
}

inline std::string figure3_ncoh_csv(int n_max = 100) {
    CsvWriter csv({"N", "eta", "N_coh_over_N"});
    for (double eta : {0.0, 0.05, 0.1, 0.2, 0.5})
        for (int n = 1; n <= n_max; ++n)
            csv.row({fp17(n), fp17(eta),
                     fp17(ncoh_closed_form(n, noise_split(Metasurface{1}, eta)) / n)});
    return csv.str();
}

inline std::string figure4_csv(double n_total = 20.0) {
    CsvWriter csv({"eta", "epsilon", "R", "advantage"});
    for (int ie = 0; ie <= 100; ++ie) {
        const double eta = 0.01 * ie;
        for (int je = 0; je <= 100; ++je) {
            const double eps = 0.002 * je;
            const NoiseSplit ns = noise_split(RoughGaussian{eps, 1.0, 1.0}, eta);
            const double r = ratio_closed_form(n_total, ns);
            csv.row({fp17(eta), fp17(eps), fp17(r), r > 1.0 + 1e-12 ? "1" : "0"});
        }
    }
    return csv.str();
}

// ----------------------------- estimator reports ----------------------------

struct SimulateSettings {
    std::string config_id = "run";
    ProtocolConfig cfg;
    int probe_delta_l = 1;
    double eta = 0.1;
    double n_total = 20.0;
    std::optional<double> n_coh_override;  // default: optimal split
    double d_omega_true = 2e-3;
    std::size_t m_samples = 100000;
    std::size_t replicas = 200;
    std::uint64_t base_seed = 0;
};

struct StrategyOutcome {
    std::string strategy;
    ReplicaSummary summary;
    double fisher = 0.0;
};

inline StrategyOutcome run_strategy(const SimulateSettings& s, const TransformPair& pair,
                                    bool quantum, int jobs) {
    double n_coh = s.n_total;
    if (quantum) {
        n_coh = s.n_coh_override
            ? *s.n_coh_override
            : optimize_allocation(s.n_total, s.eta, s.cfg.surface).n_coh_closed;
    }
    const ProbeSpec probe =
        quantum_probe(s.cfg, pair, s.probe_delta_l, n_coh, quantum ? s.n_total - n_coh : 0.0);

    StrategyOutcome out;
    out.strategy = quantum ? "quantum" : "classical";
    out.fisher = homodyne_cfi(s.cfg, pair, probe, s.eta).value;

    ReplicaSummary sum;
    sum.replicas = s.replicas;
    sum.m_samples = s.m_samples;
    sum.reports.resize(s.replicas);
    parallel_for(s.replicas, jobs, [&](std::size_t r) {
        const auto run = sample_homodyne(s.cfg, pair, probe, s.eta, s.d_omega_true, s.m_samples,
                                         s.base_seed + r + 1);
        sum.reports[r] = mle_d_omega(run, s.cfg, pair, probe, s.eta);
    });
    double s1 = 0.0, s2 = 0.0;
    for (const auto& rep : sum.reports) {
        s1 += rep.d_omega_hat;
        s2 += rep.d_omega_hat * rep.d_omega_hat;
    }
    sum.mean_hat = s1 / s.replicas;
    sum.var_emp = s2 / s.replicas - sum.mean_hat * sum.mean_hat;
    if (s.replicas > 1) sum.var_emp *= double(s.replicas) / (s.replicas - 1.0);
    sum.crb_var = sum.reports.front().crb * sum.reports.front().crb;
    sum.ratio = sum.var_emp / sum.crb_var;
    if (s.replicas > 1) sum.ratio_mc_err = sum.ratio * std::sqrt(2.0 / (s.replicas - 1.0));
    out.summary = std::move(sum);
    return out;
}

inline std::string replicas_jsonl(const SimulateSettings& s, const StrategyOutcome& out) {
    std::ostringstream os;
    os << "{\"config_id\":\"" << s.config_id << "\",\"strategy\":\"" << out.strategy
       << "\",\"rng\":\"" << kRngAlgorithm << "\",\"M\":" << s.m_samples
       << ",\"d_omega_true\":" << fp17(s.d_omega_true)
       << ",\"units\":{\"dOmega\":\"rad/s\",\"fisher\":\"(rad/s)^-2\"}}\n";
    for (std::size_t r = 0; r < out.summary.reports.size(); ++r) {
        const auto& rep = out.summary.reports[r];
        os << "{\"seed\":" << (s.base_seed + r + 1) << ",\"dOmega_hat\":" << fp17(rep.d_omega_hat)
           << ",\"stderr\":" << fp17(rep.stderr_hat) << "}\n";
    }
    return os.str();
}

inline std::string simulate_summary_csv(const SimulateSettings& s,
                                        const std::vector<StrategyOutcome>& outcomes) {
    CsvWriter csv({"config_id", "strategy", "M", "replicas", "var_emp", "crb", "ratio",
                   "var_classical_over_quantum"});
    double var_q = 0.0, var_c = 0.0;
    for (const auto& o : outcomes) {
        if (o.strategy == "quantum") var_q = o.summary.var_emp;
        if (o.strategy == "classical") var_c = o.summary.var_emp;
    }
    const bool paired = var_q > 0.0 && var_c > 0.0;
    for (const auto& o : outcomes) {
        csv.row({s.config_id, o.strategy, std::to_string(s.m_samples), std::to_string(s.replicas),
                 fp17(o.summary.var_emp), fp17(std::sqrt(o.summary.crb_var)),
                 fp17(o.summary.ratio), paired ? fp17(var_c / var_q) : ""});
    }
    return csv.str();
}

// ------------------------------- kcoef tables -------------------------------

inline std::string kcoef_csv(int n_max, const std::vector<double>& betas, const BasisParams& basis) {
    CsvWriter csv({"n", "m", "beta", "re", "im", "oracle_re", "oracle_im", "abs_err"});
    for (double beta : betas) {
        const double omega_out = basis.omega0 - beta * basis.sigma;
        for (int n = 0; n <= n_max; ++n) {
            for (int m = 0; m <= n_max; ++m) {
                const Complex closed = k_coefficient(m, n, beta);
                const auto oracle = k_oracle(m, n, basis.omega0, omega_out, basis);
                csv.row({std::to_string(n), std::to_string(m), fp17(beta), fp17(closed.real()),
                         fp17(closed.imag()), fp17(oracle.value.real()), fp17(oracle.value.imag()),
                         fp17(std::abs(closed - oracle.value))});
            }
        }
    }
    return csv.str();
}

// ------------------------------ surface tables ------------------------------

inline std::string surface_csv(const SurfaceModel& model, int l_window, int p_window) {
    CsvWriter csv({"l_out", "p_out", "l_in", "p_in", "re", "im"});
    for (int li = -l_window; li <= l_window; ++li)
        for (int pi = 0; pi <= p_window; ++pi)
            for (int lo = -l_window; lo <= l_window; ++lo)
                for (int po = 0; po <= p_window; ++po) {
                    const Complex c = scatter_coeff(model, lo, po, li, pi);
                    if (c == Complex(0.0, 0.0)) continue;
                    csv.row({std::to_string(lo), std::to_string(po), std::to_string(li),
                             std::to_string(pi), fp17(c.real()), fp17(c.imag())});
                }
    return csv.str();
}

inline std::string height_coeffs_csv(const HeightField& field, const LGGeometry& geom, double k,
                                     int l_window, int p_window) {
    CsvWriter csv({"l_out", "p_out", "l_in", "p_in", "re", "im", "quad_err", "weak_scattering_ok"});
    for (int li = -l_window; li <= l_window; ++li)
        for (int pi = 0; pi <= p_window; ++pi)
            for (int lo = -l_window; lo <= l_window; ++lo)
                for (int po = 0; po <= p_window; ++po) {
                    const auto c = height_field_coeffs(field, geom, k, lo, po, li, pi);
                    csv.row({std::to_string(lo), std::to_string(po), std::to_string(li),
                             std::to_string(pi), fp17(c.value.real()), fp17(c.value.imag()),
                             fp17(c.quad_error), c.weak_scattering_ok ? "1" : "0"});
                }
    return csv.str();
}

// ---------------------------- oracle cross-checks ---------------------------

struct CheckResult {
    std::string name;
    bool pass = false;
    double worst = 0.0;   // worst observed deviation
    double gate = 0.0;    // tolerance it was held against
    std::string note;
};

// The release-gate battery: every closed form against its independent oracle.
// tol_override, when positive, loosens every gate to at least that value.
inline std::vector<CheckResult> run_validation(double tol_override = 0.0) {
    std::vector<CheckResult> results;
    auto push = [&](std::string name, double worst, double gate, std::string note = "") {
        const double eff = std::max(gate, tol_override);
        results.push_back({std::move(name), worst <= eff, worst, eff, std::move(note)});
    };

    {  // K at zero carrier offset is the identity
        double worst = 0.0;
        for (int n = 0; n <= 10; ++n)
            for (int m = 0; m <= 10; ++m)
                worst = std::max(worst,
                                 std::abs(k_coefficient(m, n, 0.0) - ((m == n) ? 1.0 : 0.0)));
        push("kcoef-identity-at-zero", worst, 1e-12);
    }
    {  // closed form against the quadrature oracle
        const BasisParams basis{12.0, 0.35, 0.6, 1.0};
        double worst = 0.0;
        for (double beta : {0.1, 0.5, 1.0, 3.0}) {
            for (int n = 0; n <= 8; ++n)
                for (int m = 0; m <= 8; ++m) {
                    const auto oracle =
                        k_oracle(m, n, basis.omega0, basis.omega0 - beta * basis.sigma, basis);
                    const Complex closed = k_coefficient(m, n, beta);
                    const double gap = std::abs(closed - oracle.value);
                    const double scale = std::max({std::abs(closed), std::abs(oracle.value), 1e-4});
                    worst = std::max(worst, gap / scale);
                }
        }
        push("kcoef-vs-quadrature", worst, 1e-8);
    }
    {  // Parseval column mass
        double worst = 0.0;
        for (double beta : {0.1, 0.5, 1.0, 3.0})
            for (int n = 0; n <= 8; ++n) {
                double acc = 0.0;
                for (int m = 0; m <= n + 60; ++m) acc += std::norm(k_coefficient(m, n, beta));
                worst = std::max(worst, std::abs(acc - 1.0));
            }
        push("kcoef-parseval", worst, 1e-8);
    }
    {  // metasurface QFI closed form vs generic evaluation through the pipeline
        ProtocolConfig cfg;
        cfg.omega_in = 2.0e5;
        cfg.Omega0 = 15.0;
        cfg.basis = BasisParams{cfg.omega_in, 0.7, 0.0, 1.3};
        cfg.surface = Metasurface{2};
        cfg.measured = ModeIndex{1, 0, 0};
        cfg.trunc = Truncation{3, 2, 0};
        const auto pair = build_transform(cfg);
        double worst = 0.0;
        for (double eta : {0.0, 0.1, 0.5})
            for (double n_sq : {0.0, 2.0, 8.0}) {
                const auto probe = quantum_probe(cfg, pair, 2, 3.0, n_sq);
                const auto qfi = qfi_single_mode(pipeline_family(cfg, pair, probe, eta));
                worst = std::max(worst, rel_diff(qfi.j, qfi_closed_meta(cfg, 3.0, n_sq, eta)));
            }
        push("qfi-meta-vs-generic", worst, 1e-9);
    }
    {  // rough-surface QFI closed form vs generic evaluation
        ProtocolConfig cfg;
        cfg.omega_in = 2.0e5;
        cfg.Omega0 = 0.0;
        cfg.basis = BasisParams{cfg.omega_in, 0.0, 0.0, 1.0};
        cfg.surface = RoughGaussian{0.1, 1.0, 1.0};
        cfg.measured = ModeIndex{0, 0, 0};
        cfg.trunc = Truncation{2, 8, 7};
        cfg.delta_l_ref = 1;
        double worst = 0.0;
        for (double eta : {0.0, 0.1, 0.5})
            for (double n_sq : {0.0, 2.0, 8.0}) {
                const auto qfi = qfi_single_mode(cs_protocol_family(cfg, 4.0, n_sq, eta, 1));
                worst = std::max(worst, rel_diff(qfi.j, qfi_closed_cs(cfg, 4.0, n_sq, eta, 1)));
            }
        push("qfi-cs-vs-generic", worst, 1e-9);
    }
    {  // allocation optimizer: numeric maximization vs closed forms
        double worst = 0.0;
        for (double eta : {0.0, 0.05, 0.1, 0.2, 0.5, 0.9})
            for (double n : {1.0, 20.0, 100.0}) {
                const auto rep = optimize_allocation(n, eta, Metasurface{1});
                worst = std::max(worst, rel_diff(rep.r_numeric, rep.r_closed));
                worst = std::max(worst, std::abs(rep.n_coh_numeric - rep.n_coh_closed) / n);
            }
        for (double eta : {0.0, 0.1, 0.4})
            for (double eps : {0.05, 0.2}) {
                const auto rep = optimize_allocation(20.0, eta, RoughGaussian{eps, 1.0, 1.0});
                worst = std::max(worst, rel_diff(rep.r_numeric, rep.r_closed));
            }
        push("optimizer-vs-closed-form", worst, 1e-6);
    }
    {  // column norms: windowed sums vs their analytic values
        double worst = std::abs(column_norm_check(SurfaceModel{Metasurface{2}}, 0, 0, 4, 2) - 1.0);
        double excess = 0.0;
        for (double eps : {0.05, 0.1, 0.2})
            for (double sig : {0.5, 1.0, 2.0}) {
                RoughGaussian rough{eps, sig, sig};
                const int win = 10 * static_cast<int>(std::ceil(sig)) + 2;
                const double sum = column_norm_check(SurfaceModel{rough}, 0, 3, win, win + 3);
                worst = std::max(worst, std::abs(sum - rough_column_norm_expected(rough, 3)));
                excess = std::max(excess, std::abs(sum - 1.0));
            }
        push("column-norms-vs-lattice-sum", worst, 1e-10,
             "diffuse columns exceed 1 by up to " + fp17(excess) +
                 " (the displayed normalization constant does not cancel the 2D mass)");
    }
    {  // homodyne CFI through the pipeline vs the displayed closed form
        ProtocolConfig cfg;
        cfg.omega_in = 2.0e5;
        cfg.Omega0 = 15.0;
        cfg.basis = BasisParams{cfg.omega_in, 0.0, 0.0, 1.0};
        cfg.surface = Metasurface{1};
        cfg.measured = ModeIndex{0, 0, 0};
        cfg.trunc = Truncation{2, 1, 0};
        const auto pair = build_transform(cfg);
        double worst = 0.0;
        for (double eta : {0.0, 0.1, 0.5})
            for (auto [nc, ns] : {std::pair{1.0, 0.0}, {5.0, 5.0}}) {
                const auto probe = quantum_probe(cfg, pair, 1, nc, ns);
                const auto cfi = homodyne_cfi(cfg, pair, probe, eta);
                worst = std::max(worst, rel_diff(cfi.value, quantum_cfi_closed(cfg, nc, ns, eta, 1)));
            }
        push("homodyne-cfi-vs-closed-form", worst, 1e-9);
    }
    return results;
}

}  // namespace rotodop
