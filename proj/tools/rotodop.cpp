// rotodop — command-line driver for the rotational-Doppler estimation engine.
//
// Subcommands: fisher, figure, simulate, validate, kcoef, surface.
// Exit codes: 0 ok, 1 error, 2 ok with validity warnings.

#include "rotodop/reports.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace rotodop;

namespace {

std::vector<std::string> g_warnings;

void warn(const std::string& msg) {
    g_warnings.push_back(msg);
    std::cerr << "warning: " << msg << "\n";
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("malformed JSON in " + path + ": " + e.what());
    }
}

void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw std::runtime_error(where + ": unknown key '" + key + "'");
    }
}

void require_schema_version(const json& j, const std::string& where) {
    if (!j.contains("schema_version") || j.at("schema_version").get<int>() != 1)
        throw std::runtime_error(where + ": expected \"schema_version\": 1");
}

// grid entries are either explicit arrays or {"linspace": [lo, hi, count]}
std::vector<double> parse_grid_axis(const json& j, const std::string& where) {
    std::vector<double> out;
    if (j.is_array()) {
        for (const auto& v : j) out.push_back(v.get<double>());
        return out;
    }
    if (j.is_object() && j.contains("linspace")) {
        reject_unknown_keys(j, {"linspace"}, where);
        const auto& ls = j.at("linspace");
        if (!ls.is_array() || ls.size() != 3)
            throw std::runtime_error(where + ": linspace wants [lo, hi, count]");
        const double lo = ls.at(0).get<double>(), hi = ls.at(1).get<double>();
        const int count = ls.at(2).get<int>();
        if (count < 1) throw std::runtime_error(where + ": linspace count must be >= 1");
        for (int i = 0; i < count; ++i)
            out.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1.0));
        return out;
    }
    throw std::runtime_error(where + ": expected an array or {\"linspace\": [lo, hi, count]}");
}

int cmd_fisher(const std::string& config_path, int jobs) {
    const json j = load_json(config_path);
    require_schema_version(j, "fisher config");
    reject_unknown_keys(j, {"schema_version", "surface", "n", "sigma", "tau0", "probe_delta_l",
                            "grid", "output"},
                        "fisher config");
    FisherSweepSettings s;
    s.surface = surface_from_json(j.at("surface"), "fisher config.surface");
    s.measured_n = j.value("n", 0);
    s.sigma = j.value("sigma", 1.0);
    s.tau0 = j.value("tau0", 0.0);
    if (const auto* meta = std::get_if<Metasurface>(&s.surface))
        s.probe_delta_l = meta->delta_l_star;
    if (j.contains("probe_delta_l")) s.probe_delta_l = j.at("probe_delta_l").get<int>();
    if (std::holds_alternative<RoughGaussian>(s.surface) && s.probe_delta_l == 0)
        throw std::runtime_error("fisher config: probe_delta_l must be nonzero for rough surfaces");
    const auto& grid = j.at("grid");
    reject_unknown_keys(grid, {"N", "eta"}, "fisher config.grid");
    s.n_grid = parse_grid_axis(grid.at("N"), "fisher config.grid.N");
    s.eta_grid = parse_grid_axis(grid.at("eta"), "fisher config.grid.eta");
    for (double n : s.n_grid)
        if (!(n > 0.0)) throw std::runtime_error("fisher config: N must be > 0");
    for (double e : s.eta_grid)
        if (e < 0.0 || e > 1.0) throw std::runtime_error("fisher config: eta must be in [0,1]");

    const std::string csv = fisher_sweep_csv(s, resolve_jobs(jobs));
    atomic_write(j.at("output").get<std::string>(), csv);
    return 0;
}

int cmd_figure(const std::string& name, const std::string& out_dir) {
    fs::create_directories(out_dir);
    if (name == "fig2") {
        atomic_write(fs::path(out_dir) / "fig2.csv", figure2_csv());
    } else if (name == "fig3") {
        atomic_write(fs::path(out_dir) / "fig3.csv", figure3_csv());
        atomic_write(fs::path(out_dir) / "fig3_ncoh.csv", figure3_ncoh_csv());
    } else if (name == "fig4") {
        atomic_write(fs::path(out_dir) / "fig4.csv", figure4_csv());
    } else {
        throw std::runtime_error("unknown figure name: " + name +
                                 " (expected fig2, fig3 or fig4)");
    }
    return 0;
}

int cmd_simulate(const std::string& config_path, int jobs, std::optional<long long> replicas_flag) {
    const json j = load_json(config_path);
    require_schema_version(j, "simulate config");
    reject_unknown_keys(j, {"schema_version", "config_id", "surface", "n", "sigma", "tau0",
                            "omega_in", "Omega0", "probe_delta_l", "eta", "N", "n_coh", "strategy",
                            "d_omega_true", "M", "replicas", "base_seed", "output_prefix"},
                        "simulate config");
    SimulateSettings s;
    s.config_id = j.value("config_id", std::string("run"));
    s.cfg.omega_in = j.value("omega_in", 2.0e5);
    s.cfg.Omega0 = j.value("Omega0", 15.0);
    s.cfg.basis = BasisParams{s.cfg.omega_in, j.value("tau0", 0.0), 0.0, j.value("sigma", 1.0)};
    s.cfg.surface = surface_from_json(j.at("surface"), "simulate config.surface");
    s.cfg.measured = ModeIndex{j.value("n", 0), 0, 0};
    if (const auto* meta = std::get_if<Metasurface>(&s.cfg.surface))
        s.probe_delta_l = meta->delta_l_star;
    if (j.contains("probe_delta_l")) s.probe_delta_l = j.at("probe_delta_l").get<int>();
    s.cfg.delta_l_ref = s.probe_delta_l;
    const auto* rough = std::get_if<RoughGaussian>(&s.cfg.surface);
    const int l_window = rough
        ? std::max(std::abs(s.probe_delta_l), 8 * static_cast<int>(std::ceil(rough->sigma_l)))
        : std::abs(s.probe_delta_l);
    const int p_window = rough ? 7 * static_cast<int>(std::ceil(rough->sigma_p)) : 0;
    s.cfg.trunc = Truncation{s.cfg.measured.n + 2, std::max(1, l_window), p_window};
    s.eta = j.value("eta", 0.1);
    s.n_total = j.value("N", 20.0);
    if (j.contains("n_coh")) s.n_coh_override = j.at("n_coh").get<double>();
    s.d_omega_true = j.value("d_omega_true", 2e-3);
    s.m_samples = j.value("M", std::size_t{100000});
    s.replicas = j.value("replicas", std::size_t{200});
    if (replicas_flag) {
        if (*replicas_flag < 1) throw std::runtime_error("--replicas must be >= 1");
        s.replicas = static_cast<std::size_t>(*replicas_flag);
    }
    if (s.replicas < 1) throw std::runtime_error("simulate config: replicas must be >= 1");
    if (s.m_samples < 1) throw std::runtime_error("simulate config: M must be >= 1");
    s.base_seed = j.value("base_seed", std::uint64_t{0});
    const std::string prefix = j.at("output_prefix").get<std::string>();
    const std::string strategy = j.value("strategy", std::string("paired"));

    const auto pair = build_transform(s.cfg);
    for (const auto& w : pair.warnings) warn(w);
    if (first_order_transform(s.cfg, pair, s.d_omega_true).validity_warning)
        warn("d_omega_true is close to the first-order validity limit");

    std::vector<StrategyOutcome> outcomes;
    const int resolved_jobs = resolve_jobs(jobs);
    if (strategy == "quantum" || strategy == "paired")
        outcomes.push_back(run_strategy(s, pair, true, resolved_jobs));
    if (strategy == "classical" || strategy == "paired")
        outcomes.push_back(run_strategy(s, pair, false, resolved_jobs));
    if (outcomes.empty())
        throw std::runtime_error("simulate config: strategy must be quantum, classical or paired");

    for (const auto& o : outcomes)
        atomic_write(prefix + "_" + o.strategy + ".jsonl", replicas_jsonl(s, o));
    atomic_write(prefix + "_summary.csv", simulate_summary_csv(s, outcomes));
    return 0;
}

int cmd_validate(double tol_override) {
    const auto results = run_validation(tol_override);
    bool all_pass = true;
    for (const auto& r : results) {
        std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  worst=" << fp17(r.worst)
                  << "  gate=" << fp17(r.gate) << "\n";
        if (!r.note.empty()) std::cout << "      note: " << r.note << "\n";
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 1;
}

int cmd_kcoef(int n_max, std::vector<double> betas, double sigma, double omega_in, double tau0,
              double theta0, const std::string& out) {
    if (betas.empty()) betas = {0.0, 0.1, 0.5, 1.0, 3.0};
    BasisParams basis{omega_in, tau0, theta0, sigma};
    atomic_write(out, kcoef_csv(n_max, betas, basis));
    return 0;
}

int cmd_surface(const std::string& config_path, const std::string& height_csv, int l_window,
                int p_window, double w0, double wavelength, double refractive_index, double rms,
                const std::string& out) {
    if (!height_csv.empty()) {
        // sampled grid: rows "r,phi,h" over a rectangular (r, phi) lattice
        std::ifstream in(height_csv);
        if (!in) throw std::runtime_error("cannot open height grid: " + height_csv);
        std::vector<double> rs, phis;
        std::map<std::pair<double, double>, double> samples;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#' || line.rfind("r,", 0) == 0) continue;
            double r, phi, h;
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &r, &phi, &h) != 3)
                throw std::runtime_error("height grid: bad row '" + line + "'");
            rs.push_back(r);
            phis.push_back(phi);
            samples[{r, phi}] = h;
        }
        std::sort(rs.begin(), rs.end());
        rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
        std::sort(phis.begin(), phis.end());
        phis.erase(std::unique(phis.begin(), phis.end()), phis.end());
        std::vector<std::vector<double>> values(rs.size(), std::vector<double>(phis.size()));
        for (std::size_t i = 0; i < rs.size(); ++i)
            for (std::size_t jj = 0; jj < phis.size(); ++jj) {
                const auto it = samples.find({rs[i], phis[jj]});
                if (it == samples.end())
                    throw std::runtime_error("height grid: missing sample at a lattice point");
                values[i][jj] = it->second;
            }
        const auto field = height_field_from_grid(rs, phis, values, rms);
        LGGeometry geom{w0, wavelength, refractive_index};
        if (geom.wavenumber() * rms >= 0.1)
            warn("k * sigma_h is outside the weak-scattering regime");
        atomic_write(out, height_coeffs_csv(field, geom, geom.wavenumber(), l_window, p_window));
        return 0;
    }
    const json j = load_json(config_path);
    const SurfaceModel model = surface_from_json(j, "surface config");
    atomic_write(out, surface_csv(model, l_window, p_window));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rotational-Doppler estimation engine"};
    app.require_subcommand(1);
    app.fallthrough();
    int jobs = 1;
    app.add_option("--jobs", jobs, "worker pool size (ROTODOP_JOBS overrides)");

    std::string fisher_config;
    auto* fisher = app.add_subcommand("fisher", "Fisher-information sweep over a (N, eta) grid");
    fisher->add_option("--config", fisher_config, "JSON config")->required();

    std::string figure_name, figure_out = ".";
    auto* figure = app.add_subcommand("figure", "emit figure data grids as CSV");
    figure->add_option("--name", figure_name, "fig2 | fig3 | fig4")->required();
    figure->add_option("--out", figure_out, "output directory");

    std::string sim_config;
    long long replicas_flag = -1;
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo estimator runs");
    simulate->add_option("--config", sim_config, "JSON config")->required();
    simulate->add_option("--replicas", replicas_flag, "override the replica count");

    double tol_override = 0.0;
    auto* validate = app.add_subcommand("validate", "run all oracle cross-checks");
    validate->add_option("--tol", tol_override, "loosen every gate to at least this tolerance");

    int kn_max = 10;
    std::vector<double> kbetas;
    double ksigma = 1.0, komega = 12.0, ktau0 = 0.0, ktheta0 = 0.0;
    std::string kout = "kcoef.csv";
    auto* kcoef = app.add_subcommand("kcoef", "export basis-change coefficient tables");
    kcoef->add_option("--n-max", kn_max, "max temporal index");
    kcoef->add_option("--beta", kbetas, "carrier offsets in units of sigma");
    kcoef->add_option("--sigma", ksigma, "frequency width");
    kcoef->add_option("--omega-in", komega, "input carrier");
    kcoef->add_option("--tau0", ktau0, "time center");
    kcoef->add_option("--theta0", ktheta0, "input phase");
    kcoef->add_option("--out", kout, "output CSV");

    std::string surf_config, height_csv, surf_out = "surface.csv";
    int surf_lw = 6, surf_pw = 4;
    double surf_w0 = 1e-3, surf_wl = 1064e-9, surf_n = 1.0, surf_rms = 1e-9;
    auto* surface = app.add_subcommand("surface", "export scattering matrices");
    surface->add_option("--config", surf_config, "surface JSON config");
    surface->add_option("--height-csv", height_csv, "sampled height grid (r,phi,h rows)");
    surface->add_option("--l-window", surf_lw, "OAM window half-width");
    surface->add_option("--p-window", surf_pw, "radial window");
    surface->add_option("--w0", surf_w0, "waist radius (height grids)");
    surface->add_option("--wavelength", surf_wl, "wavelength (height grids)");
    surface->add_option("--refractive-index", surf_n, "refractive index (height grids)");
    surface->add_option("--rms", surf_rms, "height rms sigma_h (height grids)");
    surface->add_option("--out", surf_out, "output CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        int rc = 0;
        if (*fisher) rc = cmd_fisher(fisher_config, jobs);
        else if (*figure) rc = cmd_figure(figure_name, figure_out);
        else if (*simulate)
            rc = cmd_simulate(sim_config, jobs,
                              replicas_flag >= 0 ? std::optional<long long>(replicas_flag)
                                                 : std::nullopt);
        else if (*validate) rc = cmd_validate(tol_override);
        else if (*kcoef) rc = cmd_kcoef(kn_max, kbetas, ksigma, komega, ktau0, ktheta0, kout);
        else if (*surface) {
            if (surf_config.empty() && height_csv.empty())
                throw std::runtime_error("surface: need --config or --height-csv");
            rc = cmd_surface(surf_config, height_csv, surf_lw, surf_pw, surf_w0, surf_wl, surf_n,
                             surf_rms, surf_out);
        }
        if (rc != 0) return rc;
        return g_warnings.empty() ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
