#include "doctest.h"

#include "rotodop/io.hpp"
#include "rotodop/reports.hpp"

#include <sstream>

#include <filesystem>
#include <fstream>

using namespace rotodop;

TEST_CASE("fp17 formatting round-trips doubles") {
    for (double v : {0.1, 1.0, -3.14159265358979, 1e-300, 2.2699288, 1.0 / 3.0}) {
        const std::string s = fp17(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("gaussian state json round trip is byte stable") {
    auto st = vacuum({ModeIndex{0, -1, 0}, ModeIndex{0, 0, 0}});
    st = squeeze(std::move(st), ModeIndex{0, 0, 0}, 0.7, 0.3);
    st = displace(std::move(st), ModeIndex{0, -1, 0}, Complex(1.0 / 3.0, -0.2));
    const std::string a = to_json_string(st);
    const auto back = gaussian_state_from_json_string(a);
    CHECK(to_json_string(back) == a);
    CHECK(back.modes == st.modes);
}

TEST_CASE("gaussian state json rejects malformed input") {
    CHECK_THROWS(gaussian_state_from_json_string("{"));
    CHECK_THROWS(gaussian_state_from_json_string(R"({"modes":[],"mean":[],"cov":[]})"));
    CHECK_THROWS(gaussian_state_from_json_string(
        R"({"modes":[[0,0,0]],"mean":[0,0,0],"cov":[[1,0],[0,1]]})"));
    CHECK_THROWS(gaussian_state_from_json_string(
        R"({"modes":[[0,0,0]],"mean":[0,0],"cov":[[1,0.5],[0,1]]})"));
}

TEST_CASE("surface configs parse and reject unknown keys") {
    const auto meta = surface_from_json(json::parse(R"({"type":"metasurface","delta_l":2})"));
    CHECK(std::get<Metasurface>(meta).delta_l_star == 2);
    const auto rough = surface_from_json(json::parse(
        R"({"type":"rough","epsilon":0.1,"sigma_l":1.0,"sigma_p":1.0,"phase_seed":42})"));
    CHECK(std::get<RoughGaussian>(rough).phases.is_seeded());
    CHECK_THROWS(surface_from_json(json::parse(R"({"type":"rough","epsilon":0.1})")));
    CHECK_THROWS(surface_from_json(json::parse(R"({"type":"metasurface","delta_l":2,"x":1})")));
    CHECK_THROWS(surface_from_json(json::parse(R"({"type":"mirror"})")));
    CHECK_THROWS(surface_from_json(json::parse(R"({"type":"metasurface","delta_l":0})")));
}

TEST_CASE("atomic writes leave no temporary behind") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "rotodop_io_test";
    fs::remove_all(dir);
    const fs::path target = dir / "out.csv";
    atomic_write(target, "a,b\n1,2\n");
    CHECK(fs::exists(target));
    CHECK_FALSE(fs::exists(dir / "out.csv.tmp"));
    std::ifstream in(target);
    std::string line;
    std::getline(in, line);
    CHECK(line == "a,b");
    fs::remove_all(dir);
}

TEST_CASE("csv writer enforces the column count") {
    CsvWriter csv({"x", "y"});
    csv.row({fp17(1.0), fp17(2.0)});
    CHECK_THROWS_AS(csv.row({"only-one"}), std::invalid_argument);
    CHECK(csv.str() == "x,y\n1,2\n");
}

TEST_CASE("transform pair export carries complex entries as [re, im]") {
    ProtocolConfig cfg;
    cfg.omega_in = 2.0e5;
    cfg.Omega0 = 15.0;
    cfg.basis = BasisParams{cfg.omega_in, 0.0, 0.0, 1.0};
    cfg.surface = Metasurface{1};
    cfg.measured = ModeIndex{0, 0, 0};
    cfg.trunc = Truncation{1, 1, 0};
    const auto pair = build_transform(cfg);
    const std::string text = to_json_string(pair);
    const auto parsed = json::parse(text);
    CHECK(parsed.at("u").size() == pair.modes.size());
    CHECK(parsed.at("input_support").size() == pair.input_support.size());
    CHECK(parsed.at("u").at(0).at(0).size() == 2);
}

TEST_CASE("figure data grids carry their closed-form anchor values") {
    // fig3: the eta = 0 column is exactly R = 1 + N
    std::istringstream fig3(figure3_csv(20));
    std::string line;
    std::getline(fig3, line);
    CHECK(line == "N,eta,R");
    int checked = 0;
    while (std::getline(fig3, line)) {
        double n, eta, r;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &n, &eta, &r) == 3);
        if (eta == 0.0) {
            CHECK(r == doctest::Approx(1.0 + n).epsilon(1e-14));
            ++checked;
        }
    }
    CHECK(checked == 20);
}

TEST_CASE("an empty sweep grid yields a header-only csv") {
    FisherSweepSettings s;
    s.surface = Metasurface{1};
    const std::string csv = fisher_sweep_csv(s);
    CHECK(csv == "N,eta,epsilon,sigma_l,N_coh_opt,F_Q,F_C,J,R,flags\n");
}

TEST_CASE("fisher sweep rows carry the advantage ratio") {
    FisherSweepSettings s;
    s.surface = Metasurface{1};
    s.n_grid = {20.0};
    s.eta_grid = {0.0};
    const std::string csv = fisher_sweep_csv(s);
    CHECK(csv.find("\n20,0,0,0,") != std::string::npos);
    CHECK(csv.find(",21,") != std::string::npos);  // R = 21 at eta = 0, N = 20
}

TEST_CASE("sweep output does not depend on the worker pool size") {
    FisherSweepSettings s;
    s.surface = RoughGaussian{0.1, 1.0, 1.0};
    s.probe_delta_l = 1;
    s.n_grid = {2.0, 5.0, 9.0};
    s.eta_grid = {0.0, 0.1, 0.3};
    CHECK(fisher_sweep_csv(s, 1) == fisher_sweep_csv(s, 4));
}
