// io.hpp — deterministic text output (17 significant digits, '.' decimal,
// LF endings), atomic file writes, and JSON serialization of the core types.

#pragma once

#include "rotodop/gaussian.hpp"
#include "rotodop/surface.hpp"
#include "rotodop/transform.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace rotodop {

using nlohmann::json;

// Locale-independent formatting with 17 significant digits; round-trips any
// IEEE-754 double.
inline std::string fp17(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline std::string fp17(Complex v) { return fp17(v.real()) + "," + fp17(v.imag()); }

// Write-then-rename so readers never observe a partial file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    fs::create_directories(dir);
    const fs::path tmp = dir / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("atomic_write: write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) buf_ << ',';
            buf_ << header[i];
        }
        buf_ << '\n';
        columns_ = header.size();
    }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_) throw std::invalid_argument("CsvWriter: column count mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) buf_ << ',';
            buf_ << cells[i];
        }
        buf_ << '\n';
    }

    std::string str() const { return buf_.str(); }
    void write(const std::filesystem::path& path) const { atomic_write(path, buf_.str()); }

private:
    std::ostringstream buf_;
    std::size_t columns_ = 0;
};

// ------------------------- GaussianState <-> JSON ---------------------------

// {"modes": [[n,l,p], ...], "mean": [...], "cov": [[...], ...]}
inline std::string to_json_string(const GaussianState& st) {
    std::ostringstream out;
    out << "{\"modes\":[";
    for (int i = 0; i < st.dim(); ++i) {
        if (i) out << ',';
        out << '[' << st.modes[i].n << ',' << st.modes[i].l << ',' << st.modes[i].p << ']';
    }
    out << "],\"mean\":[";
    for (int i = 0; i < st.mean.size(); ++i) {
        if (i) out << ',';
        out << fp17(st.mean(i));
    }
    out << "],\"cov\":[";
    for (int r = 0; r < st.cov.rows(); ++r) {
        if (r) out << ',';
        out << '[';
        for (int c = 0; c < st.cov.cols(); ++c) {
            if (c) out << ',';
            out << fp17(st.cov(r, c));
        }
        out << ']';
    }
    out << "]}";
    return out.str();
}

inline GaussianState gaussian_state_from_json(const json& j) {
    GaussianState st;
    for (const auto& m : j.at("modes"))
        st.modes.push_back({m.at(0).get<int>(), m.at(1).get<int>(), m.at(2).get<int>()});
    if (st.modes.empty()) throw std::invalid_argument("gaussian_state_from_json: empty mode list");
    if (!std::is_sorted(st.modes.begin(), st.modes.end()) ||
        std::adjacent_find(st.modes.begin(), st.modes.end()) != st.modes.end())
        throw std::invalid_argument("gaussian_state_from_json: modes must be sorted and unique");
    const int d = static_cast<int>(st.modes.size());
    const auto& mean = j.at("mean");
    const auto& cov = j.at("cov");
    if (static_cast<int>(mean.size()) != 2 * d || static_cast<int>(cov.size()) != 2 * d)
        throw std::invalid_argument("gaussian_state_from_json: dimension mismatch");
    st.mean.resize(2 * d);
    st.cov.resize(2 * d, 2 * d);
    for (int i = 0; i < 2 * d; ++i) st.mean(i) = mean.at(i).get<double>();
    for (int r = 0; r < 2 * d; ++r) {
        if (static_cast<int>(cov.at(r).size()) != 2 * d)
            throw std::invalid_argument("gaussian_state_from_json: ragged covariance");
        for (int c = 0; c < 2 * d; ++c) st.cov(r, c) = cov.at(r).at(c).get<double>();
    }
    const double asym = (st.cov - st.cov.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, st.cov.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("gaussian_state_from_json: covariance not symmetric");
    return st;
}

inline GaussianState gaussian_state_from_json_string(const std::string& text) {
    return gaussian_state_from_json(json::parse(text));
}

// ------------------------- TransformPair -> JSON ----------------------------

// Complex entries as [re, im] pairs, for cross-implementation diffing.
inline std::string to_json_string(const TransformPair& pair) {
    std::ostringstream out;
    auto matrix = [&](const Eigen::MatrixXcd& m) {
        out << '[';
        for (int r = 0; r < m.rows(); ++r) {
            if (r) out << ',';
            out << '[';
            for (int c = 0; c < m.cols(); ++c) {
                if (c) out << ',';
                out << '[' << fp17(m(r, c).real()) << ',' << fp17(m(r, c).imag()) << ']';
            }
            out << ']';
        }
        out << ']';
    };
    out << "{\"modes\":[";
    for (std::size_t i = 0; i < pair.modes.size(); ++i) {
        if (i) out << ',';
        out << '[' << pair.modes[i].n << ',' << pair.modes[i].l << ',' << pair.modes[i].p << ']';
    }
    out << "],\"u\":";
    matrix(pair.u0);
    out << ",\"du_domega\":";
    matrix(pair.du);
    out << ",\"input_support\":[";
    for (std::size_t i = 0; i < pair.input_support.size(); ++i) {
        if (i) out << ',';
        out << '[' << pair.input_support[i].n << ',' << pair.input_support[i].l << ','
            << pair.input_support[i].p << ']';
    }
    out << "],\"row_tail\":" << fp17(pair.row_tail) << "}";
    return out.str();
}

// ------------------------------ surface configs ------------------------------

// {"type":"metasurface","delta_l":2} or
// {"type":"rough","epsilon":0.1,"sigma_l":1.0,"sigma_p":1.0,"phase_seed":42}
inline SurfaceModel surface_from_json(const json& j, const std::string& where = "surface") {
    if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
    const std::string type = j.at("type").get<std::string>();
    if (type == "metasurface") {
        for (const auto& [key, _] : j.items())
            if (key != "type" && key != "delta_l")
                throw std::invalid_argument(where + ": unknown key '" + key + "'");
        Metasurface m{j.at("delta_l").get<int>()};
        m.validate();
        return m;
    }
    if (type == "rough") {
        for (const auto& [key, _] : j.items())
            if (key != "type" && key != "epsilon" && key != "sigma_l" && key != "sigma_p" &&
                key != "phase_seed")
                throw std::invalid_argument(where + ": unknown key '" + key + "'");
        RoughGaussian r;
        r.epsilon = j.at("epsilon").get<double>();
        r.sigma_l = j.at("sigma_l").get<double>();
        r.sigma_p = j.at("sigma_p").get<double>();
        if (j.contains("phase_seed"))
            r.phases = PhaseTable::seeded(j.at("phase_seed").get<std::uint64_t>());
        r.validate();
        return r;
    }
    throw std::invalid_argument(where + ": unknown surface type '" + type + "'");
}

}  // namespace rotodop
