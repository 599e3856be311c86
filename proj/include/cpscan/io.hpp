#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "cpscan/bounds.hpp"
#include "cpscan/detect.hpp"
#include "cpscan/genmodel.hpp"
#include "cpscan/metrics.hpp"
#include "cpscan/version.hpp"

namespace cpscan::io {

using nlohmann::json;

/// Malformed or unreadable input artifacts (distinct from usage errors).
class io_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal rendering of a double.
inline std::string dtos(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view tok, const std::string& where) {
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw io_error(where + ": cannot parse '" + std::string(tok) + "' as a number");
    return v;
}

inline std::int64_t parse_int(std::string_view tok, const std::string& where) {
    std::int64_t v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw io_error(where + ": cannot parse '" + std::string(tok) + "' as an integer");
    return v;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw io_error("read failure on '" + path + "'");
    return ss.str();
}

inline void write_text_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw io_error("write failure on '" + path + "'");
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == sep) {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == '\n') {
            std::string_view l = text.substr(start, i - start);
            if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
            out.push_back(l);
            start = i + 1;
        }
    }
    while (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// dataset CSV: header "t,seq_0,...,seq_{N-1}", one row per time index 1..T
// ---------------------------------------------------------------------------

inline std::string dataset_to_csv(const std::vector<std::vector<double>>& cols) {
    if (cols.empty()) throw std::invalid_argument("dataset_to_csv: no sequences");
    const std::size_t T = cols.front().size();
    for (const auto& c : cols)
        if (c.size() != T)
            throw std::invalid_argument("dataset_to_csv: sequences of unequal length");
    std::string out = "t";
    for (std::size_t n = 0; n < cols.size(); ++n) out += ",seq_" + std::to_string(n);
    out += '\n';
    for (std::size_t t = 0; t < T; ++t) {
        out += std::to_string(t + 1);
        for (const auto& c : cols) {
            out += ',';
            out += dtos(c[t]);
        }
        out += '\n';
    }
    return out;
}

inline std::string dataset_to_csv(const MultiseqDataset& ds) {
    std::vector<std::vector<double>> cols;
    cols.reserve(ds.seqs.size());
    for (const auto& s : ds.seqs) cols.push_back(s.x);
    return dataset_to_csv(cols);
}

struct DatasetCsv {
    std::int64_t T = 0;
    std::int64_t N = 0;
    std::vector<std::vector<double>> cols; // per sequence, length T
};

inline DatasetCsv parse_dataset_csv(std::string_view text) {
    const auto lines = detail::lines_of(text);
    if (lines.empty()) throw io_error("dataset CSV: empty file");
    const auto header = detail::split(lines[0], ',');
    if (header.size() < 2 || header[0] != "t")
        throw io_error("dataset CSV line 1: header must be t,seq_0,...");
    for (std::size_t n = 1; n < header.size(); ++n)
        if (header[n] != "seq_" + std::to_string(n - 1))
            throw io_error("dataset CSV line 1: column " + std::to_string(n + 1) +
                           " must be named seq_" + std::to_string(n - 1));
    DatasetCsv ds;
    ds.N = static_cast<std::int64_t>(header.size()) - 1;
    ds.T = static_cast<std::int64_t>(lines.size()) - 1;
    if (ds.T < 1) throw io_error("dataset CSV: no data rows");
    ds.cols.assign(static_cast<std::size_t>(ds.N),
                   std::vector<double>(static_cast<std::size_t>(ds.T)));
    for (std::int64_t t = 1; t <= ds.T; ++t) {
        const std::string where = "dataset CSV line " + std::to_string(t + 1);
        const auto toks = detail::split(lines[static_cast<std::size_t>(t)], ',');
        if (static_cast<std::int64_t>(toks.size()) != ds.N + 1)
            throw io_error(where + ": expected " + std::to_string(ds.N + 1) +
                           " fields, got " + std::to_string(toks.size()));
        if (parse_int(toks[0], where) != t)
            throw io_error(where + ": time index must be " + std::to_string(t));
        for (std::int64_t n = 0; n < ds.N; ++n)
            ds.cols[static_cast<std::size_t>(n)][static_cast<std::size_t>(t - 1)] =
                parse_double(toks[static_cast<std::size_t>(n + 1)], where);
    }
    return ds;
}

// ---------------------------------------------------------------------------
// intensity CSV: header "t,a", one row per step index 1..T-1
// ---------------------------------------------------------------------------

inline std::string intensity_to_csv(std::span<const double> a) {
    std::string out = "t,a\n";
    for (std::size_t k = 0; k < a.size(); ++k) {
        out += std::to_string(k + 1);
        out += ',';
        out += dtos(a[k]);
        out += '\n';
    }
    return out;
}

inline std::vector<double> parse_intensity_csv(std::string_view text) {
    const auto lines = detail::lines_of(text);
    if (lines.empty() || detail::split(lines[0], ',') !=
                             std::vector<std::string_view>{"t", "a"})
        throw io_error("intensity CSV line 1: header must be t,a");
    std::vector<double> a;
    a.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string where = "intensity CSV line " + std::to_string(i + 1);
        const auto toks = detail::split(lines[i], ',');
        if (toks.size() != 2) throw io_error(where + ": expected 2 fields");
        if (parse_int(toks[0], where) != static_cast<std::int64_t>(i))
            throw io_error(where + ": step index must be " + std::to_string(i));
        a.push_back(parse_double(toks[1], where));
    }
    return a;
}

// ---------------------------------------------------------------------------
// ground-truth sidecar JSON
// ---------------------------------------------------------------------------

inline json truth_to_json(const MultiseqDataset& ds, json config = json::object()) {
    json seqs = json::array();
    for (const auto& s : ds.seqs) {
        seqs.push_back({{"mu0", s.truth.mu.empty() ? 0.0 : s.truth.mu.front()},
                        {"tau", s.truth.tau},
                        {"delta", s.truth.delta}});
    }
    return json{{"version", version_string},
                {"T", ds.size_T()},
                {"N", ds.size_N()},
                {"sigma_x", ds.sigma_x},
                {"a", ds.a},
                {"sequences", std::move(seqs)},
                {"config", std::move(config)}};
}

struct TruthFile {
    std::int64_t T = 0;
    std::int64_t N = 0;
    double sigma_x = 1.0;
    std::vector<double> a;
    std::vector<GroundTruth> truths;
    json config;
};

inline TruthFile truth_from_json(const json& j) {
    TruthFile tf;
    try {
        tf.T = j.at("T").get<std::int64_t>();
        tf.N = j.at("N").get<std::int64_t>();
        tf.sigma_x = j.at("sigma_x").get<double>();
        tf.a = j.at("a").get<std::vector<double>>();
        if (j.contains("config")) tf.config = j.at("config");
        for (const auto& s : j.at("sequences")) {
            GroundTruth gt;
            gt.tau = s.at("tau").get<std::vector<std::int64_t>>();
            gt.delta = s.at("delta").get<std::vector<double>>();
            gt.a = tf.a;
            // rebuild the mean path by replaying the jumps
            gt.mu.assign(static_cast<std::size_t>(tf.T), 0.0);
            double mu = s.at("mu0").get<double>();
            std::size_t next = 0;
            for (std::int64_t t = 0; t < tf.T; ++t) {
                if (next < gt.tau.size() && gt.tau[next] == t) {
                    mu += gt.delta[next];
                    ++next;
                }
                gt.mu[static_cast<std::size_t>(t)] = mu;
            }
            tf.truths.push_back(std::move(gt));
        }
    } catch (const json::exception& e) {
        throw io_error(std::string("truth JSON: ") + e.what());
    }
    if (static_cast<std::int64_t>(tf.truths.size()) != tf.N)
        throw io_error("truth JSON: N does not match the number of sequences");
    if (static_cast<std::int64_t>(tf.a.size()) != tf.T - 1)
        throw io_error("truth JSON: intensity length must be T - 1");
    return tf;
}

inline json parse_json_text(std::string_view text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw io_error(what + ": malformed JSON");
    return j;
}

// ---------------------------------------------------------------------------
// detection results JSON
// ---------------------------------------------------------------------------

inline const char* mode_name(DetectorConfig::Mode m) {
    return m == DetectorConfig::Mode::plain ? "plain" : "extended";
}

inline const char* boundary_name(DetectorConfig::Boundary b) {
    return b == DetectorConfig::Boundary::strict ? "strict" : "clip";
}

inline DetectorConfig::Boundary boundary_from_name(const std::string& name) {
    if (name == "strict") return DetectorConfig::Boundary::strict;
    if (name == "clip") return DetectorConfig::Boundary::clip;
    throw io_error("unknown boundary policy '" + name + "' (expected strict or clip)");
}

inline json detections_to_json(const std::vector<DetectionResult>& results,
                               const DetectorConfig& cfg, std::int64_t T) {
    json seqs = json::array();
    for (const auto& det : results) {
        json intervals = json::array();
        json profiles = json::array();
        for (std::size_t k = 0; k < det.size(); ++k) {
            intervals.push_back({det.intervals[k].u, det.intervals[k].v});
            profiles.push_back(
                {{"offset", det.log_profiles[k].offset}, {"w", det.log_profiles[k].w}});
        }
        seqs.push_back({{"tau_hat", det.tau_hat},
                        {"intervals", std::move(intervals)},
                        {"window_exponent", det.window_exponent},
                        {"fallback", det.fallback},
                        {"log_profiles", std::move(profiles)}});
    }
    return json{{"version", version_string},
                {"T", T},
                {"c_scan", cfg.c_scan},
                {"rho", cfg.rho},
                {"sigma_x", cfg.sigma_x},
                {"mode", mode_name(cfg.mode)},
                {"boundary", boundary_name(cfg.boundary)},
                {"sequences", std::move(seqs)}};
}

struct DetectionFile {
    std::int64_t T = 0;
    DetectorConfig cfg;
    std::vector<DetectionResult> results;
};

inline DetectionFile detections_from_json(const json& j) {
    DetectionFile df;
    try {
        df.T = j.at("T").get<std::int64_t>();
        df.cfg.c_scan = j.at("c_scan").get<double>();
        df.cfg.rho = j.at("rho").get<double>();
        df.cfg.sigma_x = j.at("sigma_x").get<double>();
        const std::string mode = j.at("mode").get<std::string>();
        if (mode == "plain")
            df.cfg.mode = DetectorConfig::Mode::plain;
        else if (mode == "extended")
            df.cfg.mode = DetectorConfig::Mode::extended;
        else
            throw io_error("detection JSON: unknown mode '" + mode + "'");
        if (j.contains("boundary"))
            df.cfg.boundary = boundary_from_name(j.at("boundary").get<std::string>());
        for (const auto& s : j.at("sequences")) {
            DetectionResult det;
            det.tau_hat = s.at("tau_hat").get<std::vector<std::int64_t>>();
            det.window_exponent = s.at("window_exponent").get<std::vector<int>>();
            det.fallback = s.at("fallback").get<std::vector<std::uint8_t>>();
            for (const auto& iv : s.at("intervals"))
                det.intervals.push_back(Interval{iv.at(0).get<std::int64_t>(),
                                                 iv.at(1).get<std::int64_t>()});
            for (const auto& p : s.at("log_profiles")) {
                WeightFn wf;
                wf.offset = p.at("offset").get<std::int64_t>();
                wf.w = p.at("w").get<std::vector<double>>();
                det.log_profiles.push_back(std::move(wf));
            }
            const std::size_t n = det.tau_hat.size();
            if (det.intervals.size() != n || det.log_profiles.size() != n ||
                det.window_exponent.size() != n || det.fallback.size() != n)
                throw io_error("detection JSON: misaligned result fields");
            df.results.push_back(std::move(det));
        }
    } catch (const json::exception& e) {
        throw io_error(std::string("detection JSON: ") + e.what());
    }
    return df;
}

// ---------------------------------------------------------------------------
// evaluation and bound reports
// ---------------------------------------------------------------------------

inline json opt_num(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

inline json eval_report_to_json(const EvalReport& rep) {
    json per_seq = json::array();
    std::int64_t used = 0;
    for (std::size_t r = 0; r < rep.reps.size(); ++r) {
        if (rep.reps[r].alpha_mean) ++used;
        for (const auto& e : rep.reps[r].per_seq)
            per_seq.push_back({{"replicate", r},
                               {"alpha_hat", e.alpha_hat},
                               {"beta_hat", e.beta_hat},
                               {"gamma_hat", opt_num(e.gamma_hat)},
                               {"j_count", e.j_count}});
    }
    return json{{"replicates_total", rep.reps.size()},
                {"replicates_used", used},
                {"delta0", rep.delta0},
                {"alpha_T_hat", rep.alpha_T_hat},
                {"se_alpha", opt_num(rep.se_alpha)},
                {"beta_T_hat", rep.beta_T_hat},
                {"se_beta", opt_num(rep.se_beta)},
                {"gamma_T_hat", opt_num(rep.gamma_T_hat)},
                {"se_gamma", opt_num(rep.se_gamma)},
                {"per_seq", std::move(per_seq)}};
}

inline json bound_report_to_json(const BoundReport& rep) {
    json j{{"quantity", rep.quantity},
           {"value", rep.value},
           {"mc_se", opt_num(rep.mc_se)},
           {"normalized", opt_num(rep.normalized)},
           {"normalized_se", opt_num(rep.normalized_se)},
           {"horizon_warning", rep.horizon_warning},
           {"horizon", rep.horizon},
           {"reps", rep.reps}};
    if (rep.delta) j["delta"] = *rep.delta;
    if (rep.delta0) j["delta0"] = *rep.delta0;
    if (!rep.jump.empty()) j["jump"] = rep.jump;
    return j;
}

} // namespace cpscan::io
