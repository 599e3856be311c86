#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpscan/campaigns.hpp"
#include "cpscan/io.hpp"

namespace cpscan::tables {

/**
 * Plain-text tables: '#' comment lines, one header line of column names,
 * then whitespace-separated rows.  Numbers are rendered shortest
 * round-trip, so parse(render(x)) reproduces every value bit for bit.
 * Absent values (e.g. a standard error below 2 replicates) print as "-".
 */

namespace detail {

inline std::string cell(const std::optional<double>& v) {
    return v ? io::dtos(*v) : std::string("-");
}

inline std::vector<std::vector<std::string_view>> data_rows(std::string_view text,
                                                            const std::string& what) {
    std::vector<std::vector<std::string_view>> rows;
    for (std::string_view line : io::detail::lines_of(text)) {
        std::size_t k = 0;
        while (k < line.size() && (line[k] == ' ' || line[k] == '\t')) ++k;
        if (k == line.size() || line[k] == '#') continue;
        std::vector<std::string_view> toks;
        while (k < line.size()) {
            std::size_t e = k;
            while (e < line.size() && line[e] != ' ' && line[e] != '\t') ++e;
            toks.push_back(line.substr(k, e - k));
            k = e;
            while (k < line.size() && (line[k] == ' ' || line[k] == '\t')) ++k;
        }
        rows.push_back(std::move(toks));
    }
    if (rows.empty()) throw io::io_error(what + ": no table content");
    return rows;
}

inline std::optional<double> parse_cell(std::string_view tok, const std::string& where) {
    if (tok == "-") return std::nullopt;
    return io::parse_double(tok, where);
}

} // namespace detail

inline const std::vector<std::string>& table1_columns() {
    static const std::vector<std::string> cols = {"delta", "d2_g_lower", "se_lower",
                                                  "d2_g_scan", "se_scan"};
    return cols;
}

inline std::string render_table1(const Table1Report& rep) {
    std::string out = "# localization constants (Delta^2-normalized), reps=" +
                      std::to_string(rep.reps) + ", seed=" + std::to_string(rep.seed) +
                      (rep.horizon > 0 ? ", horizon=" + std::to_string(rep.horizon)
                                       : std::string(", horizon=policy")) +
                      "\n";
    for (std::size_t c = 0; c < table1_columns().size(); ++c)
        out += (c ? " " : "") + table1_columns()[c];
    out += '\n';
    for (std::size_t d = 0; d < rep.grid.size(); ++d) {
        const auto& row = rep.rows[d];
        out += io::dtos(rep.grid[d]);
        out += ' ' + detail::cell(row.lower.normalized);
        out += ' ' + detail::cell(row.lower.normalized_se);
        out += ' ' + detail::cell(row.scan.normalized);
        out += ' ' + detail::cell(row.scan.normalized_se);
        if (row.lower.horizon_warning) out += " # horizon warning";
        out += '\n';
    }
    return out;
}

struct Table1ParsedRow {
    double delta = 0.0;
    std::optional<double> d2_g_lower, se_lower, d2_g_scan, se_scan;
};

inline std::vector<Table1ParsedRow> parse_table1(std::string_view text) {
    const auto rows = detail::data_rows(text, "table1");
    const auto& cols = table1_columns();
    if (rows.front().size() != cols.size())
        throw io::io_error("table1: header has wrong column count");
    for (std::size_t c = 0; c < cols.size(); ++c)
        if (rows.front()[c] != cols[c])
            throw io::io_error("table1: header column " + std::to_string(c + 1) +
                               " must be " + cols[c]);
    std::vector<Table1ParsedRow> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const std::string where = "table1 row " + std::to_string(r);
        auto toks = rows[r];
        // an inline "# ..." note may trail the numeric cells
        for (std::size_t k = 0; k < toks.size(); ++k)
            if (toks[k].front() == '#') {
                toks.resize(k);
                break;
            }
        if (toks.size() != cols.size())
            throw io::io_error(where + ": expected " + std::to_string(cols.size()) +
                               " cells");
        Table1ParsedRow row;
        row.delta = io::parse_double(toks[0], where);
        row.d2_g_lower = detail::parse_cell(toks[1], where);
        row.se_lower = detail::parse_cell(toks[2], where);
        row.d2_g_scan = detail::parse_cell(toks[3], where);
        row.se_scan = detail::parse_cell(toks[4], where);
        out.push_back(row);
    }
    return out;
}

inline const std::vector<std::string>& table2_columns() {
    static const std::vector<std::string> cols = {
        "law",           "vg",           "alpha_no_share", "se_alpha_ns",
        "alpha_share",   "se_alpha_s",   "beta_no_share",  "se_beta_ns",
        "beta_share",    "se_beta_s"};
    return cols;
}

inline std::string render_table2(const Table2Report& rep) {
    std::string out = "# shared-intensity benchmark: N=" + std::to_string(rep.cfg.N) +
                      ", T=" + std::to_string(rep.cfg.T) + ", q=" + io::dtos(rep.cfg.q) +
                      ", c_scan=" + io::dtos(rep.cfg.detector.c_scan) +
                      ", rho=" + io::dtos(rep.cfg.detector.rho) +
                      ", boundary=" + io::boundary_name(rep.cfg.detector.boundary) +
                      ", reps=" + std::to_string(rep.cfg.reps) +
                      ", seed=" + std::to_string(rep.cfg.seed) + "\n";
    for (std::size_t c = 0; c < table2_columns().size(); ++c)
        out += (c ? " " : "") + table2_columns()[c];
    out += '\n';
    for (const auto& row : rep.rows) {
        out += row.label;
        out += ' ' + io::dtos(row.vg);
        out += ' ' + io::dtos(row.no_share.alpha_T_hat);
        out += ' ' + detail::cell(row.no_share.se_alpha);
        out += ' ' + io::dtos(row.with_share.alpha_T_hat);
        out += ' ' + detail::cell(row.with_share.se_alpha);
        out += ' ' + io::dtos(row.no_share.beta_T_hat);
        out += ' ' + detail::cell(row.no_share.se_beta);
        out += ' ' + io::dtos(row.with_share.beta_T_hat);
        out += ' ' + detail::cell(row.with_share.se_beta);
        out += '\n';
    }
    return out;
}

struct Table2ParsedRow {
    std::string law;
    double vg = 0.0;
    double alpha_no_share = 0.0, alpha_share = 0.0;
    double beta_no_share = 0.0, beta_share = 0.0;
    std::optional<double> se_alpha_ns, se_alpha_s, se_beta_ns, se_beta_s;
};

inline std::vector<Table2ParsedRow> parse_table2(std::string_view text) {
    const auto rows = detail::data_rows(text, "table2");
    const auto& cols = table2_columns();
    if (rows.front().size() != cols.size())
        throw io::io_error("table2: header has wrong column count");
    for (std::size_t c = 0; c < cols.size(); ++c)
        if (rows.front()[c] != cols[c])
            throw io::io_error("table2: header column " + std::to_string(c + 1) +
                               " must be " + cols[c]);
    std::vector<Table2ParsedRow> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const std::string where = "table2 row " + std::to_string(r);
        const auto& toks = rows[r];
        if (toks.size() != cols.size())
            throw io::io_error(where + ": expected " + std::to_string(cols.size()) +
                               " cells");
        Table2ParsedRow row;
        row.law = std::string(toks[0]);
        row.vg = io::parse_double(toks[1], where);
        row.alpha_no_share = io::parse_double(toks[2], where);
        row.se_alpha_ns = detail::parse_cell(toks[3], where);
        row.alpha_share = io::parse_double(toks[4], where);
        row.se_alpha_s = detail::parse_cell(toks[5], where);
        row.beta_no_share = io::parse_double(toks[6], where);
        row.se_beta_ns = detail::parse_cell(toks[7], where);
        row.beta_share = io::parse_double(toks[8], where);
        row.se_beta_s = detail::parse_cell(toks[9], where);
        out.push_back(std::move(row));
    }
    return out;
}

inline nlohmann::json table1_to_json(const Table1Report& rep) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t d = 0; d < rep.grid.size(); ++d) {
        rows.push_back({{"delta", rep.grid[d]},
                        {"g_lower", io::bound_report_to_json(rep.rows[d].lower)},
                        {"g_scan", io::bound_report_to_json(rep.rows[d].scan)}});
    }
    return nlohmann::json{{"version", version_string},
                          {"reps", rep.reps},
                          {"horizon", rep.horizon},
                          {"seed", rep.seed},
                          {"rows", std::move(rows)}};
}

inline nlohmann::json table2_to_json(const Table2Report& rep) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : rep.rows)
        rows.push_back({{"law", row.label},
                        {"vg", row.vg},
                        {"no_share", io::eval_report_to_json(row.no_share)},
                        {"with_share", io::eval_report_to_json(row.with_share)}});
    return nlohmann::json{{"version", version_string},
                          {"N", rep.cfg.N},
                          {"T", rep.cfg.T},
                          {"q", rep.cfg.q},
                          {"c_scan", rep.cfg.detector.c_scan},
                          {"rho", rep.cfg.detector.rho},
                          {"boundary", io::boundary_name(rep.cfg.detector.boundary)},
                          {"sigma_x", rep.cfg.sigma_x},
                          {"reps", rep.cfg.reps},
                          {"em_iters", rep.cfg.em_iters},
                          {"em_tol", rep.cfg.em_tol},
                          {"delta0", rep.cfg.delta0},
                          {"seed", rep.cfg.seed},
                          {"rows", std::move(rows)}};
}

} // namespace cpscan::tables
