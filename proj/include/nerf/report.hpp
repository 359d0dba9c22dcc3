#pragma once

// CSV and JSON emission for bounds and oracle tables, the matching readers,
// and the K-keyed merge used by the `report` subcommand.
//
// CSV files may start with comment lines beginning with '#'; a comment that
// parses as a JSON object is the file's metadata block.

#include <cstdint>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nerf/bounds.hpp"
#include "nerf/epsnet.hpp"
#include "nerf/error.hpp"
#include "nerf/oracle.hpp"

namespace nerf {

using Json = nlohmann::ordered_json;

inline const char* to_string(CertificateRule rule) noexcept {
    switch (rule) {
    case CertificateRule::general: return "general";
    case CertificateRule::untf: return "untf";
    case CertificateRule::combined: return "combined";
    }
    return "unknown";
}

inline CertificateRule parse_rule(const std::string& s) {
    if (s == "general")
        return CertificateRule::general;
    if (s == "untf")
        return CertificateRule::untf;
    if (s == "combined")
        return CertificateRule::combined;
    throw Error(ErrorKind::invalid_config, "unknown certificate rule '" + s + "'");
}

inline std::string format_real(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

// -------------------------------------------------------------------------- //
// Generic CSV

struct CsvTable {
    Json meta = Json::object();
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name)
                return i;
        return std::nullopt;
    }

    std::size_t require(const std::string& name) const {
        auto i = column_index(name);
        if (!i)
            throw Error(ErrorKind::io, "CSV has no column '" + name + "'");
        return *i;
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ','))
        out.push_back(field);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

inline CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line[0] == '#') {
            auto body = line.substr(1);
            auto parsed = Json::parse(body, nullptr, false);
            if (!parsed.is_discarded() && parsed.is_object())
                t.meta = parsed;
            continue;
        }
        auto fields = split_csv_line(line);
        if (!have_header) {
            t.columns = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.columns.size())
            throw Error(ErrorKind::io, "CSV row has " + std::to_string(fields.size()) + " fields, header has " +
                                           std::to_string(t.columns.size()));
        t.rows.push_back(std::move(fields));
    }
    if (!have_header)
        throw Error(ErrorKind::io, "CSV has no header row");
    return t;
}

inline void write_csv(std::ostream& out, const CsvTable& t) {
    if (!t.meta.empty())
        out << "# " << t.meta.dump() << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        out << (i ? "," : "") << t.columns[i];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << row[i];
        out << '\n';
    }
    if (!out)
        throw Error(ErrorKind::io, "failed writing CSV");
}

inline double parse_real(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw Error(ErrorKind::io, "trailing characters in number '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw Error(ErrorKind::io, "not a number: '" + s + "'");
    }
}

// -------------------------------------------------------------------------- //
// Bounds table

/// Metadata for the bounds CSV. Everything here is a pure function of the
/// inputs, so the CSV is reproducible byte for byte; timings go to the JSON
/// run report.
inline Json bounds_metadata(const BoundsTable& table, const NetConfig& net) {
    Json meta;
    meta["M"] = table.dimension;
    meta["N"] = table.frame_size;
    meta["epsilon_sq"] = table.epsilon_sq;
    meta["L"] = net.levels;
    meta["delta"] = net.delta;
    meta["net_points_used"] = table.points_used;
    if (table.rule)
        meta["certificate"] = to_string(*table.rule);
    return meta;
}

inline CsvTable bounds_csv(const BoundsTable& table, Json meta) {
    if (!table.certified())
        throw Error(ErrorKind::invalid_input, "table has not been certified");
    CsvTable t;
    t.meta = std::move(meta);
    t.columns = {"K", "alpha_eps", "beta_eps", "alpha_lower", "beta_upper", "trivial_lower", "trivial_upper"};
    const double redundancy = table.redundancy();
    for (std::size_t k = 1; k <= table.frame_size; ++k) {
        const double trivial_lower = static_cast<double>(k) - (static_cast<double>(table.frame_size) - redundancy);
        t.rows.push_back({std::to_string(k), format_real(table.alpha_eps[k - 1]), format_real(table.beta_eps[k - 1]),
                          format_real(table.alpha_lower[k - 1]), format_real(table.beta_upper[k - 1]),
                          format_real(trivial_lower), format_real(redundancy)});
    }
    return t;
}

/// Reconstruct a certified table from its CSV.
inline BoundsTable bounds_from_csv(const CsvTable& csv) {
    BoundsTable t;
    const auto ck = csv.require("K"), ca = csv.require("alpha_eps"), cb = csv.require("beta_eps"),
               cl = csv.require("alpha_lower"), cu = csv.require("beta_upper");
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        if (std::stoul(row[ck]) != r + 1)
            throw Error(ErrorKind::io, "bounds CSV rows must list K = 1..N in order");
        t.alpha_eps.push_back(parse_real(row[ca]));
        t.beta_eps.push_back(parse_real(row[cb]));
        t.alpha_lower.push_back(parse_real(row[cl]));
        t.beta_upper.push_back(parse_real(row[cu]));
    }
    t.frame_size = csv.rows.size();
    t.dimension = csv.meta.value("M", std::size_t{0});
    t.epsilon_sq = csv.meta.value("epsilon_sq", 0.0);
    t.points_used = csv.meta.value("net_points_used", std::uint64_t{0});
    t.rule = parse_rule(csv.meta.value("certificate", std::string("combined")));
    return t;
}

// -------------------------------------------------------------------------- //
// Oracle table

inline std::string join_witness(const std::vector<std::uint32_t>& subset) {
    std::string s;
    for (std::size_t i = 0; i < subset.size(); ++i)
        s += (i ? ";" : "") + std::to_string(subset[i] + 1);
    return s;
}

inline CsvTable oracle_csv(const std::vector<OracleResult>& results, Json meta = Json::object()) {
    CsvTable t;
    t.meta = std::move(meta);
    t.columns = {"K", "alpha_exact", "beta_exact", "witness_alpha", "witness_beta", "subsets_examined"};
    for (const auto& r : results)
        t.rows.push_back({std::to_string(r.k), format_real(r.alpha), format_real(r.beta), join_witness(r.witness_alpha),
                          join_witness(r.witness_beta), r.subsets_examined.str()});
    return t;
}

// -------------------------------------------------------------------------- //
// Sandwich check: alpha_lower <= alpha_K <= alpha_eps, beta_eps <= beta_K <= beta_upper

struct SandwichViolation {
    std::size_t k;
    std::string what;
};

inline std::vector<SandwichViolation> check_sandwich(const BoundsTable& bounds, const std::vector<OracleResult>& exact,
                                                     double tol = 1e-9) {
    std::vector<SandwichViolation> out;
    for (const auto& r : exact) {
        if (r.k == 0 || r.k > bounds.alpha_eps.size()) {
            out.push_back({r.k, "K outside the bounds table"});
            continue;
        }
        const std::size_t i = r.k - 1;
        auto fail = [&](const std::string& rel, double a, double b) {
            out.push_back({r.k, rel + " (" + format_real(a) + " vs " + format_real(b) + ")"});
        };
        if (bounds.alpha_lower[i] > r.alpha + tol)
            fail("alpha_lower > alpha_K", bounds.alpha_lower[i], r.alpha);
        if (r.alpha > bounds.alpha_eps[i] + tol)
            fail("alpha_K > alpha_eps", r.alpha, bounds.alpha_eps[i]);
        if (bounds.beta_eps[i] > r.beta + tol)
            fail("beta_eps > beta_K", bounds.beta_eps[i], r.beta);
        if (r.beta > bounds.beta_upper[i] + tol)
            fail("beta_K > beta_upper", r.beta, bounds.beta_upper[i]);
    }
    return out;
}

// -------------------------------------------------------------------------- //
// Merge CSVs on K

/// Outer join on the K column; every other column is prefixed "<label>.".
inline CsvTable merge_on_K(const std::vector<CsvTable>& tables, const std::vector<std::string>& labels) {
    if (tables.size() != labels.size())
        throw Error(ErrorKind::invalid_input, "one label per table");
    CsvTable out;
    out.columns = {"K"};
    std::map<std::size_t, std::vector<std::string>> rows;
    std::size_t width = 0;
    for (std::size_t t = 0; t < tables.size(); ++t) {
        const auto& tab = tables[t];
        const auto ck = tab.require("K");
        std::vector<std::size_t> keep;
        for (std::size_t c = 0; c < tab.columns.size(); ++c)
            if (c != ck) {
                keep.push_back(c);
                out.columns.push_back(labels[t] + "." + tab.columns[c]);
            }
        for (const auto& row : tab.rows) {
            auto& dst = rows[std::stoul(row[ck])];
            dst.resize(width + keep.size());
            for (std::size_t j = 0; j < keep.size(); ++j)
                dst[width + j] = row[keep[j]];
        }
        width += keep.size();
        for (auto& [k, dst] : rows)
            dst.resize(width);
    }
    for (auto& [k, cells] : rows) {
        std::vector<std::string> row{std::to_string(k)};
        row.insert(row.end(), cells.begin(), cells.end());
        out.rows.push_back(std::move(row));
    }
    out.meta = Json::object();
    for (std::size_t t = 0; t < tables.size(); ++t)
        if (!tables[t].meta.empty())
            out.meta[labels[t]] = tables[t].meta;
    return out;
}

/// The JSON report of build-net.
inline Json net_report(const NetConfig& config, std::uint64_t pruned_count) {
    Json j;
    j["M"] = config.dimension;
    j["epsilon_sq"] = config.epsilon_sq;
    j["epsilon"] = config.epsilon();
    j["L"] = config.levels;
    j["delta"] = config.delta;
    j["cardinality_full"] = config.cardinality().str();
    j["cardinality_pruned"] = pruned_count;
    j["volumetric_bound_log10"] = volumetric_bound_log(config.dimension, config.epsilon()) / std::log(10.0);
    return j;
}

} // namespace nerf
