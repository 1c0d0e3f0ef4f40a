#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "oodsim/error.hpp"
#include "oodsim/metrics/similarity.hpp"
#include "oodsim/text_io.hpp"

namespace oodsim {

inline constexpr const char* kToolVersion = "0.1.0";

struct SimilarityRecord {
    std::string train;
    std::string test;
    Metric metric = Metric::Cosine;
    double value = 0.0;
    std::size_t excluded = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const SimilarityRecord&, const SimilarityRecord&) = default;
};

struct Provenance {
    std::string config_hash;
    std::string tool_version = kToolVersion;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// (train, test, metric) -> score records plus where they came from.
struct SimilarityReport {
    std::vector<SimilarityRecord> records;
    Provenance provenance;

    friend bool operator==(const SimilarityReport&, const SimilarityReport&) = default;

    std::optional<double> value(const std::string& train, const std::string& test, Metric m) const {
        for (const auto& r : records)
            if (r.train == train && r.test == test && r.metric == m) return r.value;
        return std::nullopt;
    }

    /// Metrics present in the report, in canonical order.
    std::vector<Metric> metrics() const {
        std::set<Metric> seen;
        for (const auto& r : records) seen.insert(r.metric);
        return {seen.begin(), seen.end()};
    }
};

/// One record per triple and every value inside its metric's range.
inline void validate_report(const SimilarityReport& report) {
    std::set<std::tuple<std::string, std::string, Metric>> keys;
    for (const auto& r : report.records) {
        if (!keys.emplace(r.train, r.test, r.metric).second)
            throw DataError("similarity report: duplicate record " + r.train + "/" + r.test + "/" +
                            std::string(to_string(r.metric)));
        if (!in_metric_range(r.metric, r.value))
            throw DataError("similarity report: " + std::string(to_string(r.metric)) + " value " +
                            format_double(r.value) + " out of range for " + r.train + "/" + r.test);
    }
}

inline std::string similarity_csv(const SimilarityReport& report) {
    std::string out = "train,test,metric,value,excluded,seed\n";
    for (const auto& r : report.records)
        append_csv_row(out, {r.train, r.test, std::string(to_string(r.metric)), format_double(r.value),
                             std::to_string(r.excluded), std::to_string(r.seed)});
    return out;
}

inline nlohmann::json to_json(const SimilarityReport& report) {
    nlohmann::json j;
    j["provenance"] = {{"config_hash", report.provenance.config_hash},
                       {"tool_version", report.provenance.tool_version}};
    auto& recs = j["records"] = nlohmann::json::array();
    for (const auto& r : report.records)
        recs.push_back({{"train", r.train},
                        {"test", r.test},
                        {"metric", to_string(r.metric)},
                        {"value", r.value},
                        {"excluded", r.excluded},
                        {"seed", r.seed}});
    return j;
}

inline SimilarityReport similarity_from_json(const nlohmann::json& j) {
    SimilarityReport report;
    try {
        if (j.contains("provenance")) {
            report.provenance.config_hash = j["provenance"].value("config_hash", "");
            report.provenance.tool_version = j["provenance"].value("tool_version", "");
        }
        for (const auto& r : j.at("records"))
            report.records.push_back({r.at("train").get<std::string>(), r.at("test").get<std::string>(),
                                      parse_metric(r.at("metric").get<std::string>()), r.at("value").get<double>(),
                                      r.value("excluded", std::size_t{0}), r.value("seed", std::uint64_t{0})});
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("similarity report JSON: ") + e.what());
    } catch (const ConfigError& e) {
        throw DataError(std::string("similarity report JSON: ") + e.what());
    }
    validate_report(report);
    return report;
}

inline SimilarityReport parse_similarity_csv(std::string_view text, const std::string& where = "<memory>") {
    const auto rows = parse_csv(text);
    if (rows.empty()) throw DataError(where + ": empty similarity table");
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < rows[0].fields.size(); ++i) col[detail::lower(trim(rows[0].fields[i]))] = i;
    for (const char* need : {"train", "test", "metric", "value"})
        if (!col.count(need)) throw DataError(where + ": missing column '" + need + "'");
    SimilarityReport report;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        const auto line = std::to_string(rows[r].line);
        auto get = [&](const char* name) -> std::string {
            const auto it = col.find(name);
            if (it == col.end()) return {};
            if (it->second >= f.size()) throw DataError(where + ": line " + line + ": too few columns");
            return f[it->second];
        };
        SimilarityRecord rec;
        rec.train = get("train");
        rec.test = get("test");
        try {
            rec.metric = parse_metric(get("metric"));
        } catch (const ConfigError& e) {
            throw DataError(where + ": line " + line + ": " + e.what());
        }
        const auto v = parse_double(get("value"));
        if (!v) throw DataError(where + ": line " + line + ": non-numeric value");
        rec.value = *v;
        if (const auto e = get("excluded"); !e.empty()) {
            const auto n = parse_integer<std::size_t>(e);
            if (!n) throw DataError(where + ": line " + line + ": bad excluded count");
            rec.excluded = *n;
        }
        if (const auto s = get("seed"); !s.empty()) {
            const auto n = parse_integer<std::uint64_t>(s);
            if (!n) throw DataError(where + ": line " + line + ": bad seed");
            rec.seed = *n;
        }
        report.records.push_back(std::move(rec));
    }
    try {
        validate_report(report);
    } catch (const DataError& e) {
        throw DataError(where + ": " + e.what());
    }
    return report;
}

/// Loads a report from .json or (any other extension) CSV.
inline SimilarityReport load_similarity_report(const std::filesystem::path& path) {
    const auto text = read_file(path);
    if (path.extension() == ".json") {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw DataError(path.string() + ": " + e.what());
        }
        return similarity_from_json(j);
    }
    return parse_similarity_csv(text, path.string());
}

} // namespace oodsim
