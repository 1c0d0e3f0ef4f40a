#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "oodsim/correlation/rank.hpp"
#include "oodsim/error.hpp"
#include "oodsim/similarity_report.hpp"
#include "oodsim/text_io.hpp"

namespace oodsim {

enum class Measure { Accuracy, F1 };

inline std::string_view to_string(Measure m) { return m == Measure::Accuracy ? "accuracy" : "f1"; }

struct PerformanceRow {
    std::string train;
    std::string test;
    double score = 0.0;
    Measure measure = Measure::Accuracy;

    friend bool operator==(const PerformanceRow&, const PerformanceRow&) = default;
};

/// Externally measured model scores, one row per (train, test) pair.
struct PerformanceTable {
    std::vector<PerformanceRow> rows;

    std::vector<std::string> train_names() const {
        std::set<std::string> names;
        for (const auto& r : rows) names.insert(r.train);
        return {names.begin(), names.end()};
    }
};

inline void validate_performance(const PerformanceTable& table) {
    std::set<std::pair<std::string, std::string>> keys;
    for (const auto& r : table.rows) {
        if (!keys.emplace(r.train, r.test).second)
            throw DataError("performance table: duplicate row " + r.train + "/" + r.test);
        if (!(r.score >= 0.0 && r.score <= 1.0))
            throw DataError("performance table: score " + format_double(r.score) + " outside [0,1] for " + r.train +
                            "/" + r.test);
    }
}

inline PerformanceTable parse_performance_csv(std::string_view text, const std::string& where = "<memory>") {
    const auto rows = parse_csv(text);
    if (rows.empty()) throw DataError(where + ": empty performance table");
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < rows[0].fields.size(); ++i) col[detail::lower(trim(rows[0].fields[i]))] = i;
    for (const char* need : {"train", "test", "score"})
        if (!col.count(need)) throw DataError(where + ": missing column '" + need + "'");
    PerformanceTable table;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        const auto line = std::to_string(rows[r].line);
        auto get = [&](const std::string& name) -> std::string {
            const auto it = col.find(name);
            if (it == col.end()) return {};
            if (it->second >= f.size()) throw DataError(where + ": line " + line + ": too few columns");
            return std::string(trim(f[it->second]));
        };
        PerformanceRow row;
        row.train = get("train");
        row.test = get("test");
        const auto score = parse_double(get("score"));
        if (!score) throw DataError(where + ": line " + line + ": non-numeric score");
        row.score = *score;
        const auto measure = detail::lower(get("measure"));
        if (measure.empty() || measure == "accuracy" || measure == "acc") row.measure = Measure::Accuracy;
        else if (measure == "f1") row.measure = Measure::F1;
        else throw DataError(where + ": line " + line + ": unknown measure '" + measure + "'");
        table.rows.push_back(std::move(row));
    }
    try {
        validate_performance(table);
    } catch (const DataError& e) {
        throw DataError(where + ": " + e.what());
    }
    return table;
}

inline PerformanceTable load_performance_table(const std::filesystem::path& path) {
    return parse_performance_csv(read_file(path), path.string());
}

inline std::string performance_csv(const PerformanceTable& table) {
    std::string out = "train,test,score,measure\n";
    for (const auto& r : table.rows)
        append_csv_row(out, {r.train, r.test, format_double(r.score), std::string(to_string(r.measure))});
    return out;
}

struct GapEntry {
    std::string train;
    double id_score = 0.0;
    std::optional<double> max_ood_score;
    std::string max_ood_test;
    bool is_exception = false;       // some OOD score >= ID score
    bool strictly_exceeded = false;  // some OOD score > ID score
    bool tie = false;                // best OOD score equals the ID score
};

/// Per training set, whether any OOD test scores at least as well as ID.
/// Output is sorted by training-set name.
inline std::vector<GapEntry> id_ood_gap(const PerformanceTable& perf) {
    validate_performance(perf);
    std::vector<GapEntry> out;
    for (const auto& train : perf.train_names()) {
        GapEntry e;
        e.train = train;
        bool has_id = false;
        for (const auto& r : perf.rows) {
            if (r.train != train) continue;
            if (r.test == train) {
                has_id = true;
                e.id_score = r.score;
            } else if (!e.max_ood_score || r.score > *e.max_ood_score ||
                       (r.score == *e.max_ood_score && r.test < e.max_ood_test)) {
                e.max_ood_score = r.score;
                e.max_ood_test = r.test;
            }
        }
        if (!has_id) throw DataError("performance table: train set '" + train + "' has no ID row");
        if (e.max_ood_score) {
            e.is_exception = *e.max_ood_score >= e.id_score;
            e.strictly_exceeded = *e.max_ood_score > e.id_score;
            e.tie = *e.max_ood_score == e.id_score;
        }
        out.push_back(std::move(e));
    }
    return out;
}

struct CorrelationEntry {
    std::string train;
    Metric metric = Metric::Cosine;
    CorrelationMethod method = CorrelationMethod::KendallTau;
    std::optional<double> coefficient; // raw; nullopt when undefined
    std::optional<double> agreement;   // negated for distance metrics
    std::size_t n = 0;

    friend bool operator==(const CorrelationEntry&, const CorrelationEntry&) = default;
};

struct CorrelationReport {
    std::vector<CorrelationEntry> entries;

    friend bool operator==(const CorrelationReport&, const CorrelationReport&) = default;

    const CorrelationEntry* find(const std::string& train, Metric m, CorrelationMethod method) const {
        for (const auto& e : entries)
            if (e.train == train && e.metric == m && e.method == method) return &e;
        return nullptr;
    }
};

struct CorrelateOptions {
    bool include_id_rows = true;
};

/// Throws DataError unless the (train, test) keys of perf and of every metric
/// in sims coincide.
inline void check_aligned(const PerformanceTable& perf, const SimilarityReport& sims) {
    std::set<std::pair<std::string, std::string>> perf_keys;
    for (const auto& r : perf.rows) perf_keys.emplace(r.train, r.test);
    const auto metrics = sims.metrics();
    if (metrics.empty()) throw DataError("similarity report has no records");
    for (auto m : metrics) {
        std::set<std::pair<std::string, std::string>> sim_keys;
        for (const auto& r : sims.records)
            if (r.metric == m) sim_keys.emplace(r.train, r.test);
        for (const auto& k : perf_keys)
            if (!sim_keys.count(k))
                throw DataError("no " + std::string(to_string(m)) + " similarity for " + k.first + "/" + k.second);
        for (const auto& k : sim_keys)
            if (!perf_keys.count(k))
                throw DataError("no performance score for " + k.first + "/" + k.second + " (" +
                                std::string(to_string(m)) + " record)");
    }
}

/// Per training set and metric, the coefficient between the performance
/// column and the similarity column over that training set's test rows.
inline CorrelationReport correlate(const PerformanceTable& perf, const SimilarityReport& sims,
                                   CorrelationMethod method, const CorrelateOptions& opts = {}) {
    validate_performance(perf);
    check_aligned(perf, sims);
    std::map<std::tuple<std::string, std::string, Metric>, double> sim;
    for (const auto& r : sims.records) sim[{r.train, r.test, r.metric}] = r.value;

    CorrelationReport report;
    for (const auto& train : perf.train_names()) {
        std::vector<const PerformanceRow*> rows;
        for (const auto& r : perf.rows)
            if (r.train == train && (opts.include_id_rows || r.test != train)) rows.push_back(&r);
        std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->test < b->test; });
        std::vector<double> xs;
        for (auto* r : rows) xs.push_back(r->score);
        for (auto m : sims.metrics()) {
            CorrelationEntry e{train, m, method, std::nullopt, std::nullopt, rows.size()};
            std::vector<double> ys;
            for (auto* r : rows) ys.push_back(sim.at({r->train, r->test, m}));
            if (rows.size() >= 2) e.coefficient = correlation(method, xs, ys);
            if (e.coefficient)
                e.agreement = orientation(m) == Orientation::DistanceLowerCloser ? -*e.coefficient : *e.coefficient;
            report.entries.push_back(std::move(e));
        }
    }
    return report;
}

/// Minimum orientation-adjusted coefficient that counts as a consistent
/// correlation. Any value in (0, 0.16] yields the same counts on the bundled
/// fixture; 0.1 keeps weak but correctly signed correlations.
inline constexpr double kDefaultConsistencyThreshold = 0.1;

/// Per metric, the number of training sets whose agreement >= threshold.
inline std::map<Metric, int> consistency_count(const CorrelationReport& report, CorrelationMethod method,
                                               double threshold = kDefaultConsistencyThreshold) {
    std::map<Metric, int> counts;
    for (const auto& e : report.entries) {
        if (e.method != method) continue;
        auto& c = counts[e.metric];
        if (e.agreement && *e.agreement >= threshold) ++c;
    }
    return counts;
}

} // namespace oodsim
