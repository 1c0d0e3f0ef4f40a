#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oodsim/corpus.hpp"
#include "oodsim/correlation/analysis.hpp"
#include "oodsim/embeddings.hpp"
#include "oodsim/error.hpp"
#include "oodsim/metrics/similarity.hpp"
#include "oodsim/pipeline/config.hpp"
#include "oodsim/pipeline/heatmap.hpp"
#include "oodsim/similarity_report.hpp"
#include "oodsim/text_io.hpp"

namespace oodsim {

// ---------------------------------------------------------------------------
// similarity

inline Corpus load_corpus(const CorpusSpec& spec) {
    return load_corpus(spec.path, spec.format, spec.task, spec.name, spec.split);
}

/// Scores every configured (train, test) pair with every enabled metric.
/// Pure with respect to the file system apart from reading inputs.
inline SimilarityReport compute_similarity(const RunConfig& config, std::ostream* log = nullptr) {
    validate_config(config);
    const auto table = load_word_vectors(config.embedding_path, config.embedding_format);
    if (log && table.duplicates_skipped())
        *log << "warning: " << table.duplicates_skipped() << " duplicate tokens in " << config.embedding_path.string()
             << " (first occurrence kept)\n";

    std::map<const CorpusSpec*, Corpus> loaded;
    auto corpus = [&](const CorpusSpec* spec) -> const Corpus& {
        auto it = loaded.find(spec);
        if (it == loaded.end()) it = loaded.emplace(spec, load_corpus(*spec)).first;
        return it->second;
    };

    SimilarityReport report;
    report.provenance.config_hash = config_hash(config);
    for (const auto& [train_spec, test_spec] : resolve_pairs(config)) {
        const auto& train = corpus(train_spec);
        const auto& test = corpus(test_spec);
        const auto scores = corpus_similarity(table, train, test, config.metrics, config.metric);
        for (const auto& s : scores) {
            report.records.push_back({train.name, test.name, s.metric, s.value, s.excluded, config.metric.seed});
            if (log && s.excluded)
                *log << "note: " << train.name << "/" << test.name << " " << to_string(s.metric) << ": " << s.excluded
                     << " degenerate items excluded\n";
        }
    }
    validate_report(report);
    return report;
}

inline void write_similarity(const SimilarityReport& report, const fs::path& dir) {
    write_file(dir / "similarity.csv", similarity_csv(report));
    write_file(dir / "similarity.json", to_json(report).dump(2) + "\n");
}

/// compute_similarity followed by writing similarity.csv and similarity.json.
inline SimilarityReport run_similarity(const RunConfig& config, std::ostream* log = nullptr) {
    auto report = compute_similarity(config, log);
    write_similarity(report, config.output_dir);
    return report;
}

// ---------------------------------------------------------------------------
// correlation

struct CorrelationSettings {
    std::vector<CorrelationMethod> methods{CorrelationMethod::KendallTau, CorrelationMethod::Pearson};
    double threshold = kDefaultConsistencyThreshold;
    bool include_id_rows = true;
};

inline CorrelationSettings correlation_settings(const RunConfig& c) {
    return {c.correlation_methods, c.consistency_threshold, c.include_id_rows};
}

/// Coefficient matrices for every method plus per-metric consistency counts.
struct CorrelationAnalysis {
    CorrelationReport report;
    std::map<CorrelationMethod, std::map<Metric, int>> consistency;
    double threshold = kDefaultConsistencyThreshold;
    bool include_id_rows = true;
    std::vector<GapEntry> gaps;

    friend bool operator==(const CorrelationAnalysis& a, const CorrelationAnalysis& b) {
        return a.report == b.report && a.consistency == b.consistency && a.threshold == b.threshold &&
               a.include_id_rows == b.include_id_rows;
    }
};

inline CorrelationAnalysis compute_correlation(const SimilarityReport& sims, const PerformanceTable& perf,
                                               const CorrelationSettings& settings) {
    CorrelationAnalysis out;
    out.threshold = settings.threshold;
    out.include_id_rows = settings.include_id_rows;
    for (auto method : settings.methods) {
        const auto part = correlate(perf, sims, method, {settings.include_id_rows});
        out.report.entries.insert(out.report.entries.end(), part.entries.begin(), part.entries.end());
        out.consistency[method] = consistency_count(part, method, settings.threshold);
    }
    bool has_id_rows = true;
    for (const auto& train : perf.train_names()) {
        bool found = false;
        for (const auto& r : perf.rows) found |= r.train == train && r.test == train;
        has_id_rows &= found;
    }
    if (has_id_rows) out.gaps = id_ood_gap(perf);
    return out;
}

namespace detail {
inline nlohmann::json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}
inline std::optional<double> number_or_null(const nlohmann::json& v) {
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
}
} // namespace detail

inline nlohmann::json to_json(const CorrelationAnalysis& a) {
    nlohmann::json j;
    j["threshold"] = a.threshold;
    j["include_id_rows"] = a.include_id_rows;
    auto& entries = j["entries"] = nlohmann::json::array();
    for (const auto& e : a.report.entries)
        entries.push_back({{"train", e.train},
                           {"metric", to_string(e.metric)},
                           {"method", to_string(e.method)},
                           {"coefficient", detail::optional_number(e.coefficient)},
                           {"agreement", detail::optional_number(e.agreement)},
                           {"n", e.n}});
    auto& cons = j["consistency"] = nlohmann::json::object();
    for (const auto& [method, counts] : a.consistency) {
        auto& m = cons[std::string(to_string(method))] = nlohmann::json::object();
        for (const auto& [metric, n] : counts) m[std::string(to_string(metric))] = n;
    }
    auto& gaps = j["id_ood_gap"] = nlohmann::json::array();
    for (const auto& g : a.gaps)
        gaps.push_back({{"train", g.train},
                        {"id_score", g.id_score},
                        {"max_ood_score", detail::optional_number(g.max_ood_score)},
                        {"max_ood_test", g.max_ood_test},
                        {"exception", g.is_exception},
                        {"strictly_exceeded", g.strictly_exceeded},
                        {"tie", g.tie}});
    return j;
}

inline CorrelationAnalysis correlation_from_json(const nlohmann::json& j) {
    CorrelationAnalysis a;
    try {
        a.threshold = j.at("threshold").get<double>();
        a.include_id_rows = j.at("include_id_rows").get<bool>();
        for (const auto& e : j.at("entries"))
            a.report.entries.push_back({e.at("train").get<std::string>(), parse_metric(e.at("metric").get<std::string>()),
                                        parse_correlation_method(e.at("method").get<std::string>()),
                                        detail::number_or_null(e.at("coefficient")),
                                        detail::number_or_null(e.at("agreement")), e.at("n").get<std::size_t>()});
        for (const auto& [method, counts] : j.at("consistency").items()) {
            auto& m = a.consistency[parse_correlation_method(method)];
            for (const auto& [metric, n] : counts.items()) m[parse_metric(metric)] = n.get<int>();
        }
        if (j.contains("id_ood_gap"))
            for (const auto& g : j["id_ood_gap"])
                a.gaps.push_back({g.at("train").get<std::string>(), g.at("id_score").get<double>(),
                                  detail::number_or_null(g.at("max_ood_score")), g.at("max_ood_test").get<std::string>(),
                                  g.at("exception").get<bool>(), g.at("strictly_exceeded").get<bool>(),
                                  g.at("tie").get<bool>()});
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("correlation JSON: ") + e.what());
    } catch (const ConfigError& e) {
        throw DataError(std::string("correlation JSON: ") + e.what());
    }
    return a;
}

inline CorrelationAnalysis load_correlation(const fs::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return correlation_from_json(j);
}

inline std::string correlation_csv(const CorrelationAnalysis& a) {
    std::string out = "train,metric,method,coefficient,agreement,n\n";
    for (const auto& e : a.report.entries)
        append_csv_row(out, {e.train, std::string(to_string(e.metric)), std::string(to_string(e.method)),
                             e.coefficient ? format_double(*e.coefficient) : "",
                             e.agreement ? format_double(*e.agreement) : "", std::to_string(e.n)});
    return out;
}

inline void write_correlation(const CorrelationAnalysis& a, const fs::path& dir) {
    write_file(dir / "correlation.csv", correlation_csv(a));
    write_file(dir / "correlation.json", to_json(a).dump(2) + "\n");
}

/// Correlates a similarity report with a performance table and writes
/// correlation.csv and correlation.json into out_dir.
inline CorrelationAnalysis run_correlation(const SimilarityReport& sims, const fs::path& performance_path,
                                           const CorrelationSettings& settings, const fs::path& out_dir) {
    const auto perf = load_performance_table(performance_path);
    auto analysis = compute_correlation(sims, perf, settings);
    write_correlation(analysis, out_dir);
    return analysis;
}

inline CorrelationAnalysis run_correlation(const fs::path& similarity_path, const fs::path& performance_path,
                                           const CorrelationSettings& settings, const fs::path& out_dir) {
    return run_correlation(load_similarity_report(similarity_path), performance_path, settings, out_dir);
}

inline fs::path heatmap_path(const fs::path& dir, CorrelationMethod method) {
    return dir / ("heatmap_" + std::string(to_string(method)) + ".svg");
}

/// One heatmap per correlation method present in the analysis.
inline std::vector<fs::path> emit_heatmaps(const CorrelationAnalysis& a, const fs::path& dir) {
    std::vector<fs::path> written;
    for (const auto& [method, counts] : a.consistency) {
        const auto path = heatmap_path(dir, method);
        emit_heatmap(a.report, method, path);
        written.push_back(path);
    }
    return written;
}

// ---------------------------------------------------------------------------
// data preparation

struct ManifestEntry {
    std::string name;
    Task task = Task::Sentiment;
    Split split = Split::Train;
    std::size_t size = 0;
    std::string file;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct PreparedData {
    std::vector<ManifestEntry> manifest;
    RunConfig config; // the input config with corpora pointing at prepared files
};

inline nlohmann::json manifest_json(const std::vector<ManifestEntry>& entries) {
    nlohmann::json j;
    auto& arr = j["entries"] = nlohmann::json::array();
    for (const auto& e : entries)
        arr.push_back({{"name", e.name},
                       {"task", to_string(e.task)},
                       {"split", to_string(e.split)},
                       {"size", e.size},
                       {"file", e.file}});
    return j;
}

inline fs::path prepared_dir(const RunConfig& c) { return c.output_dir / "prepared"; }

/// Balances classes (sentiment and NLI corpora with labels) and downsamples
/// every (task, split) group to its smallest member, then writes the
/// prepared JSONL files, manifest.json and prepared_config.json.
inline PreparedData prepare_data(const RunConfig& config, std::ostream* log = nullptr) {
    if (config.corpora.empty()) throw ConfigError("no corpora configured");
    for (const auto& s : config.corpora)
        if (!fs::exists(s.path)) throw ConfigError("corpus file '" + s.path.string() + "' does not exist");

    std::vector<Corpus> corpora;
    for (const auto& spec : config.corpora) corpora.push_back(load_corpus(spec));

    std::vector<bool> balanced(corpora.size(), false);
    for (std::size_t i = 0; i < corpora.size(); ++i) {
        auto& c = corpora[i];
        const bool balanceable = config.balance && (c.task == Task::Sentiment || c.task == Task::NLI) &&
                                 std::all_of(c.samples.begin(), c.samples.end(), [](const Sample& s) { return s.label.has_value(); });
        if (!balanceable) continue;
        balanced[i] = true;
        const auto before = c.size();
        c = balance_classes(c, config.metric.seed);
        if (log && c.size() != before)
            *log << c.name << " (" << to_string(c.split) << "): balanced " << before << " -> " << c.size() << "\n";
    }

    std::map<std::pair<Task, Split>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < corpora.size(); ++i) groups[{corpora[i].task, corpora[i].split}].push_back(i);
    for (const auto& [key, members] : groups) {
        std::vector<Corpus> group;
        bool stratify = true;
        for (auto i : members) {
            group.push_back(corpora[i]);
            stratify = stratify && balanced[i];
        }
        // keep the class balance established above
        auto sized = stratify ? downsample_group_stratified(group, config.metric.seed)
                              : downsample_group(group, config.metric.seed);
        for (std::size_t k = 0; k < members.size(); ++k) {
            if (log && sized[k].size() != corpora[members[k]].size())
                *log << sized[k].name << " (" << to_string(sized[k].split) << "): downsampled "
                     << corpora[members[k]].size() << " -> " << sized[k].size() << "\n";
            corpora[members[k]] = std::move(sized[k]);
        }
    }

    PreparedData out;
    out.config = config;
    out.config.prepare_enabled = false;
    const auto dir = prepared_dir(config);
    for (std::size_t i = 0; i < corpora.size(); ++i) {
        const auto& c = corpora[i];
        const auto file = c.name + "." + std::string(to_string(c.split)) + ".jsonl";
        write_corpus_jsonl(c, dir / file);
        out.manifest.push_back({c.name, c.task, c.split, c.size(), file});
        out.config.corpora[i].path = dir / file;
        out.config.corpora[i].format = CorpusFormat::JSONL;
    }
    write_file(dir / "manifest.json", manifest_json(out.manifest).dump(2) + "\n");
    write_file(dir / "prepared_config.json", to_json(out.config).dump(2) + "\n");
    return out;
}

// ---------------------------------------------------------------------------
// end to end

struct RunAllResult {
    std::optional<PreparedData> prepared;
    SimilarityReport similarity;
    std::optional<CorrelationAnalysis> correlation;
    std::vector<fs::path> heatmaps;
};

/// prepare (when enabled) -> similarity -> correlation and heatmaps (when a
/// performance table is configured).
inline RunAllResult run_all(const RunConfig& config, std::ostream* log = nullptr) {
    validate_config(config);
    RunAllResult result;
    RunConfig effective = config;
    if (config.prepare_enabled) {
        result.prepared = prepare_data(config, log);
        effective = result.prepared->config;
    }
    result.similarity = run_similarity(effective, log);
    if (effective.performance_table) {
        result.correlation = run_correlation(result.similarity, *effective.performance_table,
                                             correlation_settings(effective), effective.output_dir);
        result.heatmaps = emit_heatmaps(*result.correlation, effective.output_dir);
    } else if (log) {
        *log << "no performance table configured; skipping correlation and heatmaps\n";
    }
    return result;
}

} // namespace oodsim
