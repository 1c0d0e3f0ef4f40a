#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oodsim/corpus.hpp"
#include "oodsim/correlation/analysis.hpp"
#include "oodsim/embeddings.hpp"
#include "oodsim/error.hpp"
#include "oodsim/metrics/similarity.hpp"
#include "oodsim/pipeline/toml.hpp"
#include "oodsim/random.hpp"
#include "oodsim/text_io.hpp"

namespace oodsim {

namespace fs = std::filesystem;

struct CorpusSpec {
    std::string name;
    fs::path path;
    CorpusFormat format = CorpusFormat::JSONL;
    Task task = Task::Sentiment;
    Split split = Split::Train;
};

struct PairSpec {
    std::string train;
    std::string test;
};

struct RunConfig {
    std::vector<CorpusSpec> corpora;
    fs::path embedding_path;
    VectorFormat embedding_format = VectorFormat::Text;
    std::vector<Metric> metrics{kAllMetrics.begin(), kAllMetrics.end()};
    MetricConfig metric; // sample_k, master seed, modes and hyperparameters
    std::vector<PairSpec> pairs; // empty: every train corpus against every same-task test corpus
    std::optional<fs::path> performance_table;
    fs::path output_dir = "oodsim_out";
    std::vector<CorrelationMethod> correlation_methods{CorrelationMethod::KendallTau, CorrelationMethod::Pearson};
    double consistency_threshold = kDefaultConsistencyThreshold;
    bool include_id_rows = true;
    bool prepare_enabled = false;
    bool balance = true;
};

/// Values that may come from command-line flags or environment variables.
struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> sample_k;
    std::optional<std::vector<Metric>> metrics;
    std::optional<fs::path> output_dir;
    std::optional<fs::path> embeddings;
    std::optional<VectorFormat> embedding_format;
};

inline std::vector<Metric> parse_metric_list(std::string_view text) {
    std::vector<Metric> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        const auto item = trim(text.substr(pos, comma - pos));
        if (!item.empty()) out.push_back(parse_metric(item));
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError("empty metric list");
    return out;
}

inline ConfigOverrides overrides_from_env() {
    ConfigOverrides o;
    auto env = [](const char* name) -> std::optional<std::string> {
        const char* v = std::getenv(name);
        if (!v || !*v) return std::nullopt;
        return std::string(v);
    };
    if (auto v = env("OODSIM_SEED")) {
        o.seed = parse_integer<std::uint64_t>(*v);
        if (!o.seed) throw ConfigError("OODSIM_SEED is not an unsigned integer");
    }
    if (auto v = env("OODSIM_SAMPLE_K")) {
        o.sample_k = parse_integer<std::size_t>(*v);
        if (!o.sample_k) throw ConfigError("OODSIM_SAMPLE_K is not an unsigned integer");
    }
    if (auto v = env("OODSIM_METRICS")) o.metrics = parse_metric_list(*v);
    if (auto v = env("OODSIM_OUT")) o.output_dir = *v;
    if (auto v = env("OODSIM_EMBEDDINGS")) o.embeddings = *v;
    if (auto v = env("OODSIM_EMBEDDINGS_FORMAT")) o.embedding_format = parse_vector_format(*v);
    return o;
}

/// Fields set in `top` win over fields set in `base`.
inline ConfigOverrides merge(const ConfigOverrides& base, const ConfigOverrides& top) {
    ConfigOverrides o = base;
    if (top.seed) o.seed = top.seed;
    if (top.sample_k) o.sample_k = top.sample_k;
    if (top.metrics) o.metrics = top.metrics;
    if (top.output_dir) o.output_dir = top.output_dir;
    if (top.embeddings) o.embeddings = top.embeddings;
    if (top.embedding_format) o.embedding_format = top.embedding_format;
    return o;
}

inline void apply(RunConfig& config, const ConfigOverrides& o) {
    if (o.seed) config.metric.seed = *o.seed;
    if (o.sample_k) config.metric.sample_k = *o.sample_k;
    if (o.metrics) config.metrics = *o.metrics;
    if (o.output_dir) config.output_dir = *o.output_dir;
    if (o.embeddings) config.embedding_path = *o.embeddings;
    if (o.embedding_format) config.embedding_format = *o.embedding_format;
}

namespace detail {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
}

inline std::string require_string(const nlohmann::json& j, const char* key, const std::string& where) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw ConfigError(where + ": missing string key '" + key + "'");
    return it->get<std::string>();
}

inline fs::path resolve(const fs::path& base, const fs::path& p) {
    if (p.empty() || p.is_absolute() || base.empty()) return p;
    return base / p;
}

inline std::vector<std::string> string_list(const nlohmann::json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) return {};
    if (it->is_string()) return {it->get<std::string>()};
    if (!it->is_array()) throw ConfigError(std::string("config key '") + key + "' must be a list of strings");
    std::vector<std::string> out;
    for (const auto& v : *it) {
        if (!v.is_string()) throw ConfigError(std::string("config key '") + key + "' must be a list of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

} // namespace detail

/// Builds a RunConfig from its JSON document form. Relative paths are taken
/// relative to base_dir.
inline RunConfig config_from_json(const nlohmann::json& j, const fs::path& base_dir = {}) {
    if (!j.is_object()) throw ConfigError("config must be an object");
    RunConfig c;
    c.metric.seed = detail::get_or<std::uint64_t>(j, "seed", 0);
    const auto sample_k = detail::get_or<std::int64_t>(j, "sample_k", 20);
    if (sample_k < 0) throw ConfigError("sample_k must be positive");
    c.metric.sample_k = static_cast<std::size_t>(sample_k);
    if (j.contains("metrics")) {
        c.metrics.clear();
        for (const auto& m : detail::string_list(j, "metrics")) c.metrics.push_back(parse_metric(m));
    }
    c.output_dir = detail::resolve(base_dir, detail::get_or<std::string>(j, "output_dir", "oodsim_out"));

    if (const auto it = j.find("embeddings"); it != j.end()) {
        if (it->is_string()) {
            c.embedding_path = detail::resolve(base_dir, it->get<std::string>());
        } else {
            c.embedding_path = detail::resolve(base_dir, detail::get_or<std::string>(*it, "path", ""));
            c.embedding_format = parse_vector_format(detail::get_or<std::string>(*it, "format", "text"));
        }
    }

    if (const auto it = j.find("corpora"); it != j.end()) {
        if (!it->is_array()) throw ConfigError("'corpora' must be a list");
        for (const auto& e : *it) {
            CorpusSpec s;
            s.name = detail::require_string(e, "name", "corpus entry");
            s.path = detail::resolve(base_dir, detail::require_string(e, "path", "corpus '" + s.name + "'"));
            s.format = parse_corpus_format(detail::get_or<std::string>(e, "format", "jsonl"));
            s.task = parse_task(detail::require_string(e, "task", "corpus '" + s.name + "'"));
            s.split = parse_split(detail::require_string(e, "split", "corpus '" + s.name + "'"));
            c.corpora.push_back(std::move(s));
        }
    }
    if (const auto it = j.find("pairs"); it != j.end()) {
        for (const auto& p : *it)
            c.pairs.push_back({detail::require_string(p, "train", "pair"), detail::require_string(p, "test", "pair")});
    }

    if (const auto it = j.find("modes"); it != j.end()) {
        for (const auto& [key, value] : it->items()) {
            if (!value.is_string()) throw ConfigError("mode for '" + key + "' must be a string");
            c.metric.modes[static_cast<std::size_t>(parse_metric(key))] = parse_metric_mode(value.get<std::string>());
        }
    }
    if (const auto it = j.find("mauve"); it != j.end()) {
        if (it->contains("k") && !(*it)["k"].is_null()) c.metric.mauve_k = detail::get_or<std::size_t>(*it, "k", 0);
        c.metric.mauve_c = detail::get_or<double>(*it, "c", c.metric.mauve_c);
        c.metric.mauve_grid = detail::get_or<std::size_t>(*it, "grid", c.metric.mauve_grid);
    }
    if (const auto it = j.find("jsd"); it != j.end()) c.metric.jsd_k = detail::get_or<std::size_t>(*it, "k", c.metric.jsd_k);
    if (const auto it = j.find("kmeans"); it != j.end())
        c.metric.kmeans_iters = detail::get_or<std::size_t>(*it, "max_iters", c.metric.kmeans_iters);

    if (const auto it = j.find("performance"); it != j.end() && it->is_string())
        c.performance_table = detail::resolve(base_dir, it->get<std::string>());
    if (const auto it = j.find("correlation"); it != j.end()) {
        if (it->contains("methods")) {
            c.correlation_methods.clear();
            for (const auto& m : detail::string_list(*it, "methods"))
                c.correlation_methods.push_back(parse_correlation_method(m));
        }
        c.consistency_threshold = detail::get_or<double>(*it, "threshold", c.consistency_threshold);
        c.include_id_rows = detail::get_or<bool>(*it, "include_id_rows", c.include_id_rows);
    }
    if (const auto it = j.find("prepare"); it != j.end()) {
        c.prepare_enabled = detail::get_or<bool>(*it, "enabled", true);
        c.balance = detail::get_or<bool>(*it, "balance", c.balance);
    }
    return c;
}

/// Canonical JSON form; used for provenance hashing and prepared configs.
inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["seed"] = c.metric.seed;
    j["sample_k"] = c.metric.sample_k;
    auto& metrics = j["metrics"] = nlohmann::json::array();
    for (auto m : c.metrics) metrics.push_back(to_string(m));
    j["output_dir"] = c.output_dir.generic_string();
    j["embeddings"] = {{"path", c.embedding_path.generic_string()}, {"format", to_string(c.embedding_format)}};
    auto& corpora = j["corpora"] = nlohmann::json::array();
    for (const auto& s : c.corpora)
        corpora.push_back({{"name", s.name},
                           {"path", s.path.generic_string()},
                           {"format", to_string(s.format)},
                           {"task", to_string(s.task)},
                           {"split", to_string(s.split)}});
    if (!c.pairs.empty()) {
        auto& pairs = j["pairs"] = nlohmann::json::array();
        for (const auto& p : c.pairs) pairs.push_back({{"train", p.train}, {"test", p.test}});
    }
    auto& modes = j["modes"] = nlohmann::json::object();
    for (auto m : kAllMetrics) modes[std::string(to_string(m))] = to_string(c.metric.mode(m));
    j["mauve"] = {{"c", c.metric.mauve_c}, {"grid", c.metric.mauve_grid}};
    if (c.metric.mauve_k) j["mauve"]["k"] = *c.metric.mauve_k;
    j["jsd"] = {{"k", c.metric.jsd_k}};
    j["kmeans"] = {{"max_iters", c.metric.kmeans_iters}};
    if (c.performance_table) j["performance"] = c.performance_table->generic_string();
    auto& corr = j["correlation"];
    corr["methods"] = nlohmann::json::array();
    for (auto m : c.correlation_methods) corr["methods"].push_back(to_string(m));
    corr["threshold"] = c.consistency_threshold;
    corr["include_id_rows"] = c.include_id_rows;
    j["prepare"] = {{"enabled", c.prepare_enabled}, {"balance", c.balance}};
    return j;
}

inline std::string config_hash(const RunConfig& c) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(to_json(c).dump())));
    return buf;
}

/// Reads a .toml or .json config file.
inline RunConfig load_config(const fs::path& path) {
    if (!fs::exists(path)) throw ConfigError("config file '" + path.string() + "' does not exist");
    std::string text;
    try {
        text = read_file(path);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    nlohmann::json j;
    if (path.extension() == ".toml") {
        j = toml::parse(text);
    } else {
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(path.string() + ": " + e.what());
        }
    }
    return config_from_json(j, path.parent_path());
}

inline const CorpusSpec* find_corpus(const RunConfig& c, const std::string& name, Split split) {
    for (const auto& s : c.corpora)
        if (s.name == name && s.split == split) return &s;
    return nullptr;
}

/// The test-role corpus of a dataset: its test split, else its validation split.
inline const CorpusSpec* find_test_corpus(const RunConfig& c, const std::string& name) {
    if (auto* s = find_corpus(c, name, Split::Test)) return s;
    return find_corpus(c, name, Split::Validation);
}

/// (train spec, test spec) pairs to score, in a deterministic order.
inline std::vector<std::pair<const CorpusSpec*, const CorpusSpec*>> resolve_pairs(const RunConfig& c) {
    std::vector<std::pair<const CorpusSpec*, const CorpusSpec*>> out;
    if (!c.pairs.empty()) {
        for (const auto& p : c.pairs) {
            const auto* train = find_corpus(c, p.train, Split::Train);
            const auto* test = find_test_corpus(c, p.test);
            if (!train) throw ConfigError("pair refers to unknown train corpus '" + p.train + "'");
            if (!test) throw ConfigError("pair refers to unknown test corpus '" + p.test + "'");
            if (train->task != test->task)
                throw ConfigError("pair " + p.train + "/" + p.test + " mixes tasks");
            out.emplace_back(train, test);
        }
        return out;
    }
    for (const auto& train : c.corpora) {
        if (train.split != Split::Train) continue;
        for (const auto& test : c.corpora) {
            if (test.task != train.task) continue;
            if (test.split == Split::Test || (test.split == Split::Validation && !find_corpus(c, test.name, Split::Test)))
                out.emplace_back(&train, &test);
        }
    }
    return out;
}

/// Invariant checks; every failure is a ConfigError.
inline void validate_config(const RunConfig& c, bool need_corpora = true) {
    if (c.metric.sample_k < 2) throw ConfigError("sample_k must be at least 2");
    if (c.metrics.empty()) throw ConfigError("at least one metric is required");
    if (c.metric.mauve_grid < 2) throw ConfigError("mauve grid must be at least 2");
    if (!(c.metric.mauve_c > 0.0)) throw ConfigError("mauve c must be positive");
    if (c.metric.jsd_k == 0) throw ConfigError("jsd k must be positive");
    if (c.metric.mauve_k && *c.metric.mauve_k == 0) throw ConfigError("mauve k must be positive");
    if (c.correlation_methods.empty()) throw ConfigError("at least one correlation method is required");
    if (need_corpora) {
        if (c.corpora.empty()) throw ConfigError("no corpora configured");
        for (std::size_t i = 0; i < c.corpora.size(); ++i) {
            const auto& s = c.corpora[i];
            if (!fs::exists(s.path)) throw ConfigError("corpus file '" + s.path.string() + "' does not exist");
            if (s.format == CorpusFormat::CSV && s.task != Task::Sentiment)
                throw ConfigError("corpus '" + s.name + "': CSV is only accepted for sentiment corpora");
            for (std::size_t k = 0; k < i; ++k)
                if (c.corpora[k].name == s.name && c.corpora[k].split == s.split)
                    throw ConfigError("corpus '" + s.name + "' (" + std::string(to_string(s.split)) + ") listed twice");
        }
        if (c.embedding_path.empty()) throw ConfigError("no word-vector file configured (embeddings.path)");
        if (!fs::exists(c.embedding_path))
            throw ConfigError("word-vector file '" + c.embedding_path.string() + "' does not exist");
        if (resolve_pairs(c).empty()) throw ConfigError("no (train, test) corpus pairs to evaluate");
    }
    if (c.performance_table && !fs::exists(*c.performance_table))
        throw ConfigError("performance table '" + c.performance_table->string() + "' does not exist");
}

} // namespace oodsim
