#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "oodsim/error.hpp"
#include "oodsim/random.hpp"
#include "oodsim/text_io.hpp"

namespace oodsim {

enum class Task { Sentiment, MCQ, ExtractiveQA, NLI };
enum class Split { Train, Validation, Test };
enum class CorpusFormat { JSONL, CSV };

inline std::string_view to_string(Task task) {
    switch (task) {
    case Task::Sentiment: return "sentiment";
    case Task::MCQ: return "mcq";
    case Task::ExtractiveQA: return "extractive_qa";
    case Task::NLI: return "nli";
    }
    return "?";
}

inline std::string_view to_string(Split split) {
    switch (split) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
    }
    return "?";
}

inline std::string_view to_string(CorpusFormat format) {
    return format == CorpusFormat::JSONL ? "jsonl" : "csv";
}

namespace detail {
inline std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}
} // namespace detail

inline Task parse_task(std::string_view text) {
    const auto s = detail::lower(text);
    if (s == "sentiment") return Task::Sentiment;
    if (s == "mcq") return Task::MCQ;
    if (s == "extractive_qa" || s == "extractiveqa" || s == "qa") return Task::ExtractiveQA;
    if (s == "nli") return Task::NLI;
    throw ConfigError("unknown task '" + std::string(text) + "'");
}

inline Split parse_split(std::string_view text) {
    const auto s = detail::lower(text);
    if (s == "train") return Split::Train;
    if (s == "validation" || s == "val" || s == "dev") return Split::Validation;
    if (s == "test") return Split::Test;
    throw ConfigError("unknown split '" + std::string(text) + "'");
}

inline CorpusFormat parse_corpus_format(std::string_view text) {
    const auto s = detail::lower(text);
    if (s == "jsonl") return CorpusFormat::JSONL;
    if (s == "csv") return CorpusFormat::CSV;
    throw ConfigError("unknown corpus format '" + std::string(text) + "'");
}

/// One task instance. Which optional fields are present depends on the task.
struct Sample {
    std::string id;
    Task task = Task::Sentiment;
    std::string text_primary;                  // review, question or premise
    std::optional<std::string> text_secondary; // context or hypothesis
    std::optional<std::vector<std::string>> choices;
    std::optional<std::string> label;

    friend bool operator==(const Sample&, const Sample&) = default;
};

struct Corpus {
    std::string name;
    Task task = Task::Sentiment;
    Split split = Split::Train;
    std::vector<Sample> samples;

    std::size_t size() const { return samples.size(); }

    friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// Checks the per-sample and per-corpus invariants; throws DataError.
inline void validate_sample(const Sample& s) {
    const auto where = [&] { return "sample '" + s.id + "': "; };
    if (trim(s.text_primary).empty()) throw DataError(where() + "primary text is empty");
    if ((s.task == Task::MCQ) != s.choices.has_value())
        throw DataError(where() + (s.task == Task::MCQ ? "MCQ sample lacks choices" : "choices only allowed for MCQ"));
    if (s.choices && s.choices->empty()) throw DataError(where() + "choices list is empty");
    const bool needs_secondary = s.task == Task::ExtractiveQA || s.task == Task::NLI;
    if (needs_secondary && !s.text_secondary)
        throw DataError(where() + "missing " + (s.task == Task::NLI ? "hypothesis" : "context"));
    if (s.task == Task::Sentiment && s.text_secondary)
        throw DataError(where() + "sentiment samples carry a single text");
}

inline void validate_corpus(const Corpus& corpus) {
    if (corpus.samples.empty()) throw DataError("corpus '" + corpus.name + "' is empty");
    std::set<std::string_view> ids;
    for (const auto& s : corpus.samples) {
        if (s.task != corpus.task)
            throw DataError("corpus '" + corpus.name + "': sample '" + s.id + "' has task " +
                            std::string(to_string(s.task)) + ", expected " + std::string(to_string(corpus.task)));
        if (!ids.insert(s.id).second)
            throw DataError("corpus '" + corpus.name + "': duplicate sample id '" + s.id + "'");
        validate_sample(s);
    }
}

namespace detail {

inline std::optional<std::string> scalar_as_string(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return format_double(v.get<double>());
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return std::nullopt;
}

inline std::string required_string(const nlohmann::json& obj, const char* key, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null())
        throw DataError("line " + std::to_string(line) + ": missing field \"" + key + "\"");
    if (!it->is_string())
        throw DataError("line " + std::to_string(line) + ": field \"" + key + "\" must be a string");
    return it->get<std::string>();
}

inline std::optional<std::string> optional_scalar(const nlohmann::json& obj, const char* key, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    auto v = scalar_as_string(*it);
    if (!v) throw DataError("line " + std::to_string(line) + ": field \"" + key + "\" must be a scalar");
    return v;
}

inline std::string required_scalar(const nlohmann::json& obj, const char* key, std::size_t line) {
    auto v = optional_scalar(obj, key, line);
    if (!v) throw DataError("line " + std::to_string(line) + ": missing field \"" + key + "\"");
    return *v;
}

inline Sample sample_from_json(const nlohmann::json& obj, Task task, std::size_t line, std::size_t row) {
    if (!obj.is_object()) throw DataError("line " + std::to_string(line) + ": record is not a JSON object");
    Sample s;
    s.task = task;
    s.id = optional_scalar(obj, "id", line).value_or(std::to_string(row));
    switch (task) {
    case Task::Sentiment:
        s.text_primary = required_string(obj, "text", line);
        s.label = required_scalar(obj, "label", line);
        break;
    case Task::NLI:
        s.text_primary = required_string(obj, "premise", line);
        s.text_secondary = required_string(obj, "hypothesis", line);
        s.label = required_scalar(obj, "label", line);
        break;
    case Task::MCQ: {
        s.text_primary = required_string(obj, "question", line);
        if (obj.contains("context") && !obj["context"].is_null()) s.text_secondary = required_string(obj, "context", line);
        const auto it = obj.find("choices");
        if (it == obj.end() || it->is_null())
            throw DataError("line " + std::to_string(line) + ": missing field \"choices\"");
        if (!it->is_array()) throw DataError("line " + std::to_string(line) + ": field \"choices\" must be an array");
        std::vector<std::string> choices;
        for (const auto& c : *it) {
            auto v = scalar_as_string(c);
            if (!v) throw DataError("line " + std::to_string(line) + ": choices must be scalars");
            choices.push_back(std::move(*v));
        }
        s.choices = std::move(choices);
        s.label = required_scalar(obj, "label", line);
        break;
    }
    case Task::ExtractiveQA:
        s.text_primary = required_string(obj, "question", line);
        s.text_secondary = required_string(obj, "context", line);
        s.label = optional_scalar(obj, "answer", line);
        break;
    }
    if (trim(s.text_primary).empty())
        throw DataError("line " + std::to_string(line) + ": primary text field is empty");
    return s;
}

inline nlohmann::json sample_to_json(const Sample& s) {
    nlohmann::json obj;
    obj["id"] = s.id;
    switch (s.task) {
    case Task::Sentiment:
        obj["text"] = s.text_primary;
        if (s.label) obj["label"] = *s.label;
        break;
    case Task::NLI:
        obj["premise"] = s.text_primary;
        obj["hypothesis"] = s.text_secondary.value_or("");
        if (s.label) obj["label"] = *s.label;
        break;
    case Task::MCQ:
        obj["question"] = s.text_primary;
        if (s.text_secondary) obj["context"] = *s.text_secondary;
        obj["choices"] = s.choices.value_or(std::vector<std::string>{});
        if (s.label) obj["label"] = *s.label;
        break;
    case Task::ExtractiveQA:
        obj["question"] = s.text_primary;
        obj["context"] = s.text_secondary.value_or("");
        if (s.label) obj["answer"] = *s.label;
        break;
    }
    return obj;
}

inline std::vector<Sample> parse_jsonl(std::string_view text, Task task) {
    std::vector<Sample> samples;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw DataError("line " + std::to_string(line_no) + ": malformed JSON record (" + e.what() + ")");
        }
        samples.push_back(sample_from_json(obj, task, line_no, samples.size()));
    }
    return samples;
}

inline std::vector<Sample> parse_sentiment_csv(std::string_view text) {
    const auto rows = parse_csv(text);
    if (rows.empty()) return {};
    const auto& header = rows.front().fields;
    std::optional<std::size_t> text_col, label_col, id_col;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const auto h = lower(trim(header[i]));
        if (h == "text") text_col = i;
        else if (h == "label") label_col = i;
        else if (h == "id") id_col = i;
    }
    if (!text_col || !label_col) throw DataError("line 1: CSV header must contain columns text,label");
    std::vector<Sample> samples;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const auto need = std::max({*text_col, *label_col, id_col.value_or(0)}) + 1;
        if (row.fields.size() < need)
            throw DataError("line " + std::to_string(row.line) + ": expected " + std::to_string(header.size()) +
                            " columns, found " + std::to_string(row.fields.size()));
        Sample s;
        s.task = Task::Sentiment;
        s.id = id_col && !row.fields[*id_col].empty() ? row.fields[*id_col] : std::to_string(samples.size());
        s.text_primary = row.fields[*text_col];
        if (trim(s.text_primary).empty())
            throw DataError("line " + std::to_string(row.line) + ": field \"text\" is empty");
        if (row.fields[*label_col].empty())
            throw DataError("line " + std::to_string(row.line) + ": missing field \"label\"");
        s.label = row.fields[*label_col];
        samples.push_back(std::move(s));
    }
    return samples;
}

} // namespace detail

/// Loads and validates a corpus file. Missing ids become zero-based row indices.
inline Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format, Task task,
                          std::string name = {}, Split split = Split::Train) {
    const auto text = read_file(path);
    Corpus corpus;
    corpus.name = name.empty() ? path.stem().string() : std::move(name);
    corpus.task = task;
    corpus.split = split;
    try {
        if (format == CorpusFormat::JSONL) {
            corpus.samples = detail::parse_jsonl(text, task);
        } else {
            if (task != Task::Sentiment)
                throw DataError("CSV input is only supported for flat text,label tasks (sentiment)");
            corpus.samples = detail::parse_sentiment_csv(text);
        }
        if (corpus.samples.empty()) throw DataError("file contains no records");
        validate_corpus(corpus);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return corpus;
}

inline std::string to_jsonl(const Corpus& corpus) {
    std::string out;
    for (const auto& s : corpus.samples) {
        out += detail::sample_to_json(s).dump();
        out.push_back('\n');
    }
    return out;
}

inline void write_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
    write_file(path, to_jsonl(corpus));
}

namespace detail {
inline Corpus subset(const Corpus& corpus, const std::vector<std::size_t>& sorted_indices) {
    Corpus out{corpus.name, corpus.task, corpus.split, {}};
    out.samples.reserve(sorted_indices.size());
    for (auto i : sorted_indices) out.samples.push_back(corpus.samples[i]);
    return out;
}
} // namespace detail

/// Uniform sample of exactly k samples without replacement, in original order.
inline Corpus sample_k(const Corpus& corpus, std::size_t k, std::uint64_t seed) {
    if (k == 0) throw DataError("sample size must be positive");
    if (k > corpus.size())
        throw DataError("corpus '" + corpus.name + "' has " + std::to_string(corpus.size()) +
                        " samples, cannot draw " + std::to_string(k));
    Rng rng(seed);
    return detail::subset(corpus, sample_indices(corpus.size(), k, rng));
}

/// Downsamples every corpus to the size of the smallest one.
///
/// Each corpus uses its own sub-seed derived from (seed, corpus name), so the
/// draw for one corpus does not depend on which others are in the group.
inline std::vector<Corpus> downsample_group(const std::vector<Corpus>& corpora, std::uint64_t seed) {
    if (corpora.empty()) throw DataError("downsample_group: empty corpus list");
    for (const auto& c : corpora) {
        if (c.task != corpora.front().task || c.split != corpora.front().split)
            throw DataError("downsample_group: corpora '" + corpora.front().name + "' and '" + c.name +
                            "' differ in task or split");
    }
    std::size_t smallest = corpora.front().size();
    for (const auto& c : corpora) smallest = std::min(smallest, c.size());
    std::vector<Corpus> out;
    out.reserve(corpora.size());
    for (const auto& c : corpora) {
        if (c.size() == smallest) {
            out.push_back(c);
            continue;
        }
        Rng rng(derive_seed(seed, c.name + "/" + std::string(to_string(c.split)), "downsample"));
        out.push_back(detail::subset(c, sample_indices(c.size(), smallest, rng)));
    }
    return out;
}

/// Like downsample_group, but each corpus keeps its label proportions: the
/// target size is split across labels by largest remainder and each label is
/// sampled uniformly. A balanced corpus stays balanced when the target size
/// divides evenly. Every sample must carry a label.
inline std::vector<Corpus> downsample_group_stratified(const std::vector<Corpus>& corpora, std::uint64_t seed) {
    auto out = downsample_group(corpora, seed); // validates the group
    const std::size_t target = out.empty() ? 0 : std::min_element(out.begin(), out.end(), [](const Corpus& a, const Corpus& b) {
                                                    return a.size() < b.size();
                                                })->size();
    for (std::size_t c = 0; c < corpora.size(); ++c) {
        const auto& corpus = corpora[c];
        if (corpus.size() == target) continue;
        std::map<std::string, std::vector<std::size_t>> by_label;
        for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
            const auto& s = corpus.samples[i];
            if (!s.label) throw DataError("downsample: sample '" + s.id + "' in '" + corpus.name + "' has no label");
            by_label[*s.label].push_back(i);
        }
        std::vector<std::pair<std::string, std::size_t>> quota;
        std::vector<std::pair<double, std::size_t>> remainder; // (fraction, position in quota)
        std::size_t assigned = 0;
        for (const auto& [label, idx] : by_label) {
            const double exact = static_cast<double>(target) * static_cast<double>(idx.size()) / static_cast<double>(corpus.size());
            const auto whole = static_cast<std::size_t>(exact);
            remainder.emplace_back(exact - static_cast<double>(whole), quota.size());
            quota.emplace_back(label, whole);
            assigned += whole;
        }
        std::stable_sort(remainder.begin(), remainder.end(), [](auto a, auto b) { return a.first > b.first; });
        for (std::size_t r = 0; assigned < target; ++r, ++assigned) ++quota[remainder[r].second].second;

        std::vector<std::size_t> keep;
        for (const auto& [label, n] : quota) {
            const auto& idx = by_label[label];
            Rng rng(derive_seed(seed, corpus.name + "/" + std::string(to_string(corpus.split)) + "/" + label, "downsample"));
            for (auto j : sample_indices(idx.size(), n, rng)) keep.push_back(idx[j]);
        }
        std::sort(keep.begin(), keep.end());
        out[c] = detail::subset(corpus, keep);
    }
    return out;
}

/// Removes samples uniformly within over-represented classes until every
/// label occurs as often as the rarest one. Original order is kept.
inline Corpus balance_classes(const Corpus& corpus, std::uint64_t seed) {
    std::map<std::string, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
        const auto& s = corpus.samples[i];
        if (!s.label) throw DataError("balance_classes: sample '" + s.id + "' in '" + corpus.name + "' has no label");
        by_label[*s.label].push_back(i);
    }
    if (by_label.empty()) return corpus;
    std::size_t n_min = corpus.size();
    for (const auto& [label, idx] : by_label) n_min = std::min(n_min, idx.size());

    std::vector<std::size_t> keep;
    for (const auto& [label, idx] : by_label) {
        if (idx.size() == n_min) {
            keep.insert(keep.end(), idx.begin(), idx.end());
            continue;
        }
        Rng rng(derive_seed(seed, corpus.name + "/" + label, "balance"));
        for (auto j : sample_indices(idx.size(), n_min, rng)) keep.push_back(idx[j]);
    }
    std::sort(keep.begin(), keep.end());
    return detail::subset(corpus, keep);
}

/// Single-text rendering used as embedding input: fields joined by one space.
inline std::string flatten(const Sample& sample) {
    std::string out = sample.text_primary;
    auto append = [&out](const std::string& piece) {
        if (!out.empty()) out.push_back(' ');
        out += piece;
    };
    if (sample.text_secondary) append(*sample.text_secondary);
    if (sample.choices)
        for (const auto& c : *sample.choices) append(c);
    return out;
}

} // namespace oodsim
