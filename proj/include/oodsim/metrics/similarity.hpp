#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oodsim/corpus.hpp"
#include "oodsim/embeddings.hpp"
#include "oodsim/error.hpp"
#include "oodsim/metrics/cosine.hpp"
#include "oodsim/metrics/divergence.hpp"
#include "oodsim/metrics/kmeans.hpp"
#include "oodsim/metrics/mauve.hpp"
#include "oodsim/metrics/transport.hpp"
#include "oodsim/random.hpp"

namespace oodsim {

enum class Metric { Cosine, Mauve, Wstn, JSD };
enum class Orientation { SimilarityHigherCloser, DistanceLowerCloser };
enum class MetricMode { Pairwise, Set };

inline constexpr std::array<Metric, 4> kAllMetrics = {Metric::Cosine, Metric::Mauve, Metric::Wstn, Metric::JSD};

inline std::string_view to_string(Metric m) {
    switch (m) {
    case Metric::Cosine: return "Cosine";
    case Metric::Mauve: return "Mauve";
    case Metric::Wstn: return "Wstn";
    case Metric::JSD: return "JSD";
    }
    return "?";
}

inline Metric parse_metric(std::string_view text) {
    const auto s = detail::lower(text);
    if (s == "cosine" || s == "cos") return Metric::Cosine;
    if (s == "mauve") return Metric::Mauve;
    if (s == "wstn" || s == "wasserstein" || s == "emd") return Metric::Wstn;
    if (s == "jsd" || s == "jensen-shannon" || s == "jensen_shannon") return Metric::JSD;
    throw ConfigError("unknown metric '" + std::string(text) + "'");
}

inline std::string_view to_string(MetricMode m) { return m == MetricMode::Pairwise ? "pairwise" : "set"; }

inline MetricMode parse_metric_mode(std::string_view text) {
    const auto s = detail::lower(text);
    if (s == "pairwise" || s == "pair") return MetricMode::Pairwise;
    if (s == "set" || s == "set-level" || s == "set_level") return MetricMode::Set;
    throw ConfigError("unknown metric mode '" + std::string(text) + "'");
}

inline constexpr Orientation orientation(Metric m) {
    return (m == Metric::Cosine || m == Metric::Mauve) ? Orientation::SimilarityHigherCloser
                                                       : Orientation::DistanceLowerCloser;
}

struct MetricScore {
    Metric metric = Metric::Cosine;
    double value = 0.0;
    Orientation orientation = Orientation::SimilarityHigherCloser;
    std::size_t pairs = 0;    // pair (or set) evaluations that produced a score
    std::size_t excluded = 0; // degenerate items left out of the average
};

/// True when value lies in the documented range for the metric.
inline bool in_metric_range(Metric m, double value) {
    switch (m) {
    case Metric::Cosine: return value >= -1.0 && value <= 1.0;
    case Metric::Mauve:
    case Metric::JSD: return value >= 0.0 && value <= 1.0;
    case Metric::Wstn: return value >= 0.0;
    }
    return false;
}

struct MetricConfig {
    std::size_t sample_k = 20;
    std::uint64_t seed = 0;
    // indexed by Metric; MAUVE is set-level by default, the rest pairwise
    std::array<MetricMode, 4> modes = {MetricMode::Pairwise, MetricMode::Set, MetricMode::Pairwise, MetricMode::Pairwise};
    std::size_t jsd_k = 8;
    std::optional<std::size_t> mauve_k;
    double mauve_c = 5.0;
    std::size_t mauve_grid = 100;
    std::size_t kmeans_iters = kDefaultKMeansIterations;

    MetricMode mode(Metric m) const { return modes[static_cast<std::size_t>(m)]; }
};

namespace detail {

inline std::vector<Vector> all_cloud_points(const EmbeddingSet& a, const EmbeddingSet& b) {
    std::vector<Vector> pa, pb;
    for (const auto& c : a.clouds)
        if (!c.degenerate) pa.insert(pa.end(), c.points.begin(), c.points.end());
    for (const auto& c : b.clouds)
        if (!c.degenerate) pb.insert(pb.end(), c.points.begin(), c.points.end());
    return canonical_union(pa, pb);
}

inline MetricScore finish(Metric metric, double sum, std::size_t pairs, std::size_t excluded, const std::string& what) {
    if (pairs == 0) throw DataError(std::string(to_string(metric)) + ": every pair is degenerate for " + what);
    MetricScore score{metric, sum / static_cast<double>(pairs), orientation(metric), pairs, excluded};
    if (metric == Metric::Cosine) score.value = std::clamp(score.value, -1.0, 1.0);
    if (metric == Metric::JSD || metric == Metric::Mauve) score.value = std::clamp(score.value, 0.0, 1.0);
    return score;
}

} // namespace detail

/// Mean of the metric over all |a| x |b| cross pairs, skipping degenerate
/// pairs. Cosine uses sentence vectors, Wstn token clouds, JSD per-sentence
/// histograms over a codebook fit on the union of both sets' token vectors,
/// and Mauve the token clouds of each pair.
inline MetricScore pairwise_mean(const EmbeddingSet& a, const EmbeddingSet& b, Metric metric,
                                 const MetricConfig& config, std::uint64_t seed) {
    const std::string what = a.corpus_name + " vs " + b.corpus_name;
    double sum = 0.0;
    std::size_t pairs = 0, excluded = 0;

    switch (metric) {
    case Metric::Cosine:
        for (const auto& sa : a.sentences)
            for (const auto& sb : b.sentences) {
                const auto r = cosine(sa.vector, sb.vector);
                if (sa.degenerate || sb.degenerate || r.degenerate) {
                    ++excluded;
                    continue;
                }
                sum += r.value;
                ++pairs;
            }
        break;
    case Metric::Wstn:
        for (const auto& ca : a.clouds)
            for (const auto& cb : b.clouds) {
                const auto w = wasserstein(ca, cb);
                if (!w) {
                    ++excluded;
                    continue;
                }
                sum += *w;
                ++pairs;
            }
        break;
    case Metric::JSD: {
        const auto points = detail::all_cloud_points(a, b);
        if (points.empty()) throw DataError("JSD: every pair is degenerate for " + what);
        const auto codebook = kmeans(points, std::min(config.jsd_k, points.size()), seed, config.kmeans_iters);
        std::vector<std::optional<Histogram>> ha, hb;
        for (const auto& c : a.clouds) ha.push_back(c.degenerate ? std::nullopt : std::optional(quantize(c, codebook)));
        for (const auto& c : b.clouds) hb.push_back(c.degenerate ? std::nullopt : std::optional(quantize(c, codebook)));
        for (const auto& x : ha)
            for (const auto& y : hb) {
                if (!x || !y) {
                    ++excluded;
                    continue;
                }
                sum += jsd(*x, *y);
                ++pairs;
            }
        break;
    }
    case Metric::Mauve: {
        MauveOptions opts{config.mauve_k, config.mauve_c, config.mauve_grid, seed, config.kmeans_iters};
        for (const auto& ca : a.clouds)
            for (const auto& cb : b.clouds) {
                if (ca.degenerate || cb.degenerate) {
                    ++excluded;
                    continue;
                }
                auto pair_opts = opts;
                if (pair_opts.k) pair_opts.k = std::min(*pair_opts.k, ca.size() + cb.size());
                sum += mauve(ca.points, cb.points, pair_opts);
                ++pairs;
            }
        break;
    }
    }
    return detail::finish(metric, sum, pairs, excluded, what);
}

/// One score between the two sets treated as wholes (sentence vectors).
inline MetricScore set_similarity(const EmbeddingSet& a, const EmbeddingSet& b, Metric metric,
                                  const MetricConfig& config, std::uint64_t seed) {
    const auto va = detail::usable_vectors(a);
    const auto vb = detail::usable_vectors(b);
    const std::size_t excluded = a.degenerate_count() + b.degenerate_count();
    const std::string what = a.corpus_name + " vs " + b.corpus_name;
    if (va.empty() || vb.empty()) throw DataError(std::string(to_string(metric)) + ": no usable embeddings for " + what);

    double value = 0.0;
    switch (metric) {
    case Metric::Cosine: {
        Vector ma(va.front().size(), 0.0), mb(vb.front().size(), 0.0);
        for (const auto& v : va)
            for (std::size_t d = 0; d < v.size(); ++d) ma[d] += v[d] / static_cast<double>(va.size());
        for (const auto& v : vb)
            for (std::size_t d = 0; d < v.size(); ++d) mb[d] += v[d] / static_cast<double>(vb.size());
        const auto r = cosine(ma, mb);
        if (r.degenerate) throw DataError("Cosine: zero mean vector for " + what);
        value = r.value;
        break;
    }
    case Metric::Wstn:
        value = *wasserstein(std::span<const Vector>(va), std::span<const Vector>(vb));
        break;
    case Metric::JSD: {
        const auto all = canonical_union(va, vb);
        const auto codebook = kmeans(all, std::min(config.jsd_k, all.size()), seed, config.kmeans_iters);
        value = jsd(quantize(va, codebook), quantize(vb, codebook));
        break;
    }
    case Metric::Mauve:
        value = mauve(va, vb, MauveOptions{config.mauve_k, config.mauve_c, config.mauve_grid, seed, config.kmeans_iters});
        break;
    }
    return detail::finish(metric, value, 1, excluded, what);
}

inline std::string corpus_key(const Corpus& c) { return c.name + "/" + std::string(to_string(c.split)); }

/// Seed of the k-sample drawn from a corpus; depends only on the corpus.
inline std::uint64_t draw_seed(std::uint64_t master, const Corpus& c) {
    return derive_seed(master, corpus_key(c), "sample");
}

inline std::uint64_t metric_seed(std::uint64_t master, const Corpus& train, const Corpus& test, Metric m) {
    return derive_seed(master, corpus_key(train) + "|" + corpus_key(test), to_string(m));
}

/// Draws k samples from each corpus, embeds them and scores every requested
/// metric in its configured mode.
inline std::vector<MetricScore> corpus_similarity(const WordVectorTable& table, const Corpus& train,
                                                  const Corpus& test, std::span<const Metric> metrics,
                                                  const MetricConfig& config) {
    const auto a = embed_set(table, sample_k(train, config.sample_k, draw_seed(config.seed, train)));
    const auto b = embed_set(table, sample_k(test, config.sample_k, draw_seed(config.seed, test)));
    std::vector<MetricScore> scores;
    for (auto m : metrics) {
        const auto seed = metric_seed(config.seed, train, test, m);
        scores.push_back(config.mode(m) == MetricMode::Pairwise ? pairwise_mean(a, b, m, config, seed)
                                                                : set_similarity(a, b, m, config, seed));
    }
    return scores;
}

inline MetricScore corpus_similarity(const WordVectorTable& table, const Corpus& train, const Corpus& test,
                                     Metric metric, const MetricConfig& config) {
    const Metric one[] = {metric};
    return corpus_similarity(table, train, test, one, config).front();
}

} // namespace oodsim
