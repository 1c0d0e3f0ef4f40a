#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "oodsim/embeddings.hpp"
#include "oodsim/error.hpp"
#include "oodsim/metrics/divergence.hpp"
#include "oodsim/metrics/kmeans.hpp"

namespace oodsim {

struct MauveOptions {
    std::optional<std::size_t> k; // default max(2, floor(total / 10))
    double c = 5.0;
    std::size_t grid = 100;
    std::uint64_t seed = 0;
    std::size_t max_iters = kDefaultKMeansIterations;
};

inline std::size_t default_mauve_clusters(std::size_t total_points) {
    return std::max<std::size_t>(2, total_points / 10);
}

/// Area under the divergence frontier of two histograms.
inline double mauve_from_histograms(const Histogram& p, const Histogram& q, double c, std::size_t grid) {
    const auto curve = divergence_curve(p, q, c, grid);
    return std::clamp(area_under_curve(curve), 0.0, 1.0);
}

/// Union of two point sets in lexicographic order, so that clustering does
/// not depend on which set is passed first.
inline std::vector<Vector> canonical_union(std::span<const Vector> a, std::span<const Vector> b) {
    std::vector<Vector> all;
    all.reserve(a.size() + b.size());
    all.insert(all.end(), a.begin(), a.end());
    all.insert(all.end(), b.begin(), b.end());
    std::sort(all.begin(), all.end());
    return all;
}

/// MAUVE between two point sets: joint k-means quantization of the union,
/// then the trapezoidal area under the divergence frontier.
inline double mauve(std::span<const Vector> p, std::span<const Vector> q, const MauveOptions& opts = {}) {
    if (p.empty() || q.empty()) throw DataError("mauve: both sets must be non-empty");
    const auto all = canonical_union(p, q);
    const std::size_t k = opts.k.value_or(default_mauve_clusters(all.size()));
    if (k > all.size())
        throw DataError("mauve: k=" + std::to_string(k) + " exceeds the " + std::to_string(all.size()) + " points");
    const auto codebook = kmeans(all, k, opts.seed, opts.max_iters);
    return mauve_from_histograms(quantize(p, codebook), quantize(q, codebook), opts.c, opts.grid);
}

namespace detail {
inline std::vector<Vector> usable_vectors(const EmbeddingSet& set) {
    std::vector<Vector> out;
    for (const auto& s : set.sentences)
        if (!s.degenerate) out.push_back(s.vector);
    return out;
}
} // namespace detail

/// Set-level MAUVE over the non-degenerate sentence vectors of two sets.
inline double mauve(const EmbeddingSet& p, const EmbeddingSet& q, const MauveOptions& opts = {}) {
    const auto pv = detail::usable_vectors(p);
    const auto qv = detail::usable_vectors(q);
    if (pv.empty() || qv.empty())
        throw DataError("mauve: set '" + (pv.empty() ? p.corpus_name : q.corpus_name) + "' has no usable embeddings");
    return mauve(pv, qv, opts);
}

} // namespace oodsim
