#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "oodsim/embeddings.hpp"
#include "oodsim/random.hpp"

namespace oodsim {

struct Codebook {
    std::vector<Vector> centroids;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    double inertia = 0.0; // sum of squared distances at convergence
    std::size_t iterations = 0;
    std::vector<double> inertia_trace; // after every assignment step
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

/// Index of the nearest centroid; ties go to the lowest index.
inline std::size_t nearest_centroid(const std::vector<Vector>& centroids, std::span<const double> point) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = squared_distance(centroids[c], point);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

inline constexpr std::size_t kDefaultKMeansIterations = 100;

/// Lloyd's algorithm with k-means++ seeding.
///
/// Iterates until the assignment reaches a fixpoint or max_iters updates have
/// run. A cluster that becomes empty is re-seeded at the point farthest from
/// its current centroid.
inline Codebook kmeans(std::span<const Vector> points, std::size_t k, std::uint64_t seed,
                       std::size_t max_iters = kDefaultKMeansIterations) {
    if (k == 0) throw std::invalid_argument("kmeans: k must be positive");
    if (k > points.size())
        throw std::invalid_argument("kmeans: k=" + std::to_string(k) + " exceeds point count " +
                                    std::to_string(points.size()));
    const std::size_t n = points.size();
    const std::size_t dim = points.front().size();
    for (const auto& p : points)
        if (p.size() != dim) throw std::invalid_argument("kmeans: points differ in dimension");

    Codebook cb;
    cb.k = k;
    cb.seed = seed;
    Rng rng(seed);

    // k-means++ seeding
    std::vector<char> chosen(n, 0);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    std::size_t first = static_cast<std::size_t>(rng.below(n));
    cb.centroids.push_back(points[first]);
    chosen[first] = 1;
    while (cb.centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared_distance(points[i], cb.centroids.back()));
            total += d2[i];
        }
        std::size_t pick = n;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) continue;
                acc += d2[i];
                pick = i;
                if (acc > target) break;
            }
        }
        if (pick == n) { // every remaining point coincides with a centroid
            for (std::size_t i = 0; i < n; ++i)
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
        }
        chosen[pick] = 1;
        cb.centroids.push_back(points[pick]);
    }

    std::vector<std::size_t> assign(n, 0);
    auto assign_step = [&] {
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = nearest_centroid(cb.centroids, points[i]);
            changed |= c != assign[i];
            assign[i] = c;
            inertia += squared_distance(points[i], cb.centroids[c]);
        }
        cb.inertia = inertia;
        cb.inertia_trace.push_back(inertia);
        return changed;
    };

    assign_step();
    std::vector<std::size_t> counts(k);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        // update step
        std::fill(counts.begin(), counts.end(), 0);
        std::vector<Vector> sums(k, Vector(dim, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[assign[i]];
            for (std::size_t d = 0; d < dim; ++d) sums[assign[i]][d] += points[i][d];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t d = 0; d < dim; ++d) cb.centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
        }
        std::vector<char> reseeded(n, 0);
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (reseeded[i]) continue;
                const double d = squared_distance(points[i], cb.centroids[assign[i]]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            reseeded[far] = 1;
            cb.centroids[c] = points[far];
        }
        ++cb.iterations;
        if (!assign_step()) break;
    }
    return cb;
}

} // namespace oodsim
