#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "oodsim/embeddings.hpp"
#include "oodsim/error.hpp"
#include "oodsim/metrics/kmeans.hpp"

namespace oodsim {

/// Probability mass over k bins.
class Histogram {
public:
    Histogram() = default;

    /// Normalizes nonnegative counts with a positive total.
    static Histogram from_counts(std::vector<double> counts) {
        double total = 0.0;
        for (double c : counts) {
            if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("Histogram: counts must be finite and nonnegative");
            total += c;
        }
        if (total <= 0.0) throw std::invalid_argument("Histogram: counts sum to zero");
        for (auto& c : counts) c /= total;
        Histogram h;
        h.mass_ = std::move(counts);
        return h;
    }

    std::size_t bins() const { return mass_.size(); }
    const std::vector<double>& mass() const { return mass_; }
    double operator[](std::size_t i) const { return mass_[i]; }

    friend bool operator==(const Histogram&, const Histogram&) = default;

private:
    std::vector<double> mass_;
};

/// Nearest-centroid counts normalized over the codebook's k bins.
inline Histogram quantize(std::span<const Vector> points, const Codebook& codebook) {
    if (points.empty()) throw DataError("quantize: no points");
    std::vector<double> counts(codebook.centroids.size(), 0.0);
    for (const auto& p : points) {
        if (p.size() != codebook.centroids.front().size()) throw std::invalid_argument("quantize: dimension mismatch");
        counts[nearest_centroid(codebook.centroids, p)] += 1.0;
    }
    return Histogram::from_counts(std::move(counts));
}

/// Weighted variant: each cloud point contributes its weight to its bin.
inline Histogram quantize(const TokenCloud& cloud, const Codebook& codebook) {
    if (cloud.degenerate || cloud.points.empty()) throw DataError("quantize: degenerate cloud");
    std::vector<double> counts(codebook.centroids.size(), 0.0);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (cloud.points[i].size() != codebook.centroids.front().size())
            throw std::invalid_argument("quantize: dimension mismatch");
        counts[nearest_centroid(codebook.centroids, cloud.points[i])] += cloud.weights[i];
    }
    return Histogram::from_counts(std::move(counts));
}

/// KL(p || q) in nats, with 0 log 0 = 0. Infinite if q lacks support of p.
inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: bin counts differ");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
        kl += p[i] * std::log(p[i] / q[i]);
    }
    return std::max(kl, 0.0);
}

/// Jensen-Shannon distance with base-2 logarithms, in [0, 1].
inline double jsd(const Histogram& p, const Histogram& q) {
    if (p.bins() != q.bins()) throw std::invalid_argument("jsd: bin counts differ");
    std::vector<double> m(p.bins());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
    const double div = 0.5 * (kl_divergence(p.mass(), m) + kl_divergence(q.mass(), m)) / std::log(2.0);
    return std::clamp(std::sqrt(std::max(div, 0.0)), 0.0, 1.0);
}

struct CurvePoint {
    double x = 0.0;
    double y = 0.0;
};

/// Divergence frontier between p and q, sorted by x.
///
/// For lambda_i = i / (grid + 1), i = 1..grid, the mixture r = lambda p +
/// (1 - lambda) q yields (exp(-c KL(p||r)), exp(-c KL(q||r))). The endpoints
/// (0, 1) and (1, 0) are appended. The mixture weights are computed as two
/// exact quotients so that swapping p and q mirrors the curve bit for bit.
inline std::vector<CurvePoint> divergence_curve(const Histogram& p, const Histogram& q, double c, std::size_t grid) {
    if (p.bins() != q.bins()) throw std::invalid_argument("divergence_curve: bin counts differ");
    if (grid < 2) throw std::invalid_argument("divergence_curve: grid must be at least 2");
    if (!(c > 0.0)) throw std::invalid_argument("divergence_curve: scaling constant must be positive");
    std::vector<CurvePoint> curve;
    curve.reserve(grid + 2);
    curve.push_back({0.0, 1.0});
    std::vector<double> r(p.bins());
    const double denom = static_cast<double>(grid + 1);
    for (std::size_t i = 1; i <= grid; ++i) {
        const double wp = static_cast<double>(i) / denom;
        const double wq = static_cast<double>(grid + 1 - i) / denom;
        for (std::size_t b = 0; b < r.size(); ++b) r[b] = wp * p[b] + wq * q[b];
        curve.push_back({std::exp(-c * kl_divergence(p.mass(), r)), std::exp(-c * kl_divergence(q.mass(), r))});
    }
    curve.push_back({1.0, 0.0});
    std::stable_sort(curve.begin(), curve.end(), [](const CurvePoint& a, const CurvePoint& b) {
        if (a.x != b.x) return a.x < b.x;
        return a.y > b.y;
    });
    return curve;
}

/// Trapezoidal area under a curve already sorted by x.
inline double area_under_curve(std::span<const CurvePoint> curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i)
        area += (curve[i].x - curve[i - 1].x) * (curve[i].y + curve[i - 1].y) * 0.5;
    return area;
}

} // namespace oodsim
