#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "oodsim/corpus.hpp"
#include "oodsim/error.hpp"

// Rank and linear correlation coefficients. Each returns nullopt when the
// coefficient is undefined because one input has no variation.

namespace oodsim {

enum class CorrelationMethod { KendallTau, Pearson, Spearman };

inline std::string_view to_string(CorrelationMethod m) {
    switch (m) {
    case CorrelationMethod::KendallTau: return "kendall";
    case CorrelationMethod::Pearson: return "pearson";
    case CorrelationMethod::Spearman: return "spearman";
    }
    return "?";
}

inline CorrelationMethod parse_correlation_method(std::string_view text) {
    const auto s = detail::lower(text);
    if (s == "kendall" || s == "kendall_tau" || s == "kendalltau" || s == "tau") return CorrelationMethod::KendallTau;
    if (s == "pearson") return CorrelationMethod::Pearson;
    if (s == "spearman") return CorrelationMethod::Spearman;
    throw ConfigError("unknown correlation method '" + std::string(text) + "'");
}

namespace detail {

inline void check_pair(std::span<const double> xs, std::span<const double> ys, const char* who) {
    if (xs.size() != ys.size()) throw std::invalid_argument(std::string(who) + ": inputs differ in length");
    if (xs.size() < 2) throw std::invalid_argument(std::string(who) + ": need at least two observations");
}

inline bool constant(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

// Sum of t(t-1)/2 over runs of equal values in a sorted sequence.
template <typename Eq>
std::int64_t tied_pairs(std::size_t n, Eq&& equal) {
    std::int64_t total = 0, run = 1;
    for (std::size_t i = 1; i < n; ++i) {
        if (equal(i - 1, i)) {
            ++run;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    return total + run * (run - 1) / 2;
}

// Stable merge sort of v counting strict inversions.
inline std::int64_t count_inversions(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::int64_t swaps = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            swaps += static_cast<std::int64_t>(mid - i);
            buf[k++] = v[j++];
        } else {
            buf[k++] = v[i++];
        }
    }
    while (i < mid) buf[k++] = v[i++];
    while (j < hi) buf[k++] = v[j++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return swaps;
}

} // namespace detail

/// Kendall tau-b (tie corrected), computed with Knight's O(n log n) method.
inline std::optional<double> kendall_tau(std::span<const double> xs, std::span<const double> ys) {
    detail::check_pair(xs, ys, "kendall_tau");
    const std::size_t n = xs.size();
    std::vector<std::pair<double, double>> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = {xs[i], ys[i]};
    std::sort(pts.begin(), pts.end());

    const auto n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
    const auto n1 = detail::tied_pairs(n, [&](std::size_t a, std::size_t b) { return pts[a].first == pts[b].first; });
    const auto n3 = detail::tied_pairs(n, [&](std::size_t a, std::size_t b) { return pts[a] == pts[b]; });

    std::vector<double> y(n), buf(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = pts[i].second;
    const auto swaps = detail::count_inversions(y, buf, 0, n);
    const auto n2 = detail::tied_pairs(n, [&](std::size_t a, std::size_t b) { return y[a] == y[b]; });

    const auto denom_x = n0 - n1, denom_y = n0 - n2;
    if (denom_x == 0 || denom_y == 0) return std::nullopt;
    const auto numer = n0 - n1 - n2 + n3 - 2 * swaps;
    const double tau = static_cast<double>(numer) /
                       std::sqrt(static_cast<double>(denom_x) * static_cast<double>(denom_y));
    return std::clamp(tau, -1.0, 1.0);
}

/// Sample Pearson correlation.
inline std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys) {
    detail::check_pair(xs, ys, "pearson");
    if (detail::constant(xs) || detail::constant(ys)) return std::nullopt;
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// 1-based ranks; tied values share the mean of the positions they span.
inline std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

/// Pearson correlation of average ranks.
inline std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys) {
    detail::check_pair(xs, ys, "spearman");
    return pearson(average_ranks(xs), average_ranks(ys));
}

inline std::optional<double> correlation(CorrelationMethod method, std::span<const double> xs, std::span<const double> ys) {
    switch (method) {
    case CorrelationMethod::KendallTau: return kendall_tau(xs, ys);
    case CorrelationMethod::Pearson: return pearson(xs, ys);
    case CorrelationMethod::Spearman: return spearman(xs, ys);
    }
    return std::nullopt;
}

} // namespace oodsim
