#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <unistd.h>
#include <numeric>
#include <string>
#include <vector>

#include "oodsim/embeddings.hpp"
#include "oodsim/random.hpp"

namespace oodsim::testing {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = fs::temp_directory_path() / ("oodsim_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline std::vector<Vector> random_points(Rng& rng, std::size_t n, std::size_t dim, double lo = -1.0, double hi = 1.0) {
    std::vector<Vector> out(n, Vector(dim));
    for (auto& p : out)
        for (auto& x : p) x = rng.uniform(lo, hi);
    return out;
}

/// Table with tokens a, b, c... mapped to the given vectors.
inline WordVectorTable letter_table(const std::vector<Vector>& vectors) {
    WordVectorTable t(vectors.front().size());
    for (std::size_t i = 0; i < vectors.size(); ++i) t.add(std::string(1, static_cast<char>('a' + i)), vectors[i]);
    return t;
}

/// Brute-force Kendall tau-b from the pairwise sign definition.
inline std::optional<double> kendall_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double s = 0.0, n1 = 0.0, n2 = 0.0;
    const double n0 = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    auto sign = [](double v) { return static_cast<double>((v > 0) - (v < 0)); };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            s += sign(x[i] - x[j]) * sign(y[i] - y[j]);
            n1 += x[i] == x[j];
            n2 += y[i] == y[j];
        }
    const double denom = std::sqrt((n0 - n1) * (n0 - n2));
    if (denom == 0.0) return std::nullopt;
    return s / denom;
}

/// Pearson from the textbook covariance formula.
inline std::optional<double> pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    auto flat = [](const std::vector<double>& v) { return std::all_of(v.begin(), v.end(), [&](double a) { return a == v[0]; }); };
    if (flat(x) || flat(y)) return std::nullopt;
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

/// Average rank by counting: 1 + #smaller + (#equal - 1) / 2.
inline std::vector<double> rank_oracle(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double less = 0, equal = 0;
        for (double w : v) {
            less += w < v[i];
            equal += w == v[i];
        }
        r[i] = 1.0 + less + (equal - 1.0) / 2.0;
    }
    return r;
}

inline std::optional<double> spearman_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson_oracle(rank_oracle(x), rank_oracle(y));
}

} // namespace oodsim::testing
