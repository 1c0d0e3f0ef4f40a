#include <gtest/gtest.h>

#include <cmath>

#include "oodsim/correlation/rank.hpp"
#include "support.hpp"

using namespace oodsim;
using namespace oodsim::testing;

using V = std::vector<double>;

TEST(Kendall, Examples) {
    EXPECT_EQ(*kendall_tau(V{1, 2, 3}, V{10, 20, 30}), 1.0);
    EXPECT_EQ(*kendall_tau(V{1, 2, 3}, V{3, 2, 1}), -1.0);
    EXPECT_EQ(*kendall_tau(V{1, 2, 3}, V{1, 3, 2}), 1.0 / 3.0);
    EXPECT_FALSE(kendall_tau(V{1, 1, 1}, V{1, 2, 3}));
}

TEST(Pearson, Examples) {
    EXPECT_NEAR(*pearson(V{1, 2, 3, 4}, V{3, 5, 7, 9}), 1.0, 1e-15);
    EXPECT_NEAR(*pearson(V{1, 2, 3}, V{-1, -2, -3}), -1.0, 1e-15);
    EXPECT_NEAR(*pearson(V{1, 2, 3}, V{1, 2, 4}), 0.9820, 1e-4);
    // sxy = 3, sxx = 2, syy = 14/3
    EXPECT_NEAR(*pearson(V{1, 2, 3}, V{1, 2, 4}), 3.0 / std::sqrt(2.0 * 14.0 / 3.0), 1e-15);
    EXPECT_FALSE(pearson(V{2, 2, 2}, V{1, 2, 3}));
}

TEST(Spearman, Examples) {
    EXPECT_NEAR(*spearman(V{1, 2, 3, 4}, V{1, 8, 27, 64}), 1.0, 1e-15);
    EXPECT_NEAR(*spearman(V{1, 2, 3, 4}, V{4, 3, 2, 1}), -1.0, 1e-15);
    EXPECT_NEAR(*spearman(V{1, 2, 3}, V{2, 1, 3}), 0.5, 1e-15);
    EXPECT_EQ(average_ranks(V{10, 20, 20, 5}), (V{2, 3.5, 3.5, 1}));
}

TEST(Correlation, Preconditions) {
    EXPECT_THROW(kendall_tau(V{1}, V{1}), std::invalid_argument);
    EXPECT_THROW(pearson(V{1, 2}, V{1, 2, 3}), std::invalid_argument);
    EXPECT_EQ(*correlation(CorrelationMethod::Spearman, V{1, 2}, V{2, 3}), 1.0);
    EXPECT_EQ(parse_correlation_method("kendall"), CorrelationMethod::KendallTau);
    EXPECT_EQ(parse_correlation_method(to_string(CorrelationMethod::Pearson)), CorrelationMethod::Pearson);
}

TEST(Correlation, MatchBruteForceOnRandomVectorsWithTies) {
    Rng rng(12);
    for (int t = 0; t < 10000; ++t) {
        const std::size_t n = 2 + rng.below(49);
        const bool ties = t % 2 == 0;
        V x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = ties ? static_cast<double>(rng.below(5)) : rng.uniform(-10, 10);
            y[i] = ties ? static_cast<double>(rng.below(4)) : rng.uniform(-10, 10);
        }
        const auto k = kendall_tau(x, y), ko = kendall_oracle(x, y);
        ASSERT_EQ(k.has_value(), ko.has_value());
        if (k) {
            ASSERT_NEAR(*k, *ko, 1e-9);
        }
        const auto p = pearson(x, y), po = pearson_oracle(x, y);
        ASSERT_EQ(p.has_value(), po.has_value());
        if (p) {
            ASSERT_NEAR(*p, *po, 1e-9);
        }
        const auto s = spearman(x, y), so = spearman_oracle(x, y);
        ASSERT_EQ(s.has_value(), so.has_value());
        if (s) {
            ASSERT_NEAR(*s, *so, 1e-9);
        }
    }
}

TEST(Correlation, BoundedAndSymmetric) {
    Rng rng(13);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 3 + rng.below(20);
        V x(n), y(n);
        for (auto& v : x) v = rng.uniform();
        for (auto& v : y) v = rng.uniform();
        for (auto m : {CorrelationMethod::KendallTau, CorrelationMethod::Pearson, CorrelationMethod::Spearman}) {
            const double c = *correlation(m, x, y);
            EXPECT_LE(std::abs(c), 1.0);
            EXPECT_NEAR(c, *correlation(m, y, x), 1e-12);
        }
    }
}
