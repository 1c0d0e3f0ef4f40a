#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "oodsim/metrics/transport.hpp"
#include "support.hpp"

using namespace oodsim;
using oodsim::testing::random_points;

namespace {

double dist(const Vector& a, const Vector& b) {
    double s = 0;
    for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
    return std::sqrt(s);
}

// Minimum over all n! matchings of the mean matched distance.
double permutation_oracle(const std::vector<Vector>& a, const std::vector<Vector>& b) {
    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double c = 0;
        for (std::size_t i = 0; i < a.size(); ++i) c += dist(a[i], b[perm[i]]);
        best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(a.size());
}

// Uniform clouds of sizes n and m: replicate to lcm(n, m) points each, which
// turns the problem into a matching.
double replicated_oracle(const std::vector<Vector>& a, const std::vector<Vector>& b) {
    const std::size_t l = std::lcm(a.size(), b.size());
    std::vector<Vector> ra, rb;
    for (const auto& p : a)
        for (std::size_t r = 0; r < l / a.size(); ++r) ra.push_back(p);
    for (const auto& p : b)
        for (std::size_t r = 0; r < l / b.size(); ++r) rb.push_back(p);
    return permutation_oracle(ra, rb);
}

// W1 on the line equals the integral of |F_a - F_b|.
double cdf_oracle(const std::vector<double>& xa, const std::vector<double>& wa, const std::vector<double>& xb,
                  const std::vector<double>& wb) {
    std::vector<double> xs = xa;
    xs.insert(xs.end(), xb.begin(), xb.end());
    std::sort(xs.begin(), xs.end());
    double total = 0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        double fa = 0, fb = 0;
        for (std::size_t k = 0; k < xa.size(); ++k) fa += xa[k] <= xs[i] ? wa[k] : 0;
        for (std::size_t k = 0; k < xb.size(); ++k) fb += xb[k] <= xs[i] ? wb[k] : 0;
        total += std::abs(fa - fb) * (xs[i + 1] - xs[i]);
    }
    return total;
}

TokenCloud weighted_cloud(const std::vector<Vector>& pts, const std::vector<double>& w) {
    TokenCloud c;
    c.points = pts;
    c.weights = w;
    return c;
}

std::vector<double> random_weights(Rng& rng, std::size_t n) {
    std::vector<double> w(n);
    double s = 0;
    for (auto& x : w) s += (x = rng.uniform(0.05, 1.0));
    for (auto& x : w) x /= s;
    return w;
}

} // namespace

TEST(Wasserstein, Examples) {
    const std::vector<Vector> a{{0.0, 1.0}, {2.0, 3.0}};
    EXPECT_EQ(*wasserstein(a, a), 0.0);
    EXPECT_DOUBLE_EQ(*wasserstein(std::vector<Vector>{{0.0}}, std::vector<Vector>{{1.0}}), 1.0);
    EXPECT_DOUBLE_EQ(*wasserstein(std::vector<Vector>{{0.0}, {1.0}}, std::vector<Vector>{{1.0}, {2.0}}), 1.0);
}

TEST(Wasserstein, DegenerateCloudIsNotAScore) {
    TokenCloud empty;
    empty.degenerate = true;
    const auto c = uniform_cloud(std::vector<Vector>{{1.0}});
    EXPECT_FALSE(wasserstein(empty, c));
    EXPECT_FALSE(wasserstein(c, empty));
}

TEST(Wasserstein, MatchesPermutationOracle) {
    Rng rng(101);
    for (int t = 0; t < 300; ++t) {
        const std::size_t n = 1 + rng.below(6), dim = 1 + rng.below(5);
        const auto a = random_points(rng, n, dim), b = random_points(rng, n, dim);
        EXPECT_NEAR(*wasserstein(a, b), permutation_oracle(a, b), 1e-9);
    }
}

TEST(Wasserstein, UnequalSizesMatchReplicatedOracle) {
    Rng rng(202);
    const std::pair<std::size_t, std::size_t> shapes[] = {{1, 3}, {2, 3}, {3, 2}, {2, 4}, {6, 2}, {3, 6}, {1, 5}, {5, 1}};
    for (int t = 0; t < 200; ++t) {
        const auto [n, m] = shapes[t % 8];
        const std::size_t dim = 1 + rng.below(4);
        const auto a = random_points(rng, n, dim), b = random_points(rng, m, dim);
        EXPECT_NEAR(*wasserstein(a, b), replicated_oracle(a, b), 1e-9) << n << "x" << m;
    }
}

TEST(Wasserstein, WeightedLineMatchesCdfOracle) {
    Rng rng(303);
    for (int t = 0; t < 300; ++t) {
        const std::size_t n = 1 + rng.below(7), m = 1 + rng.below(7);
        std::vector<double> xa(n), xb(m);
        for (auto& x : xa) x = rng.uniform(-2, 2);
        for (auto& x : xb) x = rng.uniform(-2, 2);
        const auto wa = random_weights(rng, n), wb = random_weights(rng, m);
        std::vector<Vector> pa, pb;
        for (double x : xa) pa.push_back({x});
        for (double x : xb) pb.push_back({x});
        EXPECT_NEAR(*wasserstein(weighted_cloud(pa, wa), weighted_cloud(pb, wb)), cdf_oracle(xa, wa, xb, wb), 1e-9);
    }
}

TEST(SolveTransport, PlanIsFeasibleAndCostConsistent) {
    Rng rng(404);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + rng.below(8), m = 1 + rng.below(8);
        const auto a = random_points(rng, n, 3), b = random_points(rng, m, 3);
        const auto wa = random_weights(rng, n), wb = random_weights(rng, m);
        const auto cost = euclidean_costs(a, b);
        const auto plan = solve_transport(wa, wb, cost);
        std::vector<double> rows(n, 0), cols(m, 0);
        double c = 0;
        for (const auto& f : plan.flows) {
            EXPECT_GE(f.amount, -1e-12);
            rows[f.row] += f.amount;
            cols[f.col] += f.amount;
            c += f.amount * cost(f.row, f.col);
        }
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(rows[i], wa[i], 1e-9);
        for (std::size_t j = 0; j < m; ++j) EXPECT_NEAR(cols[j], wb[j], 1e-9);
        EXPECT_NEAR(c, plan.cost, 1e-9);
        EXPECT_EQ(plan.flows.size(), n + m - 1);
    }
}

TEST(SolveTransport, AgreesWithMatchingOnUniformSquareProblems) {
    Rng rng(505);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + rng.below(12);
        const auto cost = euclidean_costs(random_points(rng, n, 4), random_points(rng, n, 4));
        const std::vector<double> w(n, 1.0 / static_cast<double>(n));
        EXPECT_NEAR(solve_transport(w, w, cost).cost, min_cost_matching(cost).cost / static_cast<double>(n), 1e-9);
    }
}

TEST(SolveTransport, HeavilyDegenerateInputs) {
    // duplicated points and integer costs produce many ties and zero pivots
    Rng rng(606);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 2 + rng.below(9), m = 2 + rng.below(9);
        std::vector<Vector> a, b;
        for (std::size_t i = 0; i < n; ++i) a.push_back({static_cast<double>(rng.below(3))});
        for (std::size_t j = 0; j < m; ++j) b.push_back({static_cast<double>(rng.below(3))});
        std::vector<double> xa, xb;
        for (auto& p : a) xa.push_back(p[0]);
        for (auto& p : b) xb.push_back(p[0]);
        const std::vector<double> wa(n, 1.0 / n), wb(m, 1.0 / m);
        const auto plan = solve_transport(wa, wb, euclidean_costs(a, b));
        EXPECT_NEAR(plan.cost, cdf_oracle(xa, wa, xb, wb), 1e-9);
    }
}

TEST(SolveTransport, ZeroMassEntriesAndValidation) {
    CostMatrix c(2, 2);
    c(0, 0) = 0;
    c(0, 1) = 1;
    c(1, 0) = 1;
    c(1, 1) = 0;
    EXPECT_NEAR(solve_transport(std::vector<double>{1, 0}, std::vector<double>{0, 1}, c).cost, 1.0, 1e-12);
    EXPECT_THROW(solve_transport(std::vector<double>{1, 0}, std::vector<double>{0.5, 0.2}, c), std::invalid_argument);
    EXPECT_THROW(solve_transport(std::vector<double>{-1, 2}, std::vector<double>{0.5, 0.5}, c), std::invalid_argument);
    EXPECT_THROW(solve_transport(std::vector<double>{1}, std::vector<double>{1}, c), std::invalid_argument);
}

TEST(MinCostMatching, HandExample) {
    CostMatrix c(3, 3);
    const double v[3][3] = {{4, 1, 3}, {2, 0, 5}, {3, 2, 2}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) c(i, j) = v[i][j];
    const auto r = min_cost_matching(c);
    EXPECT_EQ(r.cost, 5.0);
    EXPECT_EQ(r.column_of_row, (std::vector<std::size_t>{1, 0, 2}));
}

TEST(Wasserstein, MetricAxioms) {
    Rng rng(707);
    for (int t = 0; t < 300; ++t) {
        const std::size_t dim = 1 + rng.below(5);
        const auto a = random_points(rng, 1 + rng.below(5), dim);
        const auto b = random_points(rng, 1 + rng.below(5), dim);
        const auto c = random_points(rng, 1 + rng.below(5), dim);
        const double ab = *wasserstein(a, b), ba = *wasserstein(b, a);
        EXPECT_NEAR(ab, ba, 1e-9);
        EXPECT_NEAR(*wasserstein(a, a), 0.0, 1e-12);
        EXPECT_LE(ab, *wasserstein(a, c) + *wasserstein(c, b) + 1e-9);
    }
}

TEST(Wasserstein, DimensionMismatchThrows) {
    EXPECT_THROW(wasserstein(std::vector<Vector>{{1.0}}, std::vector<Vector>{{1.0, 2.0}}), std::invalid_argument);
}
