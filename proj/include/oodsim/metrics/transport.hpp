#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "oodsim/embeddings.hpp"

namespace oodsim {

/// Dense row-major cost matrix.
class CostMatrix {
public:
    CostMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

inline double euclidean(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        s += diff * diff;
    }
    return std::sqrt(s);
}

inline CostMatrix euclidean_costs(std::span<const Vector> a, std::span<const Vector> b) {
    CostMatrix c(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b.front().size()) throw std::invalid_argument("transport: point dimensions differ");
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (b[j].size() != a[i].size()) throw std::invalid_argument("transport: point dimensions differ");
            c(i, j) = euclidean(a[i], b[j]);
        }
    }
    return c;
}

struct Assignment {
    double cost = 0.0;
    std::vector<std::size_t> column_of_row;
};

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with row/column potentials, O(n^3)).
inline Assignment min_cost_matching(const CostMatrix& cost) {
    const std::size_t n = cost.rows();
    if (n != cost.cols()) throw std::invalid_argument("min_cost_matching: cost matrix must be square");
    Assignment out;
    if (n == 0) return out;
    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based: index 0 is a virtual column used to start each augmentation
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> row_of_col(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        row_of_col[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = row_of_col[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (row_of_col[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    out.column_of_row.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j) out.column_of_row[row_of_col[j] - 1] = j - 1;
    for (std::size_t i = 0; i < n; ++i) out.cost += cost(i, out.column_of_row[i]);
    return out;
}

struct Flow {
    std::size_t row = 0;
    std::size_t col = 0;
    double amount = 0.0;
};

struct TransportPlan {
    double cost = 0.0;
    std::vector<Flow> flows; // basic cells of the optimal vertex, zero flows included
    std::size_t pivots = 0;
};

/// Exact transportation problem solved with the primal transportation
/// simplex (north-west corner start, u-v potentials, cycle pivots).
///
/// Demand is rescaled to the supply total, so the masses only need to agree
/// up to rounding. Dantzig pricing is used; after a run of degenerate pivots
/// the solver falls back to Bland's rule, which cannot cycle.
inline TransportPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                                     const CostMatrix& cost) {
    const std::size_t n = supply.size(), m = demand.size();
    if (n == 0 || m == 0) throw std::invalid_argument("solve_transport: empty marginal");
    if (cost.rows() != n || cost.cols() != m) throw std::invalid_argument("solve_transport: cost shape mismatch");
    double total_a = 0.0, total_b = 0.0;
    for (double x : supply) {
        if (!(x >= 0.0)) throw std::invalid_argument("solve_transport: negative supply");
        total_a += x;
    }
    for (double x : demand) {
        if (!(x >= 0.0)) throw std::invalid_argument("solve_transport: negative demand");
        total_b += x;
    }
    if (total_a <= 0.0 || total_b <= 0.0) throw std::invalid_argument("solve_transport: zero total mass");
    if (std::abs(total_a - total_b) > 1e-9 * std::max(total_a, total_b))
        throw std::invalid_argument("solve_transport: supply and demand totals differ");

    std::vector<double> sa(supply.begin(), supply.end());
    std::vector<double> sb(demand.begin(), demand.end());
    for (auto& x : sb) x *= total_a / total_b;

    struct Cell {
        std::size_t i, j;
        double flow;
    };
    std::vector<Cell> basis;
    basis.reserve(n + m - 1);
    std::vector<int> basic_at(n * m, -1);

    // north-west corner: exactly n + m - 1 cells forming a spanning tree
    {
        std::size_t i = 0, j = 0;
        for (;;) {
            const double f = std::min(sa[i], sb[j]);
            basic_at[i * m + j] = static_cast<int>(basis.size());
            basis.push_back({i, j, f});
            sa[i] -= f;
            sb[j] -= f;
            if (i == n - 1 && j == m - 1) break;
            if (i == n - 1) ++j;
            else if (j == m - 1) ++i;
            else if (sa[i] <= sb[j]) ++i;
            else ++j;
        }
    }

    double cost_scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) cost_scale = std::max(cost_scale, std::abs(cost(i, j)));
    const double tol = 1e-12 * (1.0 + cost_scale);

    const std::size_t nodes = n + m;
    std::vector<std::vector<std::size_t>> adj(nodes);
    std::vector<double> pot(nodes);
    std::vector<char> seen(nodes);
    std::vector<std::size_t> queue(nodes), parent_cell(nodes), parent_node(nodes);

    auto build_adjacency = [&] {
        for (auto& a : adj) a.clear();
        for (std::size_t c = 0; c < basis.size(); ++c) {
            adj[basis[c].i].push_back(c);
            adj[n + basis[c].j].push_back(c);
        }
    };
    // breadth-first walk of the basis tree from start; fills parents and, when
    // with_potentials, the dual values with pot[root] = 0
    auto walk = [&](std::size_t start, bool with_potentials) {
        std::fill(seen.begin(), seen.end(), 0);
        std::size_t head = 0, tail = 0;
        queue[tail++] = start;
        seen[start] = 1;
        if (with_potentials) pot[start] = 0.0;
        while (head < tail) {
            const std::size_t node = queue[head++];
            for (auto c : adj[node]) {
                const auto& cell = basis[c];
                const std::size_t other = node < n ? n + cell.j : cell.i;
                if (seen[other]) continue;
                seen[other] = 1;
                parent_cell[other] = c;
                parent_node[other] = node;
                if (with_potentials) pot[other] = cost(cell.i, cell.j) - pot[node];
                queue[tail++] = other;
            }
        }
    };

    TransportPlan plan;
    bool bland = false;
    std::size_t degenerate_run = 0;
    const std::size_t max_pivots = 100 * nodes * nodes + 1000;
    std::vector<std::size_t> path;

    for (;;) {
        build_adjacency();
        walk(0, true);

        // pricing: reduced cost c_ij - u_i - v_j over non-basic cells
        std::size_t enter_i = n, enter_j = m;
        double best = -tol;
        for (std::size_t i = 0; i < n && !(bland && enter_i < n); ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                if (basic_at[i * m + j] >= 0) continue;
                const double rc = cost(i, j) - pot[i] - pot[n + j];
                if (rc < best) {
                    best = rc;
                    enter_i = i;
                    enter_j = j;
                    if (bland) break;
                }
            }
        }
        if (enter_i == n) break;
        if (++plan.pivots > max_pivots) throw std::runtime_error("solve_transport: pivot limit exceeded");

        // cycle = entering cell + tree path from column node back to row node
        walk(n + enter_j, false);
        path.clear();
        for (std::size_t node = enter_i; node != n + enter_j; node = parent_node[node]) path.push_back(parent_cell[node]);
        std::reverse(path.begin(), path.end());
        // path[0] touches column enter_j and is a donor; signs alternate from there
        double theta = std::numeric_limits<double>::infinity();
        std::size_t leave = basis.size();
        for (std::size_t k = 0; k < path.size(); k += 2) {
            const auto& cell = basis[path[k]];
            const bool better = cell.flow < theta ||
                                (cell.flow == theta && cell.i * m + cell.j < basis[leave].i * m + basis[leave].j);
            if (better) {
                theta = cell.flow;
                leave = path[k];
            }
        }
        for (std::size_t k = 0; k < path.size(); ++k) basis[path[k]].flow += (k % 2 == 0) ? -theta : theta;

        degenerate_run = theta > 0.0 ? 0 : degenerate_run + 1;
        bland = degenerate_run > nodes;

        basic_at[basis[leave].i * m + basis[leave].j] = -1;
        basis[leave] = {enter_i, enter_j, theta};
        basic_at[enter_i * m + enter_j] = static_cast<int>(leave);
    }

    for (const auto& cell : basis) {
        const double f = std::max(cell.flow, 0.0);
        plan.flows.push_back({cell.i, cell.j, f});
        plan.cost += f * cost(cell.i, cell.j);
    }
    return plan;
}

namespace detail {
inline bool uniform_weights(const std::vector<double>& w) {
    for (double x : w)
        if (x != w.front()) return false;
    return true;
}
} // namespace detail

/// Exact 1-Wasserstein distance between two weighted clouds under Euclidean
/// ground cost. Returns nullopt when either cloud is degenerate.
///
/// Equal-size uniform clouds reduce to an assignment problem; everything
/// else goes through the transportation simplex.
inline std::optional<double> wasserstein(const TokenCloud& a, const TokenCloud& b) {
    if (a.degenerate || b.degenerate || a.points.empty() || b.points.empty()) return std::nullopt;
    if (a.points.front().size() != b.points.front().size())
        throw std::invalid_argument("wasserstein: clouds differ in dimension");
    const auto costs = euclidean_costs(a.points, b.points);
    if (a.size() == b.size() && detail::uniform_weights(a.weights) && detail::uniform_weights(b.weights))
        return min_cost_matching(costs).cost / static_cast<double>(a.size());
    return solve_transport(a.weights, b.weights, costs).cost;
}

inline TokenCloud uniform_cloud(std::span<const Vector> points) {
    TokenCloud cloud;
    cloud.points.assign(points.begin(), points.end());
    if (cloud.points.empty()) {
        cloud.degenerate = true;
        return cloud;
    }
    cloud.weights.assign(cloud.points.size(), 1.0 / static_cast<double>(cloud.points.size()));
    return cloud;
}

/// Wasserstein-1 between two uniformly weighted point sets.
inline std::optional<double> wasserstein(std::span<const Vector> a, std::span<const Vector> b) {
    return wasserstein(uniform_cloud(a), uniform_cloud(b));
}

} // namespace oodsim
