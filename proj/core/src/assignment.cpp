#include "rfse/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

namespace rfse {

Eigen::MatrixXd AssignCostMatrix::concatenated() const {
    const int n = n_targets();
    const int g = n_groups();
    Eigen::MatrixXd full(n, g + n);
    full.setConstant(kInfCost);
    if (g > 0) full.leftCols(g) = detection;
    for (int i = 0; i < n; ++i) full(i, g + i) = misdetection(i);
    return full;
}

Assignment hungarian(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    if (n == 0) return {{}, 0.0};
    if (n > m) throw InfeasibleAssignment("hungarian: more rows than columns");

    // Shortest-augmenting-path method with potentials (1-indexed internals).
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> match(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, kInfCost);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            int j1 = -1;
            double delta = kInfCost;
            for (int j = 1; j <= m; ++j) {
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
            if (j1 == -1 || is_inf_cost(delta))
                throw InfeasibleAssignment("hungarian: no finite-cost assignment");
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    Assignment out;
    out.row_to_col.assign(n, -1);
    for (int j = 1; j <= m; ++j)
        if (match[j] != 0) out.row_to_col[match[j] - 1] = j - 1;
    out.cost = 0.0;
    for (int i = 0; i < n; ++i) {
        const double c = cost(i, out.row_to_col[i]);
        if (is_inf_cost(c)) throw InfeasibleAssignment("hungarian: no finite-cost assignment");
        out.cost += c;
    }
    return out;
}

namespace {

struct MurtyNode {
    std::vector<std::pair<int, int>> forced;     // (row, col)
    std::vector<std::pair<int, int>> forbidden;  // (row, col)
    Assignment solution;                         // full, includes forced rows
};

bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

struct NodeOrder {
    bool operator()(const MurtyNode& a, const MurtyNode& b) const {
        if (a.solution.cost != b.solution.cost) return a.solution.cost > b.solution.cost;
        return !lex_less(a.solution.row_to_col, b.solution.row_to_col);
    }
};

/// Solve the subproblem induced by forced pairs and forbidden cells on the
/// full matrix; returns the complete assignment.
Assignment solve_restricted(const Eigen::MatrixXd& full,
                            const std::vector<std::pair<int, int>>& forced,
                            const std::vector<std::pair<int, int>>& forbidden) {
    const int n = static_cast<int>(full.rows());
    const int m = static_cast<int>(full.cols());

    std::vector<char> row_fixed(n, 0), col_fixed(m, 0);
    for (auto [r, c] : forced) {
        row_fixed[r] = 1;
        col_fixed[c] = 1;
    }
    std::vector<int> rows, cols;
    for (int i = 0; i < n; ++i)
        if (!row_fixed[i]) rows.push_back(i);
    for (int j = 0; j < m; ++j)
        if (!col_fixed[j]) cols.push_back(j);

    Eigen::MatrixXd sub(rows.size(), cols.size());
    for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = 0; b < cols.size(); ++b) sub(a, b) = full(rows[a], cols[b]);
    for (auto [r, c] : forbidden) {
        const auto ra = std::find(rows.begin(), rows.end(), r);
        const auto cb = std::find(cols.begin(), cols.end(), c);
        if (ra != rows.end() && cb != cols.end())
            sub(ra - rows.begin(), cb - cols.begin()) = kInfCost;
    }

    const Assignment inner = hungarian(sub);

    Assignment out;
    out.row_to_col.assign(n, -1);
    out.cost = 0.0;
    for (auto [r, c] : forced) {
        out.row_to_col[r] = c;
        out.cost += full(r, c);
    }
    for (std::size_t a = 0; a < rows.size(); ++a) {
        out.row_to_col[rows[a]] = cols[inner.row_to_col[a]];
        out.cost += full(rows[a], cols[inner.row_to_col[a]]);
    }
    return out;
}

}  // namespace

std::vector<Assignment> murty(const AssignCostMatrix& cost, int n_best) {
    if (n_best < 1) throw std::invalid_argument("murty: n_best must be >= 1");
    const int n = cost.n_targets();
    if (n == 0) return {Assignment{{}, 0.0}};

    const Eigen::MatrixXd full = cost.concatenated();

    std::priority_queue<MurtyNode, std::vector<MurtyNode>, NodeOrder> queue;
    {
        MurtyNode root;
        try {
            root.solution = solve_restricted(full, {}, {});
        } catch (const InfeasibleAssignment&) {
            return {};
        }
        queue.push(std::move(root));
    }

    std::vector<Assignment> out;
    while (!queue.empty() && static_cast<int>(out.size()) < n_best) {
        MurtyNode node = queue.top();
        queue.pop();
        out.push_back(node.solution);

        // Partition the remaining solution space around this solution.
        std::vector<char> row_fixed(n, 0);
        for (auto [r, c] : node.forced) row_fixed[r] = 1;

        std::vector<std::pair<int, int>> prefix = node.forced;
        for (int r = 0; r < n; ++r) {
            if (row_fixed[r]) continue;
            MurtyNode child;
            child.forced = prefix;
            child.forbidden = node.forbidden;
            child.forbidden.emplace_back(r, node.solution.row_to_col[r]);
            try {
                child.solution = solve_restricted(full, child.forced, child.forbidden);
                queue.push(std::move(child));
            } catch (const InfeasibleAssignment&) {
                // Subspace empty; nothing to enumerate there.
            }
            prefix.emplace_back(r, node.solution.row_to_col[r]);
        }
    }
    return out;
}

std::vector<SubsetChoice> k_shortest_paths(const SurvivalCostMatrix& cost, int K) {
    if (K < 1) throw std::invalid_argument("k_shortest_paths: K must be >= 1");
    const int n = cost.size();

    // Baseline takes each row's cheaper column (survive on ties); every other
    // selection is the baseline plus a set of row flips with non-negative
    // increments. Ranking selections therefore ranks flip subsets by their
    // summed increments, which a best-first heap enumerates lazily.
    std::vector<std::uint8_t> base(n);
    std::vector<double> delta(n);
    for (int i = 0; i < n; ++i) {
        const double s = cost.survive_cost(i), d = cost.die_cost(i);
        base[i] = s <= d ? 1 : 0;
        delta[i] = std::abs(s - d);
    }
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return delta[a] < delta[b]; });

    const double total = n <= 62 ? std::ldexp(1.0, n) : std::numeric_limits<double>::infinity();
    const auto want = static_cast<std::size_t>(std::min<double>(K, total));

    auto canonical = [&](const std::vector<std::uint8_t>& survive) {
        double c = 0.0;
        for (int i = 0; i < n; ++i) c += survive[i] ? cost.survive_cost(i) : cost.die_cost(i);
        return c;
    };
    auto realize = [&](const std::vector<int>& flips) {
        SubsetChoice sc;
        sc.survive = base;
        for (int f : flips) sc.survive[order[f]] ^= 1;
        sc.cost = canonical(sc.survive);
        return sc;
    };

    using Item = std::pair<double, std::vector<int>>;  // (incremental cost, flip positions)
    auto cmp = [](const Item& a, const Item& b) { return a.first > b.first; };
    std::priority_queue<Item, std::vector<Item>, decltype(cmp)> heap(cmp);

    std::vector<SubsetChoice> results;
    results.push_back(realize({}));
    if (n > 0) heap.push({delta[order[0]], {0}});

    while (!heap.empty()) {
        if (results.size() >= want) {
            const double kth = results[want - 1].cost;
            if (heap.top().first > kth + 1e-12 * (1.0 + std::abs(kth))) break;
        }
        auto [c, flips] = heap.top();
        heap.pop();
        results.push_back(realize(flips));
        const int last = flips.back();
        if (last + 1 < n) {
            auto grown = flips;
            grown.push_back(last + 1);
            heap.push({c + delta[order[last + 1]], std::move(grown)});
            auto shifted = flips;
            shifted.back() = last + 1;
            heap.push({c - delta[order[last]] + delta[order[last + 1]], std::move(shifted)});
        }
    }

    std::stable_sort(results.begin(), results.end(), [](const SubsetChoice& a, const SubsetChoice& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        // survive (1) sorts before die (0) position by position
        return std::lexicographical_compare(a.survive.begin(), a.survive.end(),
                                            b.survive.begin(), b.survive.end(),
                                            [](std::uint8_t x, std::uint8_t y) { return x > y; });
    });
    if (results.size() > want) results.resize(want);
    return results;
}

}  // namespace rfse
