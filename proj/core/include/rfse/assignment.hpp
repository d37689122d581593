#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace rfse {

/// Sentinel for forbidden assignments. Large but finite so sums stay
/// NaN-free; anything at or above half this value is treated as infinite.
inline constexpr double kInfCost = 1e300;

inline bool is_inf_cost(double c) { return c >= 0.5 * kInfCost; }

inline double add_cost(double a, double b) {
    if (is_inf_cost(a) || is_inf_cost(b)) return kInfCost;
    return a + b;
}

struct InfeasibleAssignment : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Assignment {
    std::vector<int> row_to_col;
    double cost = 0.0;
};

/// Minimum-cost assignment of every row to a distinct column (columns may
/// stay free). Requires rows <= feasible columns; throws
/// InfeasibleAssignment when no finite-cost complete assignment exists.
Assignment hungarian(const Eigen::MatrixXd& cost);

/// Cost matrix for assigning measurement groups to targets. Column j of the
/// implied matrix [D | diag(miss)] is group j for j < n_groups, and column
/// n_groups + i is the misdetection of target i (feasible for row i only).
struct AssignCostMatrix {
    Eigen::MatrixXd detection;     // n_targets x n_groups
    Eigen::VectorXd misdetection;  // n_targets

    [[nodiscard]] int n_targets() const { return static_cast<int>(detection.rows()); }
    [[nodiscard]] int n_groups() const { return static_cast<int>(detection.cols()); }
    [[nodiscard]] Eigen::MatrixXd concatenated() const;
};

/// Murty's ranked-assignment enumeration over [D | diag(miss)]: the n_best
/// cheapest assignments in non-decreasing cost order, no duplicates, fewer
/// if the feasible space is smaller. Equal costs are ordered by the
/// assignment vector.
std::vector<Assignment> murty(const AssignCostMatrix& cost, int n_best);

/// Per-track survive/die costs: -log eta_S and -log q_S.
struct SurvivalCostMatrix {
    Eigen::VectorXd survive_cost;
    Eigen::VectorXd die_cost;

    [[nodiscard]] int size() const { return static_cast<int>(survive_cost.size()); }
};

struct SubsetChoice {
    std::vector<std::uint8_t> survive;  // one flag per row
    double cost = 0.0;

    [[nodiscard]] std::vector<int> subset() const {
        std::vector<int> out;
        for (std::size_t i = 0; i < survive.size(); ++i)
            if (survive[i]) out.push_back(static_cast<int>(i));
        return out;
    }
};

/// The K cheapest survive/die selections over the rows of the layered cost
/// graph, in non-decreasing cost order (ties: survive before die, row by
/// row). Returns all 2^n selections when K exceeds them.
std::vector<SubsetChoice> k_shortest_paths(const SurvivalCostMatrix& cost, int K);

}  // namespace rfse
