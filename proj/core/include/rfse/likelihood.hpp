#pragma once

#include "rfse/ggiw.hpp"
#include "rfse/label.hpp"

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace rfse {

/// Poisson clutter, uniform over an axis-aligned box.
struct ClutterModel {
    double lambda = 0.0;
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    [[nodiscard]] double volume() const;
    [[nodiscard]] bool contains(const Eigen::VectorXd& z) const;
    /// log kappa(z): log(lambda / volume) inside the box, -inf outside.
    [[nodiscard]] double log_intensity(const Eigen::VectorXd& z) const;
    void validate() const;
};

/// Disjoint non-empty groups of measurement indices covering the scan.
/// A scan of size zero has the single empty partition (no groups).
struct Partition {
    std::vector<std::vector<int>> groups;

    [[nodiscard]] std::size_t size() const { return groups.size(); }
    void validate(int n_measurements) const;
    /// Canonical form: indices sorted within groups, groups sorted by first index.
    void canonicalize();
    bool operator==(const Partition&) const = default;
};

inline constexpr int kMisdetect = -1;

/// theta: per-track group index, or kMisdetect. Injective on assigned
/// groups; groups left unassigned are clutter.
struct AssociationMap {
    std::vector<int> group_of_track;
    void validate(int n_groups) const;
};

/// All partitions of {0..n-1}, enumerated by restricted growth strings.
/// Guarded to n <= 12.
std::vector<Partition> all_partitions(int n);

double log_clutter_density(const std::vector<Eigen::VectorXd>& Z, const ClutterModel& clutter);

struct GroupEvidence {
    GGIWParams posterior;
    double log_psi = 0.0;
};

/// Detection pseudo-likelihood of one measurement group against one track:
/// log p_d + log evidence - sum of log clutter intensities over the group.
GroupEvidence log_group_pseudolikelihood(const GGIWParams& track,
                                         const std::vector<Eigen::VectorXd>& group,
                                         double p_d, const ClutterModel& clutter,
                                         const Eigen::RowVectorXd& H);

/// Exact extended multi-target likelihood g(Z|X) by exhaustive enumeration
/// of partitions (up to |X|+1 groups) and association maps. Test oracle
/// only; guarded to |Z| <= 6 and |X| <= 3.
double brute_force_likelihood(const std::vector<std::pair<GGIWParams, Label>>& X,
                              const std::vector<Eigen::VectorXd>& Z, double p_d,
                              const ClutterModel& clutter, const Eigen::RowVectorXd& H);

}  // namespace rfse
