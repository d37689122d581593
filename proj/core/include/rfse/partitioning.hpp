#pragma once

#include "rfse/labelled_rfs.hpp"
#include "rfse/likelihood.hpp"

#include <vector>

namespace rfse {

struct PartitionConfig {
    int n_thresholds = 10;   // distance quantiles to cluster at
    bool em_refine = false;  // split large groups with 2-component EM
    int max_partitions = 20;
};

/// Distance-based feasible partitions of a scan: single-linkage clusterings
/// at a spectrum of pairwise-distance quantiles, deduplicated, plus the
/// one-group partition and (for small scans) the all-singletons partition.
std::vector<Partition> feasible_partitions(const std::vector<Eigen::VectorXd>& Z,
                                           const PartitionConfig& cfg);

struct TrackCluster {
    std::vector<int> track_indices;
    std::vector<int> measurement_indices;
};

struct Clustering {
    std::vector<TrackCluster> groups;
    std::vector<int> residual;  // measurements gating no track
};

/// Split tracks and measurements into independent groups: connected
/// components of the track-measurement gating graph. Gating tests the
/// squared Mahalanobis distance of z against the track's predicted
/// measurement density with covariance HPH' * E[chi] + E[chi], at the
/// chi-square quantile with d degrees of freedom.
Clustering cluster_tracks(const LmbDensity& tracks, const std::vector<Eigen::VectorXd>& Z,
                          double gate_quantile, const Eigen::RowVectorXd& H);

struct BirthCandidate {
    Eigen::VectorXd mean_position;  // d-vector, cluster centroid
    Eigen::MatrixXd scale;          // IW scale matching the empirical spread
    int cluster_size = 0;
};

struct BirthClusterConfig {
    double distance_threshold = 20.0;  // single-linkage threshold [m]
    int min_cluster_size = 5;          // clusters larger than four become candidates
    double v0 = 10.0;                  // IW dof given to candidates
};

/// Cluster residual measurements and turn sufficiently large clusters into
/// birth candidates. The returned scale makes the IW mean of a new track
/// equal the cluster's sample covariance.
std::vector<BirthCandidate> birth_candidates(const std::vector<Eigen::VectorXd>& residual,
                                             const BirthClusterConfig& cfg);

/// Chi-square quantile (inverse CDF) with d degrees of freedom.
double chi_square_quantile(int dof, double p);

}  // namespace rfse
