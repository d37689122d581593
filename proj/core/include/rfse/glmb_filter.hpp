#pragma once

#include "rfse/assignment.hpp"
#include "rfse/labelled_rfs.hpp"
#include "rfse/likelihood.hpp"
#include "rfse/partitioning.hpp"

#include <vector>

namespace rfse {

struct BirthSite {
    Eigen::VectorXd mean;  // length s*d
    double r = 0.03;
};

/// Static LMB birth density, instantiated with fresh labels every step.
struct BirthModel {
    std::vector<BirthSite> sites;
    double alpha0 = 10.0;
    double beta0 = 1.0;
    double v0 = 10.0;
    Eigen::MatrixXd V0;  // d x d
    Eigen::MatrixXd P0;  // s x s
};

struct GlmbFilterConfig {
    double p_s = 0.99;
    double p_d = 0.8;
    bool literal_misdetect = true;

    int n_predict_components = 300;  // survivor-subset budget per prediction
    int n_update_components = 300;   // assignment budget per update
    int max_components = 300;        // component cap after normalize

    PartitionConfig partition;
    ClutterModel clutter;
    MotionModel motion;
    BirthModel birth;
    MixtureReductionConfig reduction;

    int d = 2;               // extent dimension
    bool exhaustive = false; // disable all truncation and enumerate exactly

    [[nodiscard]] Eigen::RowVectorXd observation_row() const;
    void validate() const;
};

/// Deterministic proportional allocation of `total` units across bins with
/// the given log scores: one unit per finite-score bin in score order while
/// the budget lasts, then highest-averages rounding for the remainder.
/// Monotone in `total`: raising the budget never shrinks a bin.
std::vector<int> allocate_budget(int total, const std::vector<double>& log_scores);

/// GLMB prediction: per component, ranked survivor subsets via k-shortest
/// paths over the survival cost matrix, multiplied by the birth density
/// (instantiated with labels (step, site)). Output normalized and pruned.
GlmbDensity predict_glmb(const GlmbDensity& posterior, const GlmbFilterConfig& cfg, int step);

/// GLMB measurement update: feasible partitions, cached per-(track, group)
/// GGIW updates, ranked assignments via Murty per (component, partition)
/// with a proportional budget split. Out-of-region measurements are dropped
/// with a warning on stderr.
GlmbDensity update_glmb(const GlmbDensity& predicted, const std::vector<Eigen::VectorXd>& Z,
                        const GlmbFilterConfig& cfg);

struct GlmbFilterState {
    GlmbDensity density;
    int step = 0;
};

/// A density holding the single empty hypothesis.
GlmbFilterState initial_glmb_state();

/// One predict + update + extract cycle.
std::vector<Estimate> step_glmb(GlmbFilterState& state, const std::vector<Eigen::VectorXd>& Z,
                                const GlmbFilterConfig& cfg);

}  // namespace rfse
