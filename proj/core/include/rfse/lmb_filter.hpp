#pragma once

#include "rfse/glmb_filter.hpp"

#include <set>

namespace rfse {

struct LmbFilterConfig {
    GlmbFilterConfig glmb;  // shared models and budgets for the per-group updates

    double gate_quantile = 0.99;
    double deletion_threshold = 1e-3;
    double report_threshold = 0.5;
    double report_hysteresis = 0.4;  // keep reporting down to this once reported
    int subset_cap = 15;

    bool adaptive_birth = false;
    double adaptive_r_max = 0.1;
    double adaptive_distance_threshold = 0.0;  // <= 0 derives 4x the mean prior extent radius
    int adaptive_min_cluster = 5;

    void validate() const;
};

/// LMB prediction: existence scaled by survival, densities predicted, union
/// with the birth density. Throws on label collision.
LmbDensity predict_lmb(const LmbDensity& posterior, const LmbDensity& birth,
                       const MotionModel& motion, double p_s);

/// LMB update: cluster tracks and measurements into independent groups,
/// run LMB -> GLMB -> update -> LMB per group, append adaptive birth
/// candidates built from the unexplained measurements, and delete tracks
/// whose existence falls below the deletion threshold.
LmbDensity update_lmb(const LmbDensity& predicted, const std::vector<Eigen::VectorXd>& Z,
                      const LmbFilterConfig& cfg, int step);

struct LmbFilterState {
    LmbDensity density;
    std::set<Label> reported;
    int step = 0;
};

/// One predict + update + report cycle.
std::vector<Estimate> step_lmb(LmbFilterState& state, const std::vector<Eigen::VectorXd>& Z,
                               const LmbFilterConfig& cfg);

}  // namespace rfse
