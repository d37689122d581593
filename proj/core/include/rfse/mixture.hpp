#pragma once

#include "rfse/ggiw.hpp"

#include <vector>

namespace rfse {

struct GGIWComponent {
    double weight = 1.0;
    GGIWParams params;
};

/// Convex combination of GGIW densities. Weights sum to one.
struct GGIWMixture {
    std::vector<GGIWComponent> components;

    static GGIWMixture single(GGIWParams p) {
        GGIWMixture m;
        m.components.push_back({1.0, std::move(p)});
        return m;
    }

    [[nodiscard]] bool empty() const { return components.empty(); }
    [[nodiscard]] std::size_t size() const { return components.size(); }

    /// Highest-weight component; first wins on ties.
    [[nodiscard]] const GGIWComponent& best() const;

    void normalize();
    void validate() const;
};

struct MixtureReductionConfig {
    double prune_threshold = 1e-3;
    double merge_gate = 1.0;    // squared-Mahalanobis gate on kinematic means
    int max_components = 10;
};

/// Prune low-weight components, merge components whose kinematic means fall
/// within the Mahalanobis gate (moment match on (m, P); arithmetic mean of
/// alpha, beta, v, V), cap the count and renormalize. If everything would be
/// pruned the single heaviest component is kept.
GGIWMixture reduce_mixture(const GGIWMixture& mix, const MixtureReductionConfig& cfg);

GGIWMixture predict_mixture(const GGIWMixture& mix, const MotionModel& model);

struct MixtureUpdate {
    GGIWMixture posterior;
    double log_evidence = 0.0;
};

/// Per-component Bayes update with evidence mixing: the posterior component
/// weights are proportional to prior weight times component evidence, and the
/// returned evidence is the weight-averaged marginal.
MixtureUpdate update_mixture(const GGIWMixture& mix, const std::vector<Eigen::VectorXd>& W,
                             const Eigen::RowVectorXd& H);

/// Misdetection evidence of a mixture (log-sum-exp across components).
double mixture_log_misdetect(const GGIWMixture& mix, double p_d, bool literal_mode);

/// Mixture after conditioning on a misdetection. Parameters never change;
/// in literal mode the weights are unchanged too, otherwise they are
/// reweighted by each component's zero-detection probability.
GGIWMixture misdetect_mixture(const GGIWMixture& mix, double p_d, bool literal_mode);

}  // namespace rfse
