#include "rfse/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rfse {

namespace {

double log_sum_exp(const std::vector<double>& xs) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : xs) mx = std::max(mx, x);
    if (!std::isfinite(mx)) return mx;
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - mx);
    return mx + std::log(acc);
}

/// Squared Mahalanobis distance between kinematic means under the first
/// component's covariance P (x) E[chi], evaluated blockwise.
double merge_distance(const GGIWComponent& a, const GGIWComponent& b) {
    const int d = a.params.extent_dim();
    const int s = a.params.motion_order();
    const Eigen::VectorXd diff = a.params.m - b.params.m;
    const Eigen::MatrixXd extent = extent_point_estimate(a.params);
    const Eigen::MatrixXd Einv = extent.inverse();
    const Eigen::MatrixXd Pinv =
        (a.params.P + 1e-12 * Eigen::MatrixXd::Identity(s, s)).inverse();
    double acc = 0.0;
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) {
            if (Pinv(i, j) == 0.0) continue;
            acc += Pinv(i, j) * diff.segment(i * d, d).dot(Einv * diff.segment(j * d, d));
        }
    return acc;
}

GGIWComponent moment_match(const std::vector<GGIWComponent>& group) {
    double wsum = 0.0;
    for (const auto& c : group) wsum += c.weight;
    const int d = group.front().params.extent_dim();
    const int s = group.front().params.motion_order();

    GGIWComponent out;
    out.weight = wsum;
    out.params = group.front().params;
    out.params.alpha = out.params.beta = out.params.v = 0.0;
    out.params.m = Eigen::VectorXd::Zero(s * d);
    out.params.P = Eigen::MatrixXd::Zero(s, s);
    out.params.V = Eigen::MatrixXd::Zero(d, d);

    for (const auto& c : group) {
        const double w = c.weight / wsum;
        out.params.alpha += w * c.params.alpha;
        out.params.beta += w * c.params.beta;
        out.params.v += w * c.params.v;
        out.params.V += w * c.params.V;
        out.params.m += w * c.params.m;
    }
    for (const auto& c : group) {
        const double w = c.weight / wsum;
        const Eigen::VectorXd diff = c.params.m - out.params.m;
        // Spread term mapped back to the s x s factor by averaging across
        // the d extent dimensions.
        Eigen::MatrixXd spread(s, s);
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j)
                spread(i, j) = diff.segment(i * d, d).dot(diff.segment(j * d, d)) / d;
        out.params.P += w * (c.params.P + spread);
    }
    return out;
}

}  // namespace

const GGIWComponent& GGIWMixture::best() const {
    if (components.empty()) throw std::invalid_argument("GGIWMixture: empty mixture");
    const auto it = std::max_element(components.begin(), components.end(),
                                     [](const auto& a, const auto& b) { return a.weight < b.weight; });
    return *it;
}

void GGIWMixture::normalize() {
    double sum = 0.0;
    for (const auto& c : components) sum += c.weight;
    if (sum <= 0.0) throw std::invalid_argument("GGIWMixture: non-positive total weight");
    for (auto& c : components) c.weight /= sum;
}

void GGIWMixture::validate() const {
    if (components.empty()) throw std::invalid_argument("GGIWMixture: empty mixture");
    double sum = 0.0;
    for (const auto& c : components) {
        if (c.weight <= 0.0) throw std::invalid_argument("GGIWMixture: weights must be positive");
        c.params.validate();
        sum += c.weight;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("GGIWMixture: weights must sum to 1");
}

GGIWMixture reduce_mixture(const GGIWMixture& mix, const MixtureReductionConfig& cfg) {
    if (mix.empty()) throw std::invalid_argument("reduce_mixture: empty mixture");

    std::vector<GGIWComponent> kept;
    for (const auto& c : mix.components)
        if (c.weight >= cfg.prune_threshold) kept.push_back(c);
    if (kept.empty()) kept.push_back(mix.best());

    std::stable_sort(kept.begin(), kept.end(),
                     [](const auto& a, const auto& b) { return a.weight > b.weight; });

    std::vector<GGIWComponent> merged;
    std::vector<bool> used(kept.size(), false);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (used[i]) continue;
        std::vector<GGIWComponent> group{kept[i]};
        used[i] = true;
        for (std::size_t j = i + 1; j < kept.size(); ++j) {
            if (used[j]) continue;
            if (merge_distance(kept[i], kept[j]) <= cfg.merge_gate) {
                group.push_back(kept[j]);
                used[j] = true;
            }
        }
        merged.push_back(group.size() == 1 ? group.front() : moment_match(group));
    }

    std::stable_sort(merged.begin(), merged.end(),
                     [](const auto& a, const auto& b) { return a.weight > b.weight; });
    if (static_cast<int>(merged.size()) > cfg.max_components)
        merged.resize(cfg.max_components);

    GGIWMixture out;
    out.components = std::move(merged);
    out.normalize();
    return out;
}

GGIWMixture predict_mixture(const GGIWMixture& mix, const MotionModel& model) {
    GGIWMixture out;
    out.components.reserve(mix.size());
    for (const auto& c : mix.components)
        out.components.push_back({c.weight, predict_ggiw(c.params, model)});
    return out;
}

MixtureUpdate update_mixture(const GGIWMixture& mix, const std::vector<Eigen::VectorXd>& W,
                             const Eigen::RowVectorXd& H) {
    if (mix.empty()) throw std::invalid_argument("update_mixture: empty mixture");
    MixtureUpdate out;
    std::vector<double> log_terms;
    log_terms.reserve(mix.size());
    for (const auto& c : mix.components) {
        GGIWUpdate u = update_ggiw(c.params, W, H);
        log_terms.push_back(std::log(c.weight) + u.log_evidence);
        out.posterior.components.push_back({0.0, std::move(u.posterior)});
    }
    out.log_evidence = log_sum_exp(log_terms);
    for (std::size_t i = 0; i < log_terms.size(); ++i)
        out.posterior.components[i].weight = std::exp(log_terms[i] - out.log_evidence);
    out.posterior.normalize();
    return out;
}

double mixture_log_misdetect(const GGIWMixture& mix, double p_d, bool literal_mode) {
    if (mix.empty()) throw std::invalid_argument("mixture_log_misdetect: empty mixture");
    std::vector<double> log_terms;
    log_terms.reserve(mix.size());
    for (const auto& c : mix.components)
        log_terms.push_back(std::log(c.weight) + log_evidence_misdetect(c.params, p_d, literal_mode));
    return log_sum_exp(log_terms);
}

GGIWMixture misdetect_mixture(const GGIWMixture& mix, double p_d, bool literal_mode) {
    if (literal_mode) return mix;
    GGIWMixture out = mix;
    for (auto& c : out.components)
        c.weight *= std::exp(log_evidence_misdetect(c.params, p_d, false));
    out.normalize();
    return out;
}

}  // namespace rfse
