#include "rfse/lmb_filter.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <tuple>

namespace rfse {

void LmbFilterConfig::validate() const {
    glmb.validate();
    if (gate_quantile <= 0.0 || gate_quantile >= 1.0)
        throw std::invalid_argument("LmbFilterConfig: gate_quantile outside (0,1)");
    if (subset_cap < 1) throw std::invalid_argument("LmbFilterConfig: subset_cap must be >= 1");
    if (report_hysteresis > report_threshold)
        throw std::invalid_argument("LmbFilterConfig: hysteresis must not exceed the report threshold");
}

LmbDensity predict_lmb(const LmbDensity& posterior, const LmbDensity& birth,
                       const MotionModel& motion, double p_s) {
    LmbDensity out;
    out.tracks.reserve(posterior.tracks.size() + birth.tracks.size());
    for (const auto& t : posterior.tracks) {
        LmbTrack p;
        p.label = t.label;
        p.r = p_s * t.r;
        p.density = predict_mixture(t.density, motion);
        out.tracks.push_back(std::move(p));
    }
    for (const auto& b : birth.tracks) {
        for (const auto& t : out.tracks)
            if (t.label == b.label)
                throw std::invalid_argument("predict_lmb: birth label collides with survivor");
        out.tracks.push_back(b);
    }
    out.sort_by_label();
    return out;
}

namespace {

/// Break an oversized cluster along its weakest track-track gating links:
/// strong links (small distance) are kept while the resulting parts stay
/// within the cap.
std::vector<std::vector<int>> split_cluster(const LmbDensity& tracks,
                                            const TrackCluster& cluster,
                                            const std::vector<Eigen::VectorXd>& Z,
                                            const Eigen::RowVectorXd& H, double gate,
                                            int cap) {
    const auto& ids = cluster.track_indices;
    const auto n = static_cast<int>(ids.size());

    auto distance = [&](int track, const Eigen::VectorXd& z) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& comp : tracks.tracks[track].density.components) {
            const auto& prm = comp.params;
            const Eigen::VectorXd nu = z - observe(H, prm.m, prm.extent_dim());
            const double hph = (H * prm.P * H.transpose())(0, 0);
            const Eigen::MatrixXd S = (hph + 1.0) * extent_point_estimate(prm);
            best = std::min(best, nu.dot(S.inverse() * nu));
        }
        return best;
    };

    // Link strength between two tracks: the best measurement they both gate.
    std::vector<std::tuple<double, int, int>> links;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            double strength = std::numeric_limits<double>::infinity();
            for (int m : cluster.measurement_indices) {
                const double da = distance(ids[a], Z[m]);
                const double db = distance(ids[b], Z[m]);
                if (da <= gate && db <= gate) strength = std::min(strength, std::max(da, db));
            }
            if (std::isfinite(strength)) links.emplace_back(strength, a, b);
        }
    std::sort(links.begin(), links.end());

    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<int> size(n, 1);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& [strength, a, b] : links) {
        const int ra = find(a), rb = find(b);
        if (ra == rb) continue;
        if (size[ra] + size[rb] <= cap) {
            parent[ra] = rb;
            size[rb] += size[ra];
        }
    }

    std::map<int, std::vector<int>> parts;
    for (int i = 0; i < n; ++i) parts[find(i)].push_back(ids[i]);
    std::vector<std::vector<int>> out;
    for (auto& [root, members] : parts) out.push_back(std::move(members));
    std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
        return tracks.tracks[a.front()].label < tracks.tracks[b.front()].label;
    });
    return out;
}

}  // namespace

LmbDensity update_lmb(const LmbDensity& predicted, const std::vector<Eigen::VectorXd>& Z_in,
                      const LmbFilterConfig& cfg, int step) {
    cfg.validate();
    const Eigen::RowVectorXd H = cfg.glmb.observation_row();

    std::vector<Eigen::VectorXd> Z;
    Z.reserve(Z_in.size());
    for (const auto& z : Z_in) {
        if (cfg.glmb.clutter.contains(z)) {
            Z.push_back(z);
        } else {
            std::cerr << "update_lmb: dropping measurement outside clutter region\n";
        }
    }

    const Clustering clustering = cluster_tracks(predicted, Z, cfg.gate_quantile, H);

    // Per-group label/measurement index sets, splitting oversized clusters.
    std::vector<std::pair<std::vector<int>, std::vector<int>>> groups;
    const double gate = chi_square_quantile(cfg.glmb.d, cfg.gate_quantile);
    for (const auto& cluster : clustering.groups) {
        if (static_cast<int>(cluster.track_indices.size()) <= cfg.subset_cap) {
            groups.emplace_back(cluster.track_indices, cluster.measurement_indices);
            continue;
        }
        std::cerr << "update_lmb: cluster of " << cluster.track_indices.size()
                  << " tracks exceeds the subset cap, splitting by weakest gating link\n";
        auto parts = split_cluster(predicted, cluster, Z, H, gate, cfg.subset_cap);
        // Measurements follow the closest gating track.
        std::vector<std::vector<int>> part_meas(parts.size());
        for (int m : cluster.measurement_indices) {
            int best_part = -1;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t p = 0; p < parts.size(); ++p) {
                for (int t : parts[p]) {
                    for (const auto& comp : predicted.tracks[t].density.components) {
                        const auto& prm = comp.params;
                        const Eigen::VectorXd nu = Z[m] - observe(H, prm.m, prm.extent_dim());
                        const double hph = (H * prm.P * H.transpose())(0, 0);
                        const Eigen::MatrixXd S = (hph + 1.0) * extent_point_estimate(prm);
                        const double d2 = nu.dot(S.inverse() * nu);
                        if (d2 < best) {
                            best = d2;
                            best_part = static_cast<int>(p);
                        }
                    }
                }
            }
            part_meas[best_part].push_back(m);
        }
        for (std::size_t p = 0; p < parts.size(); ++p)
            groups.emplace_back(std::move(parts[p]), std::move(part_meas[p]));
    }

    LmbDensity out;
    GlmbFilterConfig group_cfg = cfg.glmb;
    group_cfg.birth.sites.clear();  // births never enter the measurement update
    for (const auto& [track_ids, meas_ids] : groups) {
        LmbDensity sub;
        for (int t : track_ids) sub.tracks.push_back(predicted.tracks[t]);
        sub.sort_by_label();

        std::vector<Eigen::VectorXd> sub_Z;
        sub_Z.reserve(meas_ids.size());
        for (int m : meas_ids) sub_Z.push_back(Z[m]);

        const GlmbDensity glmb = lmb_to_glmb(sub, cfg.subset_cap);
        const GlmbDensity updated = update_glmb(glmb, sub_Z, group_cfg);
        LmbDensity approx = glmb_to_lmb(updated, cfg.glmb.reduction);
        for (auto& t : approx.tracks) out.tracks.push_back(std::move(t));
    }

    if (cfg.adaptive_birth) {
        std::vector<Eigen::VectorXd> residual;
        residual.reserve(clustering.residual.size());
        for (int m : clustering.residual) residual.push_back(Z[m]);

        BirthClusterConfig bc;
        bc.min_cluster_size = cfg.adaptive_min_cluster;
        bc.v0 = cfg.glmb.birth.v0;
        if (cfg.adaptive_distance_threshold > 0.0) {
            bc.distance_threshold = cfg.adaptive_distance_threshold;
        } else {
            const double denom = cfg.glmb.birth.v0 - 2.0 * cfg.glmb.d - 2.0;
            const Eigen::MatrixXd mean_extent = cfg.glmb.birth.V0 / std::max(denom, 1e-6);
            bc.distance_threshold = 4.0 * std::sqrt(mean_extent.trace() / cfg.glmb.d);
        }

        const int s = cfg.glmb.motion.order();
        const double expected = cfg.glmb.birth.alpha0 / cfg.glmb.birth.beta0;
        int index = static_cast<int>(cfg.glmb.birth.sites.size());
        for (const auto& cand : birth_candidates(residual, bc)) {
            LmbTrack t;
            t.label = Label{step, index++};
            t.r = std::min(cfg.adaptive_r_max, cand.cluster_size / expected);
            GGIWParams p;
            p.alpha = cfg.glmb.birth.alpha0;
            p.beta = cfg.glmb.birth.beta0;
            p.m = Eigen::VectorXd::Zero(s * cfg.glmb.d);
            p.m.head(cfg.glmb.d) = cand.mean_position;
            p.P = cfg.glmb.birth.P0;
            p.v = cfg.glmb.birth.v0;
            p.V = cand.scale;
            t.density = GGIWMixture::single(std::move(p));
            out.tracks.push_back(std::move(t));
        }
    }

    std::erase_if(out.tracks, [&](const LmbTrack& t) { return t.r < cfg.deletion_threshold; });
    out.sort_by_label();
    return out;
}

std::vector<Estimate> step_lmb(LmbFilterState& state, const std::vector<Eigen::VectorXd>& Z,
                               const LmbFilterConfig& cfg) {
    LmbDensity birth;
    for (std::size_t j = 0; j < cfg.glmb.birth.sites.size(); ++j) {
        LmbTrack t;
        t.label = Label{state.step, static_cast<int>(j)};
        t.r = cfg.glmb.birth.sites[j].r;
        GGIWParams p;
        p.alpha = cfg.glmb.birth.alpha0;
        p.beta = cfg.glmb.birth.beta0;
        p.m = cfg.glmb.birth.sites[j].mean;
        p.P = cfg.glmb.birth.P0;
        p.v = cfg.glmb.birth.v0;
        p.V = cfg.glmb.birth.V0;
        t.density = GGIWMixture::single(std::move(p));
        birth.tracks.push_back(std::move(t));
    }

    const LmbDensity predicted = predict_lmb(state.density, birth, cfg.glmb.motion, cfg.glmb.p_s);
    state.density = update_lmb(predicted, Z, cfg, state.step);

    std::vector<Estimate> out;
    std::set<Label> now_reported;
    for (const auto& t : state.density.tracks) {
        const bool was = state.reported.count(t.label) > 0;
        const bool report = t.r > (was ? cfg.report_hysteresis : cfg.report_threshold);
        if (!report) continue;
        now_reported.insert(t.label);
        const GGIWComponent& comp = t.density.best();
        Estimate e;
        e.label = t.label;
        e.rate = comp.params.rate_mean();
        e.x = comp.params.m;
        e.extent = extent_point_estimate(comp.params);
        e.r = t.r;
        out.push_back(std::move(e));
    }
    state.reported = std::move(now_reported);
    ++state.step;
    return out;
}

}  // namespace rfse
