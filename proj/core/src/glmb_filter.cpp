#include "rfse/glmb_filter.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>

namespace rfse {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

Eigen::RowVectorXd GlmbFilterConfig::observation_row() const {
    Eigen::RowVectorXd H = Eigen::RowVectorXd::Zero(motion.order());
    H(0) = 1.0;
    return H;
}

void GlmbFilterConfig::validate() const {
    if (p_s < 0.0 || p_s > 1.0) throw std::invalid_argument("GlmbFilterConfig: p_s outside [0,1]");
    if (p_d < 0.0 || p_d > 1.0) throw std::invalid_argument("GlmbFilterConfig: p_d outside [0,1]");
    if (n_predict_components < 1 || n_update_components < 1 || max_components < 1)
        throw std::invalid_argument("GlmbFilterConfig: component budgets must be >= 1");
    motion.validate();
    clutter.validate();
    if (d < 1) throw std::invalid_argument("GlmbFilterConfig: d must be >= 1");
}

std::vector<int> allocate_budget(int total, const std::vector<double>& log_scores) {
    const auto n = static_cast<int>(log_scores.size());
    std::vector<int> counts(n, 0);
    if (total <= 0 || n == 0) return counts;

    std::vector<int> order;
    for (int i = 0; i < n; ++i)
        if (std::isfinite(log_scores[i])) order.push_back(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return log_scores[a] > log_scores[b]; });

    int remaining = total;
    for (int i : order) {
        if (remaining == 0) return counts;
        counts[i] = 1;
        --remaining;
    }
    // Highest-averages rounding for the remainder; adding budget can only
    // grow a bin (required by the monotone-truncation contract).
    while (remaining > 0) {
        int best = -1;
        double best_key = kNegInf;
        for (int i : order) {
            const double key = log_scores[i] - std::log(counts[i] + 1.0);
            if (key > best_key) {
                best_key = key;
                best = i;
            }
        }
        ++counts[best];
        --remaining;
    }
    return counts;
}

namespace {

GGIWMixture birth_density(const BirthModel& birth, const Eigen::VectorXd& mean) {
    GGIWParams p;
    p.alpha = birth.alpha0;
    p.beta = birth.beta0;
    p.m = mean;
    p.P = birth.P0;
    p.v = birth.v0;
    p.V = birth.V0;
    return GGIWMixture::single(std::move(p));
}

}  // namespace

GlmbDensity predict_glmb(const GlmbDensity& posterior, const GlmbFilterConfig& cfg, int step) {
    cfg.validate();

    GlmbDensity pred;
    pred.table.reserve(posterior.table.size() + cfg.birth.sites.size());
    for (const auto& t : posterior.table)
        pred.table.push_back({t.label, predict_mixture(t.density, cfg.motion)});

    std::vector<int> birth_indices;
    for (std::size_t j = 0; j < cfg.birth.sites.size(); ++j) {
        const Label label{step, static_cast<int>(j)};
        for (const auto& t : pred.table)
            if (t.label == label)
                throw std::invalid_argument("predict_glmb: birth label collides with survivor");
        birth_indices.push_back(static_cast<int>(pred.table.size()));
        pred.table.push_back({label, birth_density(cfg.birth, cfg.birth.sites[j].mean)});
    }

    const auto components = posterior.components.empty()
                                ? std::vector<GlmbComponent>{GlmbComponent{0.0, {}}}
                                : posterior.components;

    std::vector<double> scores;
    scores.reserve(components.size());
    for (const auto& c : components) scores.push_back(c.log_weight);
    std::vector<int> budget;
    if (!cfg.exhaustive) budget = allocate_budget(cfg.n_predict_components, scores);

    // Survivor subsets per component, then the cross product with birth
    // subsets. Weights follow the product form of the LMB/GLMB prediction.
    const double log_ps = std::log(cfg.p_s);
    const double log_qs = std::log1p(-cfg.p_s);

    std::vector<GlmbComponent> survivors;
    for (std::size_t ci = 0; ci < components.size(); ++ci) {
        const auto& c = components[ci];
        const auto n = static_cast<int>(c.tracks.size());
        int K;
        if (cfg.exhaustive) {
            K = n < 30 ? (1 << n) : std::numeric_limits<int>::max() / 2;
        } else {
            K = budget[ci];
            if (K == 0) continue;
        }
        SurvivalCostMatrix sc;
        sc.survive_cost = Eigen::VectorXd::Constant(n, -log_ps);
        sc.die_cost = Eigen::VectorXd::Constant(n, -log_qs);
        for (const auto& choice : k_shortest_paths(sc, K)) {
            GlmbComponent out;
            out.log_weight = c.log_weight - choice.cost;
            for (int row : choice.subset()) out.tracks.push_back(c.tracks[row]);
            survivors.push_back(std::move(out));
        }
    }

    const auto n_sites = static_cast<int>(cfg.birth.sites.size());
    if (n_sites > 15) throw std::invalid_argument("predict_glmb: too many birth sites to enumerate");

    GlmbDensity out;
    out.table = std::move(pred.table);
    for (std::size_t mask = 0; mask < (std::size_t{1} << n_sites); ++mask) {
        double log_wb = 0.0;
        std::vector<int> born;
        for (int j = 0; j < n_sites; ++j) {
            const double r = cfg.birth.sites[j].r;
            if (mask & (std::size_t{1} << j)) {
                log_wb += std::log(r);
                born.push_back(birth_indices[j]);
            } else {
                log_wb += std::log1p(-r);
            }
        }
        for (const auto& s : survivors) {
            GlmbComponent c;
            c.log_weight = s.log_weight + log_wb;
            c.tracks = s.tracks;
            c.tracks.insert(c.tracks.end(), born.begin(), born.end());
            out.components.push_back(std::move(c));
        }
    }

    out = normalize_glmb(std::move(out));
    if (!cfg.exhaustive) out = prune_glmb(std::move(out), cfg.max_components);
    else out.compact();
    return out;
}

namespace {

/// Canonical registry of measurement groups shared across partitions.
struct GroupRegistry {
    std::map<std::vector<int>, int> ids;
    std::vector<std::vector<Eigen::VectorXd>> measurements;
    std::vector<double> log_kappa;      // sum of log clutter intensities
    std::vector<Eigen::VectorXd> centroid;

    int intern(const std::vector<int>& group, const std::vector<Eigen::VectorXd>& Z,
               const ClutterModel& clutter) {
        auto it = ids.find(group);
        if (it != ids.end()) return it->second;
        const int id = static_cast<int>(measurements.size());
        ids.emplace(group, id);
        std::vector<Eigen::VectorXd> ms;
        ms.reserve(group.size());
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(Z.front().size());
        double lk = 0.0;
        for (int idx : group) {
            ms.push_back(Z[idx]);
            mean += Z[idx];
            lk += clutter.log_intensity(Z[idx]);
        }
        mean /= static_cast<double>(group.size());
        measurements.push_back(std::move(ms));
        log_kappa.push_back(lk);
        centroid.push_back(std::move(mean));
        return id;
    }
};

struct UpdateCacheEntry {
    double log_eta = kNegInf;
    int table_index = -1;  // posterior track in the output table, -1 if gated out
};

}  // namespace

GlmbDensity update_glmb(const GlmbDensity& predicted, const std::vector<Eigen::VectorXd>& Z_in,
                        const GlmbFilterConfig& cfg) {
    cfg.validate();
    const Eigen::RowVectorXd H = cfg.observation_row();

    std::vector<Eigen::VectorXd> Z;
    Z.reserve(Z_in.size());
    for (const auto& z : Z_in) {
        if (cfg.clutter.contains(z)) {
            Z.push_back(z);
        } else {
            std::cerr << "update_glmb: dropping measurement outside clutter region\n";
        }
    }

    const std::vector<Partition> partitions =
        cfg.exhaustive ? all_partitions(static_cast<int>(Z.size()))
                       : feasible_partitions(Z, cfg.partition);

    GroupRegistry registry;
    std::vector<std::vector<int>> partition_groups(partitions.size());
    for (std::size_t p = 0; p < partitions.size(); ++p)
        for (const auto& g : partitions[p].groups)
            partition_groups[p].push_back(registry.intern(g, Z, cfg.clutter));

    GlmbDensity out;
    out.table = predicted.table;  // misdetected tracks keep the predicted density

    const double gate = cfg.exhaustive
                            ? std::numeric_limits<double>::infinity()
                            : chi_square_quantile(cfg.d, 1.0 - 1e-6);

    // Lazy per-(track, group) updates, shared across components/partitions.
    std::map<std::pair<int, int>, UpdateCacheEntry> cache;
    auto evidence = [&](int track, int group) -> const UpdateCacheEntry& {
        const auto key = std::make_pair(track, group);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;

        UpdateCacheEntry entry;
        const auto& mix = predicted.table[track].density;
        const auto& W = registry.measurements[group];

        // Cheap centroid gate so distant clutter groups never pay for a
        // full GGIW update.
        bool gated_in = false;
        for (const auto& comp : mix.components) {
            const auto& prm = comp.params;
            const Eigen::VectorXd nu =
                registry.centroid[group] - observe(H, prm.m, prm.extent_dim());
            const double s =
                (H * prm.P * H.transpose())(0, 0) + 1.0 / static_cast<double>(W.size());
            const Eigen::MatrixXd S = s * extent_point_estimate(prm);
            if (nu.dot(S.inverse() * nu) <= gate) {
                gated_in = true;
                break;
            }
        }
        if (gated_in) {
            MixtureUpdate up = update_mixture(mix, W, H);
            entry.log_eta = std::log(cfg.p_d) + up.log_evidence - registry.log_kappa[group];
            entry.table_index = static_cast<int>(out.table.size());
            out.table.push_back({predicted.table[track].label, std::move(up.posterior)});
        }
        return cache.emplace(key, std::move(entry)).first->second;
    };

    // Misdetection evidence and (for the non-literal mode) the reweighted
    // density per track.
    const auto n_table = static_cast<int>(predicted.table.size());
    std::vector<double> log_eta_miss(n_table);
    std::vector<int> miss_index(n_table);
    for (int t = 0; t < n_table; ++t) {
        log_eta_miss[t] =
            mixture_log_misdetect(predicted.table[t].density, cfg.p_d, cfg.literal_misdetect);
        if (cfg.literal_misdetect) {
            miss_index[t] = t;
        } else {
            miss_index[t] = static_cast<int>(out.table.size());
            out.table.push_back({predicted.table[t].label,
                                 misdetect_mixture(predicted.table[t].density, cfg.p_d, false)});
        }
    }

    // Enumerate candidate (component, partition) pairs; in exhaustive mode
    // the partition size cap of the closed-form posterior applies.
    struct Pair {
        int component;
        int partition;
        double log_score;
    };
    std::vector<Pair> pairs;
    for (std::size_t ci = 0; ci < predicted.components.size(); ++ci) {
        const auto& c = predicted.components[ci];
        for (std::size_t p = 0; p < partitions.size(); ++p) {
            if (cfg.exhaustive &&
                partitions[p].size() > c.tracks.size() + 1)
                continue;
            // Greedy row-minimum bound on the best assignment.
            double bound = 0.0;
            for (int t : c.tracks) {
                double row_min = log_eta_miss[t];
                for (int g : partition_groups[p]) row_min = std::max(row_min, evidence(t, g).log_eta);
                bound += row_min;
            }
            pairs.push_back({static_cast<int>(ci), static_cast<int>(p), c.log_weight + bound});
        }
    }

    std::vector<int> budget(pairs.size(), 0);
    if (cfg.exhaustive) {
        budget.assign(pairs.size(), std::numeric_limits<int>::max() / 2);
    } else {
        std::vector<double> scores;
        scores.reserve(pairs.size());
        for (const auto& pr : pairs) scores.push_back(pr.log_score);
        budget = allocate_budget(cfg.n_update_components, scores);
    }

    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
        if (budget[pi] == 0) continue;
        const auto& c = predicted.components[pairs[pi].component];
        const auto& groups = partition_groups[pairs[pi].partition];
        const auto n = static_cast<int>(c.tracks.size());
        const auto g = static_cast<int>(groups.size());

        AssignCostMatrix cost;
        cost.detection.setConstant(n, g, kInfCost);
        cost.misdetection.resize(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < g; ++j) {
                const double eta = evidence(c.tracks[i], groups[j]).log_eta;
                if (std::isfinite(eta)) cost.detection(i, j) = -eta;
            }
            cost.misdetection(i) =
                std::isfinite(log_eta_miss[c.tracks[i]]) ? -log_eta_miss[c.tracks[i]] : kInfCost;
        }

        for (const auto& assignment : murty(cost, budget[pi])) {
            GlmbComponent comp;
            comp.log_weight = c.log_weight - assignment.cost;
            comp.tracks.reserve(n);
            for (int i = 0; i < n; ++i) {
                const int col = assignment.row_to_col[i];
                if (col < g)
                    comp.tracks.push_back(evidence(c.tracks[i], groups[col]).table_index);
                else
                    comp.tracks.push_back(miss_index[c.tracks[i]]);
            }
            out.components.push_back(std::move(comp));
        }
    }

    out = normalize_glmb(std::move(out));
    const double captured = out.log_normalizer;
    if (!cfg.exhaustive) out = prune_glmb(std::move(out), cfg.max_components);
    out.compact();
    out.log_normalizer = captured;
    return out;
}

GlmbFilterState initial_glmb_state() {
    GlmbFilterState state;
    state.density.components.push_back({0.0, {}});
    state.density.cardinality = {1.0};
    return state;
}

std::vector<Estimate> step_glmb(GlmbFilterState& state, const std::vector<Eigen::VectorXd>& Z,
                                const GlmbFilterConfig& cfg) {
    const GlmbDensity pred = predict_glmb(state.density, cfg, state.step);
    state.density = update_glmb(pred, Z, cfg);
    ++state.step;
    return extract_estimates(state.density);
}

}  // namespace rfse
