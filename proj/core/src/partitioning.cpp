#include "rfse/partitioning.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace rfse {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

Partition single_linkage(const std::vector<Eigen::VectorXd>& points, double threshold) {
    const auto n = static_cast<int>(points.size());
    UnionFind uf(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if ((points[i] - points[j]).norm() <= threshold) uf.unite(i, j);

    std::vector<std::vector<int>> by_root(n);
    for (int i = 0; i < n; ++i) by_root[uf.find(i)].push_back(i);

    Partition p;
    for (auto& g : by_root)
        if (!g.empty()) p.groups.push_back(std::move(g));
    p.canonicalize();
    return p;
}

/// Two-component EM split of one group; returns empty when the split is
/// degenerate. Means seeded from the most distant pair, shared isotropic
/// variance, fixed iteration count.
std::vector<std::vector<int>> em_split(const std::vector<Eigen::VectorXd>& Z,
                                       const std::vector<int>& group) {
    const auto n = static_cast<int>(group.size());
    int a = 0, b = 1;
    double best = -1.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double d = (Z[group[i]] - Z[group[j]]).squaredNorm();
            if (d > best) {
                best = d;
                a = i;
                b = j;
            }
        }
    if (best <= 0.0) return {};

    Eigen::VectorXd m0 = Z[group[a]], m1 = Z[group[b]];
    double var = 0.0;
    for (int i = 0; i < n; ++i) var += (Z[group[i]] - Z[group[a]]).squaredNorm();
    var = std::max(var / n, 1e-9);

    std::vector<double> resp(n, 0.5);
    for (int it = 0; it < 10; ++it) {
        for (int i = 0; i < n; ++i) {
            const double l0 = -0.5 * (Z[group[i]] - m0).squaredNorm() / var;
            const double l1 = -0.5 * (Z[group[i]] - m1).squaredNorm() / var;
            resp[i] = 1.0 / (1.0 + std::exp(l1 - l0));  // weight of component 0
        }
        Eigen::VectorXd s0 = Eigen::VectorXd::Zero(m0.size()), s1 = s0;
        double w0 = 0.0, w1 = 0.0;
        for (int i = 0; i < n; ++i) {
            s0 += resp[i] * Z[group[i]];
            s1 += (1.0 - resp[i]) * Z[group[i]];
            w0 += resp[i];
            w1 += 1.0 - resp[i];
        }
        if (w0 < 1e-9 || w1 < 1e-9) return {};
        m0 = s0 / w0;
        m1 = s1 / w1;
    }

    std::vector<std::vector<int>> out(2);
    for (int i = 0; i < n; ++i) out[resp[i] >= 0.5 ? 0 : 1].push_back(group[i]);
    if (out[0].empty() || out[1].empty()) return {};
    return out;
}

}  // namespace

std::vector<Partition> feasible_partitions(const std::vector<Eigen::VectorXd>& Z,
                                           const PartitionConfig& cfg) {
    if (cfg.n_thresholds < 1 || cfg.max_partitions < 1)
        throw std::invalid_argument("feasible_partitions: invalid configuration");

    const auto n = static_cast<int>(Z.size());
    if (n == 0) return {Partition{}};

    std::vector<Partition> out;
    std::set<std::vector<std::vector<int>>> seen;
    auto push = [&](Partition p) {
        p.canonicalize();
        if (seen.insert(p.groups).second) out.push_back(std::move(p));
    };

    {
        Partition one;
        one.groups.emplace_back(n);
        std::iota(one.groups.back().begin(), one.groups.back().end(), 0);
        push(std::move(one));
    }
    if (n <= 4) {
        Partition singles;
        for (int i = 0; i < n; ++i) singles.groups.push_back({i});
        push(std::move(singles));
    }

    std::vector<double> dists;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) dists.push_back((Z[i] - Z[j]).norm());
    std::sort(dists.begin(), dists.end());

    std::vector<Partition> distance_partitions;
    if (!dists.empty()) {
        for (int t = 0; t < cfg.n_thresholds; ++t) {
            const double q = cfg.n_thresholds == 1
                                 ? 0.5
                                 : static_cast<double>(t) / (cfg.n_thresholds - 1);
            const auto idx = static_cast<std::size_t>(q * (dists.size() - 1));
            Partition p = single_linkage(Z, dists[idx]);
            distance_partitions.push_back(p);
            push(std::move(p));
        }
    }

    if (cfg.em_refine) {
        for (const auto& p : distance_partitions) {
            for (std::size_t g = 0; g < p.groups.size(); ++g) {
                if (p.groups[g].size() < 8) continue;
                auto halves = em_split(Z, p.groups[g]);
                if (halves.empty()) continue;
                Partition refined = p;
                refined.groups.erase(refined.groups.begin() + static_cast<long>(g));
                refined.groups.push_back(std::move(halves[0]));
                refined.groups.push_back(std::move(halves[1]));
                push(std::move(refined));
            }
        }
    }

    if (static_cast<int>(out.size()) > cfg.max_partitions) out.resize(cfg.max_partitions);
    for (const auto& p : out) p.validate(n);
    return out;
}

double chi_square_quantile(int dof, double p) {
    boost::math::chi_squared dist(dof);
    return boost::math::quantile(dist, p);
}

Clustering cluster_tracks(const LmbDensity& tracks, const std::vector<Eigen::VectorXd>& Z,
                          double gate_quantile, const Eigen::RowVectorXd& H) {
    const auto n_tracks = static_cast<int>(tracks.tracks.size());
    const auto n_meas = static_cast<int>(Z.size());

    int d = 0;
    if (n_meas > 0) d = static_cast<int>(Z.front().size());
    else if (n_tracks > 0) d = tracks.tracks.front().density.components.front().params.extent_dim();
    const double gate = d > 0 ? chi_square_quantile(d, gate_quantile) : 0.0;

    // Nodes 0..n_tracks-1 are tracks, the rest measurements.
    UnionFind uf(n_tracks + n_meas);
    std::vector<char> gated(n_meas, 0);
    for (int t = 0; t < n_tracks; ++t) {
        for (const auto& comp : tracks.tracks[t].density.components) {
            const auto& prm = comp.params;
            const Eigen::VectorXd zhat = observe(H, prm.m, prm.extent_dim());
            const double hph = (H * prm.P * H.transpose())(0, 0);
            const Eigen::MatrixXd extent = extent_point_estimate(prm);
            const Eigen::MatrixXd S = (hph + 1.0) * extent;
            const Eigen::MatrixXd Sinv = S.inverse();
            for (int m = 0; m < n_meas; ++m) {
                const Eigen::VectorXd nu = Z[m] - zhat;
                if (nu.dot(Sinv * nu) <= gate) {
                    uf.unite(t, n_tracks + m);
                    gated[m] = 1;
                }
            }
        }
    }

    std::vector<std::vector<int>> comp_tracks(n_tracks + n_meas), comp_meas(n_tracks + n_meas);
    for (int t = 0; t < n_tracks; ++t) comp_tracks[uf.find(t)].push_back(t);
    for (int m = 0; m < n_meas; ++m)
        if (gated[m]) comp_meas[uf.find(n_tracks + m)].push_back(m);

    Clustering out;
    for (int root = 0; root < n_tracks + n_meas; ++root) {
        if (comp_tracks[root].empty()) continue;
        TrackCluster c;
        c.track_indices = comp_tracks[root];
        c.measurement_indices = comp_meas[root];
        out.groups.push_back(std::move(c));
    }
    std::sort(out.groups.begin(), out.groups.end(), [&](const TrackCluster& a, const TrackCluster& b) {
        return tracks.tracks[a.track_indices.front()].label <
               tracks.tracks[b.track_indices.front()].label;
    });
    for (int m = 0; m < n_meas; ++m)
        if (!gated[m]) out.residual.push_back(m);
    return out;
}

std::vector<BirthCandidate> birth_candidates(const std::vector<Eigen::VectorXd>& residual,
                                             const BirthClusterConfig& cfg) {
    std::vector<BirthCandidate> out;
    if (residual.empty()) return out;

    const Partition clusters = single_linkage(residual, cfg.distance_threshold);
    const auto d = static_cast<int>(residual.front().size());
    for (const auto& group : clusters.groups) {
        const auto n = static_cast<int>(group.size());
        if (n < cfg.min_cluster_size) continue;

        BirthCandidate cand;
        cand.cluster_size = n;
        cand.mean_position = Eigen::VectorXd::Zero(d);
        for (int idx : group) cand.mean_position += residual[idx];
        cand.mean_position /= n;

        Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
        for (int idx : group) {
            const Eigen::VectorXd r = residual[idx] - cand.mean_position;
            scatter += r * r.transpose();
        }
        const double denom = cfg.v0 - 2.0 * d - 2.0;
        cand.scale = (denom > 0.0 ? denom : 1.0) / (n - 1.0) * scatter;
        out.push_back(std::move(cand));
    }
    return out;
}

}  // namespace rfse
