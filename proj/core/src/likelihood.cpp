#include "rfse/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rfse {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double ClutterModel::volume() const {
    double v = 1.0;
    for (int i = 0; i < lo.size(); ++i) v *= hi(i) - lo(i);
    return v;
}

bool ClutterModel::contains(const Eigen::VectorXd& z) const {
    if (z.size() != lo.size()) return false;
    for (int i = 0; i < lo.size(); ++i)
        if (z(i) < lo(i) || z(i) > hi(i)) return false;
    return true;
}

double ClutterModel::log_intensity(const Eigen::VectorXd& z) const {
    if (!contains(z)) return kNegInf;
    return std::log(lambda) - std::log(volume());
}

void ClutterModel::validate() const {
    if (lambda < 0.0) throw std::invalid_argument("ClutterModel: lambda must be >= 0");
    if (lo.size() != hi.size() || lo.size() == 0)
        throw std::invalid_argument("ClutterModel: box bounds must match and be non-empty");
    if (volume() <= 0.0) throw std::invalid_argument("ClutterModel: box volume must be positive");
}

void Partition::validate(int n_measurements) const {
    std::vector<char> seen(n_measurements, 0);
    int count = 0;
    for (const auto& g : groups) {
        if (g.empty()) throw std::invalid_argument("Partition: empty group");
        for (int idx : g) {
            if (idx < 0 || idx >= n_measurements)
                throw std::invalid_argument("Partition: index out of range");
            if (seen[idx]) throw std::invalid_argument("Partition: index appears twice");
            seen[idx] = 1;
            ++count;
        }
    }
    if (count != n_measurements) throw std::invalid_argument("Partition: indices not covered");
}

void Partition::canonicalize() {
    for (auto& g : groups) std::sort(g.begin(), g.end());
    std::sort(groups.begin(), groups.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

void AssociationMap::validate(int n_groups) const {
    std::vector<char> used(n_groups, 0);
    for (int g : group_of_track) {
        if (g == kMisdetect) continue;
        if (g < 0 || g >= n_groups) throw std::invalid_argument("AssociationMap: group out of range");
        if (used[g]) throw std::invalid_argument("AssociationMap: group assigned twice");
        used[g] = 1;
    }
}

std::vector<Partition> all_partitions(int n) {
    if (n < 0 || n > 12) throw std::invalid_argument("all_partitions: n must be in [0,12]");
    if (n == 0) return {Partition{}};

    std::vector<Partition> out;
    std::vector<int> rgs(n, 0);  // restricted growth string
    while (true) {
        const int n_groups = *std::max_element(rgs.begin(), rgs.end()) + 1;
        Partition p;
        p.groups.assign(n_groups, {});
        for (int i = 0; i < n; ++i) p.groups[rgs[i]].push_back(i);
        out.push_back(std::move(p));

        // next RGS: rightmost position that can be incremented
        int i = n - 1;
        for (; i > 0; --i) {
            const int prefix_max = *std::max_element(rgs.begin(), rgs.begin() + i);
            if (rgs[i] <= prefix_max) break;
        }
        if (i == 0) break;
        ++rgs[i];
        std::fill(rgs.begin() + i + 1, rgs.end(), 0);
    }
    return out;
}

double log_clutter_density(const std::vector<Eigen::VectorXd>& Z, const ClutterModel& clutter) {
    double acc = -clutter.lambda;
    for (const auto& z : Z) acc += clutter.log_intensity(z);
    return acc;
}

GroupEvidence log_group_pseudolikelihood(const GGIWParams& track,
                                         const std::vector<Eigen::VectorXd>& group,
                                         double p_d, const ClutterModel& clutter,
                                         const Eigen::RowVectorXd& H) {
    if (group.empty())
        throw std::invalid_argument("log_group_pseudolikelihood: group must be non-empty");
    GGIWUpdate up = update_ggiw(track, group, H);
    double log_psi = p_d > 0.0 ? std::log(p_d) : kNegInf;
    log_psi += up.log_evidence;
    for (const auto& z : group) log_psi -= clutter.log_intensity(z);
    return {std::move(up.posterior), log_psi};
}

namespace {

/// Sum over injective maps of tracks onto groups (misdetection allowed) of
/// the product of per-track psi terms, by recursion over tracks.
double sum_over_associations(int track, std::vector<char>& group_used,
                             const std::vector<std::vector<double>>& psi_detect,
                             const std::vector<double>& psi_miss) {
    const auto n_tracks = static_cast<int>(psi_miss.size());
    if (track == n_tracks) return 1.0;
    double acc = psi_miss[track] * sum_over_associations(track + 1, group_used, psi_detect, psi_miss);
    for (std::size_t g = 0; g < group_used.size(); ++g) {
        if (group_used[g] || psi_detect[track][g] == 0.0) continue;
        group_used[g] = 1;
        acc += psi_detect[track][g] *
               sum_over_associations(track + 1, group_used, psi_detect, psi_miss);
        group_used[g] = 0;
    }
    return acc;
}

}  // namespace

double brute_force_likelihood(const std::vector<std::pair<GGIWParams, Label>>& X,
                              const std::vector<Eigen::VectorXd>& Z, double p_d,
                              const ClutterModel& clutter, const Eigen::RowVectorXd& H) {
    const auto n_tracks = static_cast<int>(X.size());
    const auto n_meas = static_cast<int>(Z.size());
    if (n_meas > 6 || n_tracks > 3)
        throw std::invalid_argument("brute_force_likelihood: instance too large for enumeration");

    const double log_gc = log_clutter_density(Z, clutter);

    std::vector<double> psi_miss(n_tracks);
    for (int t = 0; t < n_tracks; ++t)
        psi_miss[t] = std::exp(log_evidence_misdetect(X[t].first, p_d, true));

    double total = 0.0;
    for (const Partition& part : all_partitions(n_meas)) {
        if (static_cast<int>(part.size()) > n_tracks + 1) continue;

        std::vector<std::vector<double>> psi_detect(n_tracks,
                                                    std::vector<double>(part.size(), 0.0));
        for (int t = 0; t < n_tracks; ++t) {
            for (std::size_t g = 0; g < part.size(); ++g) {
                std::vector<Eigen::VectorXd> group;
                for (int idx : part.groups[g]) group.push_back(Z[idx]);
                psi_detect[t][g] =
                    std::exp(log_group_pseudolikelihood(X[t].first, group, p_d, clutter, H).log_psi);
            }
        }
        std::vector<char> group_used(part.size(), 0);
        total += sum_over_associations(0, group_used, psi_detect, psi_miss);
    }
    return std::exp(log_gc) * total;
}

}  // namespace rfse
