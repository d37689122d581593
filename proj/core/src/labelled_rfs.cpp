#include "rfse/labelled_rfs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace rfse {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

Label Label::parse(const std::string& s) {
    const auto dot = s.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 >= s.size())
        throw std::invalid_argument("Label: expected \"birth_step.index\", got \"" + s + "\"");
    return Label{std::stoi(s.substr(0, dot)), std::stoi(s.substr(dot + 1))};
}

std::vector<Label> GlmbDensity::component_labels(int c) const {
    std::vector<Label> out;
    out.reserve(components[c].tracks.size());
    for (int t : components[c].tracks) out.push_back(table[t].label);
    return out;
}

double GlmbDensity::expected_cardinality() const {
    double acc = 0.0;
    for (std::size_t n = 0; n < cardinality.size(); ++n) acc += static_cast<double>(n) * cardinality[n];
    return acc;
}

void GlmbDensity::compact() {
    for (auto& c : components)
        std::sort(c.tracks.begin(), c.tracks.end(),
                  [&](int a, int b) { return table[a].label < table[b].label; });

    std::vector<int> remap(table.size(), -1);
    std::vector<LabelledTrack> new_table;
    for (auto& c : components)
        for (int& t : c.tracks) {
            if (remap[t] == -1) {
                remap[t] = static_cast<int>(new_table.size());
                new_table.push_back(std::move(table[t]));
            }
            t = remap[t];
        }
    table = std::move(new_table);
}

void GlmbDensity::check_invariants() const {
    double wsum = 0.0;
    for (const auto& c : components) {
        std::set<Label> labels;
        for (int t : c.tracks) {
            if (t < 0 || t >= static_cast<int>(table.size()))
                throw std::invalid_argument("GlmbDensity: track index out of range");
            if (!labels.insert(table[t].label).second)
                throw std::invalid_argument("GlmbDensity: repeated label inside a component");
        }
        wsum += std::exp(c.log_weight);
    }
    if (std::abs(wsum - 1.0) > 1e-9)
        throw std::invalid_argument("GlmbDensity: component weights must sum to 1");

    double csum = 0.0;
    std::vector<double> by_card(cardinality.size(), 0.0);
    for (const auto& c : components) {
        if (c.tracks.size() >= by_card.size())
            throw std::invalid_argument("GlmbDensity: cardinality distribution too short");
        by_card[c.tracks.size()] += std::exp(c.log_weight);
    }
    for (std::size_t n = 0; n < cardinality.size(); ++n) {
        csum += cardinality[n];
        if (std::abs(by_card[n] - cardinality[n]) > 1e-9)
            throw std::invalid_argument("GlmbDensity: cardinality entry mismatch");
    }
    if (std::abs(csum - 1.0) > 1e-9)
        throw std::invalid_argument("GlmbDensity: cardinality distribution must sum to 1");
}

double LmbDensity::expected_cardinality() const {
    double acc = 0.0;
    for (const auto& t : tracks) acc += t.r;
    return acc;
}

const LmbTrack* LmbDensity::find(const Label& l) const {
    for (const auto& t : tracks)
        if (t.label == l) return &t;
    return nullptr;
}

void LmbDensity::sort_by_label() {
    std::sort(tracks.begin(), tracks.end(),
              [](const LmbTrack& a, const LmbTrack& b) { return a.label < b.label; });
}

void LmbDensity::check_invariants() const {
    std::set<Label> labels;
    for (const auto& t : tracks) {
        if (t.r < 0.0 || t.r > 1.0)
            throw std::invalid_argument("LmbDensity: existence probability outside [0,1]");
        if (!labels.insert(t.label).second)
            throw std::invalid_argument("LmbDensity: repeated label");
    }
}

GlmbDensity normalize_glmb(GlmbDensity raw) {
    double mx = kNegInf;
    for (const auto& c : raw.components) mx = std::max(mx, c.log_weight);
    if (!std::isfinite(mx)) throw EmptyPosterior("normalize_glmb: no component has finite weight");

    double acc = 0.0;
    for (const auto& c : raw.components) acc += std::exp(c.log_weight - mx);
    const double log_norm = mx + std::log(acc);
    raw.log_normalizer = log_norm;

    std::size_t max_card = 0;
    for (auto& c : raw.components) {
        c.log_weight -= log_norm;
        max_card = std::max(max_card, c.tracks.size());
    }
    raw.cardinality.assign(max_card + 1, 0.0);
    for (const auto& c : raw.components) raw.cardinality[c.tracks.size()] += std::exp(c.log_weight);
    return raw;
}

GlmbDensity prune_glmb(GlmbDensity g, int max_components) {
    if (max_components < 1) throw std::invalid_argument("prune_glmb: max_components must be >= 1");
    if (static_cast<int>(g.components.size()) > max_components) {
        std::stable_sort(g.components.begin(), g.components.end(),
                         [](const GlmbComponent& a, const GlmbComponent& b) {
                             return a.log_weight > b.log_weight;
                         });
        g.components.resize(max_components);
    }
    g.compact();
    return normalize_glmb(std::move(g));
}

std::vector<Estimate> extract_estimates(const GlmbDensity& g) {
    if (g.cardinality.empty()) return {};
    std::size_t map_card = 0;
    for (std::size_t n = 1; n < g.cardinality.size(); ++n)
        if (g.cardinality[n] > g.cardinality[map_card]) map_card = n;
    if (map_card == 0) return {};

    int best = -1;
    std::vector<Label> best_labels;
    for (std::size_t c = 0; c < g.components.size(); ++c) {
        if (g.components[c].tracks.size() != map_card) continue;
        auto labels = g.component_labels(static_cast<int>(c));
        std::sort(labels.begin(), labels.end());
        if (best == -1 || g.components[c].log_weight > g.components[best].log_weight ||
            (g.components[c].log_weight == g.components[best].log_weight && labels < best_labels)) {
            best = static_cast<int>(c);
            best_labels = std::move(labels);
        }
    }

    std::vector<Estimate> out;
    for (int t : g.components[best].tracks) {
        const auto& track = g.table[t];
        const GGIWComponent& comp = track.density.best();
        Estimate e;
        e.label = track.label;
        e.rate = comp.params.rate_mean();
        e.x = comp.params.m;
        e.extent = extent_point_estimate(comp.params);
        out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end(), [](const Estimate& a, const Estimate& b) { return a.label < b.label; });
    return out;
}

GlmbDensity lmb_to_glmb(const LmbDensity& lmb, int subset_cap) {
    const auto n = static_cast<int>(lmb.tracks.size());
    if (n > subset_cap)
        throw std::invalid_argument("lmb_to_glmb: track count exceeds subset enumeration cap");

    GlmbDensity g;
    g.table.reserve(n);
    for (const auto& t : lmb.tracks) g.table.push_back({t.label, t.density});

    const auto n_subsets = std::size_t{1} << n;
    g.components.reserve(n_subsets);
    for (std::size_t mask = 0; mask < n_subsets; ++mask) {
        GlmbComponent c;
        c.log_weight = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = lmb.tracks[i].r;
            if (mask & (std::size_t{1} << i)) {
                c.log_weight += std::log(r);
                c.tracks.push_back(i);
            } else {
                c.log_weight += std::log1p(-r);
            }
        }
        g.components.push_back(std::move(c));
    }
    return normalize_glmb(std::move(g));
}

LmbDensity glmb_to_lmb(const GlmbDensity& g, const MixtureReductionConfig& reduction) {
    std::map<Label, double> existence;
    std::map<Label, GGIWMixture> mixtures;
    for (const auto& c : g.components) {
        const double w = std::exp(c.log_weight);
        if (w <= 0.0) continue;
        for (int t : c.tracks) {
            const auto& track = g.table[t];
            existence[track.label] += w;
            auto& mix = mixtures[track.label];
            for (const auto& comp : track.density.components)
                mix.components.push_back({w * comp.weight, comp.params});
        }
    }

    LmbDensity out;
    for (auto& [label, r] : existence) {
        LmbTrack t;
        t.label = label;
        t.r = std::min(r, 1.0);
        auto& mix = mixtures[label];
        mix.normalize();
        t.density = reduce_mixture(mix, reduction);
        out.tracks.push_back(std::move(t));
    }
    out.sort_by_label();
    return out;
}

}  // namespace rfse
