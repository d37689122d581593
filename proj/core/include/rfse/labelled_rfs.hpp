#pragma once

#include "rfse/label.hpp"
#include "rfse/mixture.hpp"

#include <stdexcept>
#include <vector>

namespace rfse {

struct EmptyPosterior : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LabelledTrack {
    Label label;
    GGIWMixture density;
};

/// One GLMB hypothesis: a log weight and the set of tracks it contains,
/// stored as indices into the owning density's track table.
struct GlmbComponent {
    double log_weight = 0.0;
    std::vector<int> tracks;
};

/// Weighted mixture over label-set hypotheses. Tracks are shared through a
/// table so a track appearing in many components is stored once.
struct GlmbDensity {
    std::vector<LabelledTrack> table;
    std::vector<GlmbComponent> components;
    std::vector<double> cardinality;   // filled by normalize_glmb
    double log_normalizer = 0.0;       // log total raw weight seen by the last normalize

    [[nodiscard]] std::vector<Label> component_labels(int c) const;
    [[nodiscard]] double expected_cardinality() const;

    /// Sort each component's tracks by label and drop unreferenced table rows.
    void compact();
    /// Throws when labels repeat inside a component, weights do not sum to 1,
    /// or the cardinality distribution is inconsistent.
    void check_invariants() const;
};

struct LmbTrack {
    Label label;
    double r = 0.0;
    GGIWMixture density;
};

/// One existence probability and density per label, kept sorted by label.
struct LmbDensity {
    std::vector<LmbTrack> tracks;

    [[nodiscard]] double expected_cardinality() const;
    [[nodiscard]] const LmbTrack* find(const Label& l) const;
    void sort_by_label();
    void check_invariants() const;
};

/// Log-sum-exp normalization plus cardinality recomputation. Throws
/// EmptyPosterior when no component has finite weight.
GlmbDensity normalize_glmb(GlmbDensity raw);

/// Keep the max_components highest-weight components and renormalize.
GlmbDensity prune_glmb(GlmbDensity g, int max_components);

struct Estimate {
    Label label;
    double rate = 0.0;
    Eigen::VectorXd x;
    Eigen::MatrixXd extent;
    double r = -1.0;  // < 0 when not applicable
};

/// MAP-cardinality estimate extraction: pick the most probable cardinality
/// (lowest on ties), then the heaviest component of that cardinality
/// (lowest label set on ties), and report its tracks.
std::vector<Estimate> extract_estimates(const GlmbDensity& g);

/// Exhaustive LMB -> GLMB conversion: one component per subset of labels.
/// Throws std::invalid_argument when the track count exceeds subset_cap.
GlmbDensity lmb_to_glmb(const LmbDensity& lmb, int subset_cap = 15);

/// Moment-matching GLMB -> LMB approximation. Each label's existence is the
/// summed weight of components containing it; its density is the
/// weight-proportional mixture over those components, reduced per track.
LmbDensity glmb_to_lmb(const GlmbDensity& g, const MixtureReductionConfig& reduction);

}  // namespace rfse
