#pragma once

#include "rfse/ggiw.hpp"
#include "rfse/label.hpp"
#include "rfse/labelled_rfs.hpp"
#include "rfse/likelihood.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace rfse {

struct TargetSpec {
    int birth_step = 1;                 // first step alive (1-based, inclusive)
    int death_step = 1;                 // last step alive (inclusive)
    Eigen::VectorXd x0;                 // initial kinematic state, length s*d
    Eigen::MatrixXd extent;             // d x d true extent
    double rate = 10.0;                 // Poisson mean of detections

    /// Optional deterministic waypoint path: (step, position) knots with
    /// piecewise-linear position and matching velocity. Overrides F-driven
    /// propagation when non-empty.
    std::vector<std::pair<int, Eigen::VectorXd>> waypoints;

    std::vector<int> forced_miss_steps;  // detection forced off at these steps
    bool force_detect = false;           // detection forced on everywhere else
};

struct ScenarioSpec {
    int steps = 100;
    std::vector<TargetSpec> targets;
    MotionModel motion;
    double p_d = 0.9;
    ClutterModel clutter;
    std::uint64_t seed = 0;
    int d = 2;
    bool process_noise = false;

    void validate() const;
};

struct TruthRecord {
    Label label;
    Eigen::VectorXd x;
    Eigen::MatrixXd extent;
    double rate = 0.0;
};

struct StepRecord {
    int k = 0;
    std::vector<TruthRecord> truth;
    std::vector<Eigen::VectorXd> measurements;
};

struct ScenarioLog {
    std::vector<StepRecord> steps;
};

/// Generate ground truth and measurements. Fully seeded: every (target,
/// step) pair and the clutter draw on each step use independent derived
/// streams, so editing one target's detections leaves everything else
/// bit-identical.
ScenarioLog generate(const ScenarioSpec& spec);

/// The three built-in benchmark scenarios.
ScenarioSpec builtin_scenario(int id);

struct ParseError : std::runtime_error {
    int line = 0;
    ParseError(const std::string& what, int line_) : std::runtime_error(what), line(line_) {}
};

// JSON Lines serialization. Field order and 17-significant-digit floats are
// part of the format so identical data round-trips byte-for-byte.
void write_scenario_log(std::ostream& os, const ScenarioLog& log);
ScenarioLog read_scenario_log(std::istream& is);

struct EstimateRecord {
    int k = 0;
    std::vector<Estimate> estimates;
};

struct TrackRunSummary {
    int steps = 0;
    double wall_seconds_total = 0.0;
    double wall_seconds_per_step_mean = 0.0;
    double wall_seconds_per_step_std = 0.0;
};

void write_estimate_record(std::ostream& os, const EstimateRecord& rec, bool with_existence);
void write_run_summary(std::ostream& os, const TrackRunSummary& summary);
std::vector<EstimateRecord> read_estimate_records(std::istream& is);

/// Scenario spec as a JSON document (for user-defined scenarios).
ScenarioSpec read_scenario_spec_json(std::istream& is);

}  // namespace rfse
