#include "rfse/simulation.hpp"

#include "rfse/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace rfse {

namespace {

using json = nlohmann::json;

enum StreamTag : std::uint64_t { kTargetStream = 1, kClutterStream = 2, kNoiseStream = 3 };

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void append_vector(std::string& s, const Eigen::VectorXd& v) {
    s += '[';
    for (int i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += fmt(v(i));
    }
    s += ']';
}

void append_matrix(std::string& s, const Eigen::MatrixXd& m) {
    s += '[';
    for (int i = 0; i < m.rows(); ++i) {
        if (i) s += ',';
        s += '[';
        for (int j = 0; j < m.cols(); ++j) {
            if (j) s += ',';
            s += fmt(m(i, j));
        }
        s += ']';
    }
    s += ']';
}

Eigen::VectorXd parse_vector(const json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
    return v;
}

Eigen::MatrixXd parse_matrix(const json& j) {
    const auto rows = j.size();
    const auto cols = rows ? j[0].size() : 0;
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t c = 0; c < cols; ++c) m(static_cast<int>(i), static_cast<int>(c)) = j[i][c].get<double>();
    return m;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& context) {
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw std::runtime_error("unknown key \"" + key + "\" in " + context);
}

/// Deterministic per-target state trajectory over the target's lifetime.
std::vector<Eigen::VectorXd> target_trajectory(const TargetSpec& t, const ScenarioSpec& spec,
                                               int target_index) {
    const int d = spec.d;
    const int s = spec.motion.order();
    std::vector<Eigen::VectorXd> states;
    states.reserve(t.death_step - t.birth_step + 1);

    if (!t.waypoints.empty()) {
        auto knots = t.waypoints;
        std::sort(knots.begin(), knots.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (int k = t.birth_step; k <= t.death_step; ++k) {
            // Segment containing k; clamp to the first/last segment outside.
            std::size_t seg = 0;
            while (seg + 2 < knots.size() && k >= knots[seg + 1].first) ++seg;
            const auto& [k0, p0] = knots[seg];
            const auto& [k1, p1] = knots[seg + 1];
            const double span = static_cast<double>(k1 - k0);
            const double a = (k - k0) / span;
            Eigen::VectorXd x = Eigen::VectorXd::Zero(s * d);
            x.head(d) = p0 + a * (p1 - p0);
            if (s > 1) x.segment(d, d) = (p1 - p0) / (span * spec.motion.T);
            states.push_back(std::move(x));
        }
        return states;
    }

    Eigen::VectorXd x = t.x0;
    Rng noise(derive_seed(spec.seed, {kNoiseStream, static_cast<std::uint64_t>(target_index)}));
    for (int k = t.birth_step; k <= t.death_step; ++k) {
        states.push_back(x);
        x = kron_apply(spec.motion.F, x, d);
        if (spec.process_noise) {
            // Q (x) chi noise, drawn blockwise through the extent Cholesky.
            Eigen::LLT<Eigen::MatrixXd> chi_llt(t.extent);
            Eigen::LLT<Eigen::MatrixXd> q_llt(
                spec.motion.Q + 1e-12 * Eigen::MatrixXd::Identity(s, s));
            Eigen::MatrixXd zblocks(s, d);
            for (int i = 0; i < s; ++i) zblocks.row(i) = noise.normal_vec(d).transpose();
            const Eigen::MatrixXd noise_blocks =
                q_llt.matrixL().toDenseMatrix() * zblocks * chi_llt.matrixU().toDenseMatrix();
            for (int i = 0; i < s; ++i) x.segment(i * d, d) += noise_blocks.row(i).transpose();
        }
    }
    return states;
}

}  // namespace

void ScenarioSpec::validate() const {
    if (steps < 1) throw std::invalid_argument("ScenarioSpec: steps must be >= 1");
    motion.validate();
    clutter.validate();
    if (p_d < 0.0 || p_d > 1.0) throw std::invalid_argument("ScenarioSpec: p_d outside [0,1]");
    for (const auto& t : targets) {
        if (!(t.birth_step < t.death_step && t.death_step <= steps))
            throw std::invalid_argument("ScenarioSpec: need birth < death <= steps");
        if (t.rate <= 0.0) throw std::invalid_argument("ScenarioSpec: rate must be positive");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.extent);
        if (es.eigenvalues().minCoeff() <= 0.0)
            throw std::invalid_argument("ScenarioSpec: extent must be positive definite");
        if (t.waypoints.empty() && t.x0.size() != motion.order() * d)
            throw std::invalid_argument("ScenarioSpec: x0 must have length s*d");
    }
}

ScenarioLog generate(const ScenarioSpec& spec) {
    spec.validate();
    const int d = spec.d;
    const Eigen::RowVectorXd H = [&] {
        Eigen::RowVectorXd h = Eigen::RowVectorXd::Zero(spec.motion.order());
        h(0) = 1.0;
        return h;
    }();

    std::vector<std::vector<Eigen::VectorXd>> trajectories;
    trajectories.reserve(spec.targets.size());
    for (std::size_t i = 0; i < spec.targets.size(); ++i)
        trajectories.push_back(target_trajectory(spec.targets[i], spec, static_cast<int>(i)));

    ScenarioLog log;
    log.steps.reserve(spec.steps);
    for (int k = 1; k <= spec.steps; ++k) {
        StepRecord rec;
        rec.k = k;

        for (std::size_t i = 0; i < spec.targets.size(); ++i) {
            const auto& t = spec.targets[i];
            if (k < t.birth_step || k > t.death_step) continue;
            const Eigen::VectorXd& x = trajectories[i][k - t.birth_step];

            TruthRecord truth;
            truth.label = Label{t.birth_step, static_cast<int>(i)};
            truth.x = x;
            truth.extent = t.extent;
            truth.rate = t.rate;
            rec.truth.push_back(std::move(truth));

            Rng rng(derive_seed(spec.seed,
                                {kTargetStream, static_cast<std::uint64_t>(i),
                                 static_cast<std::uint64_t>(k)}));
            const bool missed =
                std::find(t.forced_miss_steps.begin(), t.forced_miss_steps.end(), k) !=
                t.forced_miss_steps.end();
            bool detected;
            if (missed) detected = false;
            else if (t.force_detect) detected = true;
            else detected = rng.uniform() < spec.p_d;
            if (!detected) continue;

            const int count = rng.poisson(t.rate);
            const Eigen::VectorXd center = observe(H, x, d);
            Eigen::LLT<Eigen::MatrixXd> llt(t.extent);
            for (int m = 0; m < count; ++m) {
                Eigen::VectorXd z;
                for (int attempt = 0; attempt < 100; ++attempt) {
                    z = center + llt.matrixL() * rng.normal_vec(d);
                    if (spec.clutter.contains(z)) break;
                }
                for (int c = 0; c < d; ++c)
                    z(c) = std::clamp(z(c), spec.clutter.lo(c), spec.clutter.hi(c));
                rec.measurements.push_back(std::move(z));
            }
        }

        Rng clutter_rng(derive_seed(spec.seed, {kClutterStream, static_cast<std::uint64_t>(k)}));
        const int n_clutter = clutter_rng.poisson(spec.clutter.lambda);
        for (int m = 0; m < n_clutter; ++m) {
            Eigen::VectorXd z(d);
            for (int c = 0; c < d; ++c)
                z(c) = clutter_rng.uniform(spec.clutter.lo(c), spec.clutter.hi(c));
            rec.measurements.push_back(std::move(z));
        }

        log.steps.push_back(std::move(rec));
    }
    return log;
}

ScenarioSpec builtin_scenario(int id) {
    ScenarioSpec spec;
    spec.d = 2;
    spec.motion = MotionModel::decaying_acceleration(1.0, 1.0, 0.1, 1.25, 5.0);
    spec.seed = 0;

    auto box = [](double x0, double x1, double y0, double y1, double lambda) {
        ClutterModel c;
        c.lambda = lambda;
        c.lo = Eigen::Vector2d(x0, y0);
        c.hi = Eigen::Vector2d(x1, y1);
        return c;
    };
    auto linear_target = [&](int birth, int death, double vx, double vy,
                             const Eigen::Matrix2d& extent) {
        TargetSpec t;
        t.birth_step = birth;
        t.death_step = death;
        t.x0 = Eigen::VectorXd::Zero(6);
        t.x0(2) = vx;
        t.x0(3) = vy;
        t.extent = extent;
        t.rate = 10.0;
        return t;
    };

    switch (id) {
        case 1: {
            spec.steps = 200;
            spec.p_d = 0.8;
            spec.clutter = box(-1000.0, 1000.0, -1000.0, 1000.0, 30.0);
            Eigen::Matrix2d e0, e1, e2, e3;
            e0 << 25.0, 0.0, 0.0, 25.0;
            e1 << 40.0, 10.0, 10.0, 20.0;
            e2 << 16.0, 0.0, 0.0, 36.0;
            e3 << 30.0, 0.0, 0.0, 30.0;
            spec.targets.push_back(linear_target(1, 200, 3.5, 1.5, e0));
            spec.targets.push_back(linear_target(10, 150, -3.0, 2.5, e1));
            spec.targets.push_back(linear_target(30, 200, -2.0, -3.5, e2));
            spec.targets.push_back(linear_target(60, 180, 2.5, -3.0, e3));
            return spec;
        }
        case 2: {
            spec.steps = 100;
            spec.p_d = 0.98;
            spec.clutter = box(-100.0, 1100.0, -300.0, 300.0, 10.0);
            Eigen::Matrix2d e;
            e << 25.0, 0.0, 0.0, 25.0;
            for (int sgn : {+1, -1}) {
                TargetSpec t;
                t.birth_step = 1;
                t.death_step = 100;
                t.extent = e;
                t.rate = 10.0;
                t.waypoints = {
                    {1, Eigen::Vector2d(0.0, sgn * 100.0)},
                    {30, Eigen::Vector2d(300.0, sgn * 10.0)},
                    {70, Eigen::Vector2d(700.0, sgn * 10.0)},
                    {100, Eigen::Vector2d(1000.0, sgn * 100.0)},
                };
                spec.targets.push_back(std::move(t));
            }
            return spec;
        }
        case 3: {
            spec.steps = 50;
            spec.p_d = 0.9;
            spec.clutter = box(-1500.0, 1500.0, -1500.0, 1500.0, 10.0);
            Eigen::Matrix2d e;
            e << 25.0, 0.0, 0.0, 25.0;
            TargetSpec t0 = linear_target(1, 50, 2.0, 0.0, e);
            t0.x0(0) = -1000.0;
            t0.force_detect = true;
            t0.forced_miss_steps = {20, 40, 41};
            TargetSpec t1 = linear_target(1, 50, -2.0, 0.0, e);
            t1.x0(0) = 1000.0;
            t1.force_detect = true;
            spec.targets.push_back(std::move(t0));
            spec.targets.push_back(std::move(t1));
            return spec;
        }
        default:
            throw std::invalid_argument("builtin_scenario: id must be 1, 2 or 3");
    }
}

void write_scenario_log(std::ostream& os, const ScenarioLog& log) {
    std::string line;
    for (const auto& rec : log.steps) {
        line.clear();
        line += "{\"k\":";
        line += std::to_string(rec.k);
        line += ",\"truth\":[";
        for (std::size_t i = 0; i < rec.truth.size(); ++i) {
            const auto& t = rec.truth[i];
            if (i) line += ',';
            line += "{\"label\":\"";
            line += t.label.str();
            line += "\",\"x\":";
            append_vector(line, t.x);
            line += ",\"chi\":";
            append_matrix(line, t.extent);
            line += ",\"gamma\":";
            line += fmt(t.rate);
            line += '}';
        }
        line += "],\"Z\":[";
        for (std::size_t i = 0; i < rec.measurements.size(); ++i) {
            if (i) line += ',';
            append_vector(line, rec.measurements[i]);
        }
        line += "]}\n";
        os << line;
    }
}

ScenarioLog read_scenario_log(std::istream& is) {
    ScenarioLog log;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
            StepRecord rec;
            rec.k = j.at("k").get<int>();
            for (const auto& tj : j.at("truth")) {
                TruthRecord t;
                t.label = Label::parse(tj.at("label").get<std::string>());
                t.x = parse_vector(tj.at("x"));
                t.extent = parse_matrix(tj.at("chi"));
                t.rate = tj.at("gamma").get<double>();
                rec.truth.push_back(std::move(t));
            }
            for (const auto& zj : j.at("Z")) rec.measurements.push_back(parse_vector(zj));
            log.steps.push_back(std::move(rec));
        } catch (const std::exception& e) {
            throw ParseError(std::string("scenario log: ") + e.what(), line_no);
        }
    }
    return log;
}

void write_estimate_record(std::ostream& os, const EstimateRecord& rec, bool with_existence) {
    std::string line = "{\"k\":";
    line += std::to_string(rec.k);
    line += ",\"est\":[";
    for (std::size_t i = 0; i < rec.estimates.size(); ++i) {
        const auto& e = rec.estimates[i];
        if (i) line += ',';
        line += "{\"label\":\"";
        line += e.label.str();
        line += "\",\"x\":";
        append_vector(line, e.x);
        line += ",\"chi\":";
        append_matrix(line, e.extent);
        line += ",\"gamma\":";
        line += fmt(e.rate);
        if (with_existence) {
            line += ",\"r\":";
            line += fmt(e.r);
        }
        line += '}';
    }
    line += "]}\n";
    os << line;
}

void write_run_summary(std::ostream& os, const TrackRunSummary& s) {
    std::string line = "{\"summary\":{\"steps\":";
    line += std::to_string(s.steps);
    line += ",\"wall_s_total\":";
    line += fmt(s.wall_seconds_total);
    line += ",\"wall_s_per_step_mean\":";
    line += fmt(s.wall_seconds_per_step_mean);
    line += ",\"wall_s_per_step_std\":";
    line += fmt(s.wall_seconds_per_step_std);
    line += "}}\n";
    os << line;
}

std::vector<EstimateRecord> read_estimate_records(std::istream& is) {
    std::vector<EstimateRecord> out;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            if (j.contains("summary")) continue;
            EstimateRecord rec;
            rec.k = j.at("k").get<int>();
            for (const auto& ej : j.at("est")) {
                Estimate e;
                e.label = Label::parse(ej.at("label").get<std::string>());
                e.x = parse_vector(ej.at("x"));
                e.extent = parse_matrix(ej.at("chi"));
                e.rate = ej.at("gamma").get<double>();
                if (ej.contains("r")) e.r = ej.at("r").get<double>();
                rec.estimates.push_back(std::move(e));
            }
            out.push_back(std::move(rec));
        } catch (const std::exception& e) {
            throw ParseError(std::string("estimates: ") + e.what(), line_no);
        }
    }
    return out;
}

ScenarioSpec read_scenario_spec_json(std::istream& is) {
    json j = json::parse(is);
    check_keys(j, {"steps", "targets", "motion", "p_d", "clutter", "seed", "d", "process_noise"},
               "scenario spec");
    ScenarioSpec spec;
    spec.steps = j.at("steps").get<int>();
    spec.p_d = j.at("p_d").get<double>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("d")) spec.d = j.at("d").get<int>();
    if (j.contains("process_noise")) spec.process_noise = j.at("process_noise").get<bool>();

    const json& mj = j.at("motion");
    check_keys(mj, {"type", "T", "theta", "sigma", "mu", "tau"}, "motion");
    const auto type = mj.at("type").get<std::string>();
    const double T = mj.at("T").get<double>();
    const double sigma = mj.at("sigma").get<double>();
    const double mu = mj.contains("mu") ? mj.at("mu").get<double>() : 1.25;
    const double tau = mj.contains("tau") ? mj.at("tau").get<double>() : 5.0;
    if (type == "decaying_acceleration")
        spec.motion = MotionModel::decaying_acceleration(T, mj.at("theta").get<double>(), sigma, mu, tau);
    else if (type == "constant_velocity")
        spec.motion = MotionModel::constant_velocity(T, sigma, mu, tau);
    else
        throw std::runtime_error("scenario spec: unknown motion type \"" + type + "\"");

    const json& cj = j.at("clutter");
    check_keys(cj, {"rate", "lo", "hi"}, "clutter");
    spec.clutter.lambda = cj.at("rate").get<double>();
    spec.clutter.lo = parse_vector(cj.at("lo"));
    spec.clutter.hi = parse_vector(cj.at("hi"));

    for (const auto& tj : j.at("targets")) {
        check_keys(tj,
                   {"birth", "death", "x0", "extent", "rate", "waypoints", "forced_miss_steps",
                    "force_detect"},
                   "target");
        TargetSpec t;
        t.birth_step = tj.at("birth").get<int>();
        t.death_step = tj.at("death").get<int>();
        t.extent = parse_matrix(tj.at("extent"));
        t.rate = tj.at("rate").get<double>();
        if (tj.contains("x0")) t.x0 = parse_vector(tj.at("x0"));
        if (tj.contains("waypoints"))
            for (const auto& wj : tj.at("waypoints"))
                t.waypoints.emplace_back(wj[0].get<int>(), parse_vector(wj[1]));
        if (tj.contains("forced_miss_steps"))
            for (const auto& fj : tj.at("forced_miss_steps")) t.forced_miss_steps.push_back(fj.get<int>());
        if (tj.contains("force_detect")) t.force_detect = tj.at("force_detect").get<bool>();
        spec.targets.push_back(std::move(t));
    }
    spec.validate();
    return spec;
}

}  // namespace rfse
