#include "rfse/filter_config.hpp"

#include "rfse/simulation.hpp"

#include <nlohmann/json.hpp>

#include <set>
#include <sstream>

namespace rfse {

namespace {

using json = nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& context) {
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw std::runtime_error("config: unknown key \"" + key + "\" in " + context);
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
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<int>(i), static_cast<int>(c)) = j[i][c].get<double>();
    return m;
}

}  // namespace

LmbFilterConfig default_filter_config() { return scenario_filter_config(1); }

LmbFilterConfig scenario_filter_config(int id) {
    const ScenarioSpec spec = builtin_scenario(id);

    LmbFilterConfig cfg;
    cfg.glmb.p_s = 0.99;
    cfg.glmb.p_d = spec.p_d;
    cfg.glmb.motion = spec.motion;
    cfg.glmb.clutter = spec.clutter;
    cfg.glmb.d = spec.d;
    cfg.glmb.n_predict_components = 300;
    cfg.glmb.n_update_components = 300;
    cfg.glmb.max_components = 300;

    cfg.glmb.birth.alpha0 = 10.0;
    cfg.glmb.birth.beta0 = 1.0;
    cfg.glmb.birth.v0 = 10.0;
    cfg.glmb.birth.V0 = 100.0 * Eigen::MatrixXd::Identity(2, 2);
    cfg.glmb.birth.P0 = Eigen::Vector3d(10.0 * 10.0, 2.5 * 2.5, 1.0).asDiagonal();

    // One birth site per distinct target start position.
    const int s = spec.motion.order();
    std::vector<Eigen::VectorXd> positions;
    for (const auto& t : spec.targets) {
        Eigen::VectorXd pos = t.waypoints.empty()
                                  ? Eigen::VectorXd(t.x0.head(spec.d))
                                  : t.waypoints.front().second;
        bool dup = false;
        for (const auto& p : positions)
            if ((p - pos).norm() < 1.0) dup = true;
        if (!dup) positions.push_back(std::move(pos));
    }
    for (const auto& pos : positions) {
        BirthSite site;
        site.mean = Eigen::VectorXd::Zero(s * spec.d);
        site.mean.head(spec.d) = pos;
        site.r = 0.03;
        cfg.glmb.birth.sites.push_back(std::move(site));
    }
    return cfg;
}

void apply_config_json(LmbFilterConfig& cfg, const std::string& text) {
    std::istringstream is(text);
    apply_config_json(cfg, is);
}

void apply_config_json(LmbFilterConfig& cfg, std::istream& is) {
    json j = json::parse(is);
    check_keys(j,
               {"p_s", "p_d", "literal_misdetect", "n_predict_components", "n_update_components",
                "max_components", "partition", "clutter", "motion", "birth", "reduction", "d",
                "exhaustive", "gate_quantile", "deletion_threshold", "report_threshold",
                "report_hysteresis", "subset_cap", "adaptive_birth"},
               "filter config");

    auto& g = cfg.glmb;
    if (j.contains("p_s")) g.p_s = j["p_s"].get<double>();
    if (j.contains("p_d")) g.p_d = j["p_d"].get<double>();
    if (j.contains("literal_misdetect")) g.literal_misdetect = j["literal_misdetect"].get<bool>();
    if (j.contains("n_predict_components")) g.n_predict_components = j["n_predict_components"].get<int>();
    if (j.contains("n_update_components")) g.n_update_components = j["n_update_components"].get<int>();
    if (j.contains("max_components")) g.max_components = j["max_components"].get<int>();
    if (j.contains("d")) g.d = j["d"].get<int>();
    if (j.contains("exhaustive")) g.exhaustive = j["exhaustive"].get<bool>();

    if (j.contains("partition")) {
        const json& pj = j["partition"];
        check_keys(pj, {"n_thresholds", "em_refine", "max_partitions"}, "partition");
        if (pj.contains("n_thresholds")) g.partition.n_thresholds = pj["n_thresholds"].get<int>();
        if (pj.contains("em_refine")) g.partition.em_refine = pj["em_refine"].get<bool>();
        if (pj.contains("max_partitions")) g.partition.max_partitions = pj["max_partitions"].get<int>();
    }
    if (j.contains("clutter")) {
        const json& cj = j["clutter"];
        check_keys(cj, {"rate", "lo", "hi"}, "clutter");
        if (cj.contains("rate")) g.clutter.lambda = cj["rate"].get<double>();
        if (cj.contains("lo")) g.clutter.lo = parse_vector(cj["lo"]);
        if (cj.contains("hi")) g.clutter.hi = parse_vector(cj["hi"]);
    }
    if (j.contains("motion")) {
        const json& mj = j["motion"];
        check_keys(mj, {"type", "T", "theta", "sigma", "mu", "tau"}, "motion");
        const auto type = mj.at("type").get<std::string>();
        const double T = mj.at("T").get<double>();
        const double sigma = mj.at("sigma").get<double>();
        const double mu = mj.contains("mu") ? mj["mu"].get<double>() : g.motion.mu;
        const double tau = mj.contains("tau") ? mj["tau"].get<double>() : g.motion.tau;
        if (type == "decaying_acceleration")
            g.motion = MotionModel::decaying_acceleration(T, mj.at("theta").get<double>(), sigma, mu, tau);
        else if (type == "constant_velocity")
            g.motion = MotionModel::constant_velocity(T, sigma, mu, tau);
        else
            throw std::runtime_error("config: unknown motion type \"" + type + "\"");
    }
    if (j.contains("birth")) {
        const json& bj = j["birth"];
        check_keys(bj, {"alpha", "beta", "v", "V", "P", "sites"}, "birth");
        if (bj.contains("alpha")) g.birth.alpha0 = bj["alpha"].get<double>();
        if (bj.contains("beta")) g.birth.beta0 = bj["beta"].get<double>();
        if (bj.contains("v")) g.birth.v0 = bj["v"].get<double>();
        if (bj.contains("V")) g.birth.V0 = parse_matrix(bj["V"]);
        if (bj.contains("P")) g.birth.P0 = parse_matrix(bj["P"]);
        if (bj.contains("sites")) {
            g.birth.sites.clear();
            for (const auto& sj : bj["sites"]) {
                check_keys(sj, {"mean", "r"}, "birth site");
                BirthSite site;
                site.mean = parse_vector(sj.at("mean"));
                site.r = sj.at("r").get<double>();
                g.birth.sites.push_back(std::move(site));
            }
        }
    }
    if (j.contains("reduction")) {
        const json& rj = j["reduction"];
        check_keys(rj, {"prune_threshold", "merge_gate", "max_components"}, "reduction");
        if (rj.contains("prune_threshold")) g.reduction.prune_threshold = rj["prune_threshold"].get<double>();
        if (rj.contains("merge_gate")) g.reduction.merge_gate = rj["merge_gate"].get<double>();
        if (rj.contains("max_components")) g.reduction.max_components = rj["max_components"].get<int>();
    }

    if (j.contains("gate_quantile")) cfg.gate_quantile = j["gate_quantile"].get<double>();
    if (j.contains("deletion_threshold")) cfg.deletion_threshold = j["deletion_threshold"].get<double>();
    if (j.contains("report_threshold")) cfg.report_threshold = j["report_threshold"].get<double>();
    if (j.contains("report_hysteresis")) cfg.report_hysteresis = j["report_hysteresis"].get<double>();
    if (j.contains("subset_cap")) cfg.subset_cap = j["subset_cap"].get<int>();

    if (j.contains("adaptive_birth")) {
        const json& aj = j["adaptive_birth"];
        check_keys(aj, {"enabled", "r_max", "distance_threshold", "min_cluster"}, "adaptive_birth");
        if (aj.contains("enabled")) cfg.adaptive_birth = aj["enabled"].get<bool>();
        if (aj.contains("r_max")) cfg.adaptive_r_max = aj["r_max"].get<double>();
        if (aj.contains("distance_threshold"))
            cfg.adaptive_distance_threshold = aj["distance_threshold"].get<double>();
        if (aj.contains("min_cluster")) cfg.adaptive_min_cluster = aj["min_cluster"].get<int>();
    }
}

}  // namespace rfse
