// Batch front-end for the extended-target tracking library: scenario
// simulation, filter runs, evaluation and Monte Carlo sweeps.
//
// Exit codes: 0 success, 2 bad arguments/spec/config, 3 I/O failure,
// 4 malformed input line, 5 series mismatch.

#include "rfse/filter_config.hpp"
#include "rfse/glmb_filter.hpp"
#include "rfse/lmb_filter.hpp"
#include "rfse/metrics.hpp"
#include "rfse/simulation.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

namespace {

constexpr int kExitBadInput = 2;
constexpr int kExitIo = 3;
constexpr int kExitMalformedLine = 4;
constexpr int kExitSeriesMismatch = 5;

struct CliError {
    int code;
    std::string message;
};

rfse::ScenarioSpec load_scenario(const std::string& arg) {
    if (arg == "1" || arg == "2" || arg == "3") return rfse::builtin_scenario(std::stoi(arg));
    std::ifstream in(arg);
    if (!in) throw CliError{kExitIo, "cannot open scenario spec: " + arg};
    try {
        return rfse::read_scenario_spec_json(in);
    } catch (const std::exception& e) {
        throw CliError{kExitBadInput, std::string("bad scenario spec: ") + e.what()};
    }
}

rfse::LmbFilterConfig load_filter_config(int scenario_defaults, const std::string& config_path,
                                         const std::string& filter) {
    rfse::LmbFilterConfig cfg = rfse::scenario_filter_config(scenario_defaults);
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw CliError{kExitIo, "cannot open config: " + config_path};
        try {
            rfse::apply_config_json(cfg, in);
        } catch (const std::exception& e) {
            throw CliError{kExitBadInput, std::string("bad config: ") + e.what()};
        }
    }
    if (filter == "lmb-ab") {
        cfg.adaptive_birth = true;
        cfg.glmb.birth.sites.clear();
    }
    return cfg;
}

struct RunSeries {
    std::vector<double> card_err;
    std::vector<double> ospa;
    std::vector<double> ospa_ext;
    // full per-step existence per label (LMB family only)
    std::vector<std::map<rfse::Label, double>> existence;
};

std::vector<rfse::EstimateRecord> run_filter(const std::string& filter,
                                             const rfse::ScenarioLog& log,
                                             const rfse::LmbFilterConfig& cfg,
                                             rfse::TrackRunSummary* summary,
                                             RunSeries* series) {
    std::vector<rfse::EstimateRecord> records;
    records.reserve(log.steps.size());
    std::vector<double> step_seconds;
    step_seconds.reserve(log.steps.size());

    const bool is_glmb = filter == "glmb";
    rfse::GlmbFilterState gstate = rfse::initial_glmb_state();
    rfse::LmbFilterState lstate;

    for (const auto& rec : log.steps) {
        const auto t0 = std::chrono::steady_clock::now();
        rfse::EstimateRecord est;
        est.k = rec.k;
        est.estimates = is_glmb ? rfse::step_glmb(gstate, rec.measurements, cfg.glmb)
                                : rfse::step_lmb(lstate, rec.measurements, cfg);
        const auto t1 = std::chrono::steady_clock::now();
        step_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
        if (series && !is_glmb) {
            std::map<rfse::Label, double> r_by_label;
            for (const auto& t : lstate.density.tracks) r_by_label[t.label] = t.r;
            series->existence.push_back(std::move(r_by_label));
        }
        records.push_back(std::move(est));
    }

    if (summary) {
        summary->steps = static_cast<int>(log.steps.size());
        double total = 0.0;
        for (double s : step_seconds) total += s;
        summary->wall_seconds_total = total;
        const double mean = step_seconds.empty() ? 0.0 : total / step_seconds.size();
        summary->wall_seconds_per_step_mean = mean;
        double sq = 0.0;
        for (double s : step_seconds) sq += (s - mean) * (s - mean);
        summary->wall_seconds_per_step_std =
            step_seconds.size() > 1 ? std::sqrt(sq / (step_seconds.size() - 1.0)) : 0.0;
    }
    return records;
}

struct EvalOptions {
    double ospa_c = 100.0;
    double ospa_p = 1.0;
    bool extended = false;
};

void evaluate_step(const rfse::StepRecord& truth, const std::vector<rfse::Estimate>& est,
                   const EvalOptions& opt, RunSeries& out) {
    const auto n_truth = truth.truth.size();
    const auto n_est = est.size();
    out.card_err.push_back(std::abs(static_cast<double>(n_est) - static_cast<double>(n_truth)));

    const int d = truth.truth.empty()
                      ? (est.empty() ? 2 : static_cast<int>(est.front().extent.rows()))
                      : static_cast<int>(truth.truth.front().extent.rows());
    std::vector<Eigen::VectorXd> tx, ex;
    for (const auto& t : truth.truth) tx.push_back(t.x.head(d));
    for (const auto& e : est) ex.push_back(e.x.head(d));
    const rfse::BaseDistance<Eigen::VectorXd> euclid = [](const Eigen::VectorXd& a,
                                                          const Eigen::VectorXd& b) {
        return (a - b).norm();
    };
    out.ospa.push_back(rfse::ospa(ex, tx, opt.ospa_c, opt.ospa_p, euclid));

    if (opt.extended) {
        std::vector<rfse::ExtendedState> ts, es;
        for (const auto& t : truth.truth) ts.push_back({t.x.head(d), t.extent, t.rate});
        for (const auto& e : est) es.push_back({e.x.head(d), e.extent, e.rate});
        const rfse::BaseDistance<rfse::ExtendedState> base =
            [](const rfse::ExtendedState& a, const rfse::ExtendedState& b) {
                return rfse::extended_base_distance(a, b);
            };
        out.ospa_ext.push_back(rfse::ospa(es, ts, opt.ospa_c, opt.ospa_p, base));
    }
}

void write_metric_csv(const std::string& path, const std::vector<RunSeries>& runs,
                      const std::vector<int>& ks, bool extended) {
    std::vector<std::vector<double>> card, osp, ext;
    for (const auto& r : runs) {
        card.push_back(r.card_err);
        osp.push_back(r.ospa);
        if (extended) ext.push_back(r.ospa_ext);
    }
    const rfse::SeriesStats cs = rfse::aggregate(card);
    const rfse::SeriesStats os = rfse::aggregate(osp);

    std::vector<std::string> header = {"k", "card_err_mean", "card_err_std", "ospa_mean",
                                       "ospa_std"};
    std::vector<std::vector<double>> cols;
    std::vector<double> kcol(ks.begin(), ks.end());
    cols.push_back(kcol);
    cols.push_back(cs.mean);
    cols.push_back(cs.stddev);
    cols.push_back(os.mean);
    cols.push_back(os.stddev);
    if (extended) {
        const rfse::SeriesStats xs = rfse::aggregate(ext);
        header.push_back("ospa_ext_mean");
        header.push_back("ospa_ext_std");
        cols.push_back(xs.mean);
        cols.push_back(xs.stddev);
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw CliError{kExitIo, "cannot open output: " + path};
    rfse::write_csv(out, header, cols);
}

int cmd_simulate(const std::string& scenario, std::uint64_t seed, bool seed_given,
                 const std::string& out_path) {
    rfse::ScenarioSpec spec = load_scenario(scenario);
    if (seed_given) spec.seed = seed;
    const rfse::ScenarioLog log = rfse::generate(spec);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw CliError{kExitIo, "cannot open output: " + out_path};
    rfse::write_scenario_log(out, log);
    if (!out) throw CliError{kExitIo, "write failed: " + out_path};
    return 0;
}

int cmd_track(const std::string& filter, const std::string& in_path, const std::string& config,
              int scenario_defaults, const std::string& out_path) {
    const rfse::LmbFilterConfig cfg = load_filter_config(scenario_defaults, config, filter);

    std::ifstream in(in_path);
    if (!in) throw CliError{kExitIo, "cannot open input: " + in_path};
    rfse::ScenarioLog log;
    try {
        log = rfse::read_scenario_log(in);
    } catch (const rfse::ParseError& e) {
        throw CliError{kExitMalformedLine,
                       "malformed input line " + std::to_string(e.line) + ": " + e.what()};
    }

    rfse::TrackRunSummary summary;
    const auto records = run_filter(filter, log, cfg, &summary, nullptr);

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw CliError{kExitIo, "cannot open output: " + out_path};
    const bool with_r = filter != "glmb";
    for (const auto& rec : records) rfse::write_estimate_record(out, rec, with_r);
    rfse::write_run_summary(out, summary);
    return 0;
}

int cmd_eval(const std::string& truth_path, const std::string& est_path, const EvalOptions& opt,
             const std::string& out_path) {
    std::ifstream tin(truth_path);
    if (!tin) throw CliError{kExitIo, "cannot open truth: " + truth_path};
    std::ifstream ein(est_path);
    if (!ein) throw CliError{kExitIo, "cannot open estimates: " + est_path};

    rfse::ScenarioLog truth;
    std::vector<rfse::EstimateRecord> est;
    try {
        truth = rfse::read_scenario_log(tin);
        est = rfse::read_estimate_records(ein);
    } catch (const rfse::ParseError& e) {
        throw CliError{kExitMalformedLine,
                       "malformed input line " + std::to_string(e.line) + ": " + e.what()};
    }

    if (truth.steps.size() != est.size())
        throw CliError{kExitSeriesMismatch, "truth and estimate step counts differ"};
    for (std::size_t i = 0; i < est.size(); ++i)
        if (truth.steps[i].k != est[i].k)
            throw CliError{kExitSeriesMismatch,
                           "step index mismatch at record " + std::to_string(i + 1)};

    RunSeries series;
    std::vector<int> ks;
    for (std::size_t i = 0; i < est.size(); ++i) {
        evaluate_step(truth.steps[i], est[i].estimates, opt, series);
        ks.push_back(truth.steps[i].k);
    }
    write_metric_csv(out_path, {series}, ks, opt.extended);
    return 0;
}

int cmd_mc(int runs, const std::string& scenario, const std::string& filter,
           std::uint64_t seed_base, int jobs, const std::string& config, const EvalOptions& opt,
           const std::string& out_path) {
    if (const char* env = std::getenv("RFS_EXTENT_THREADS")) jobs = std::max(1, std::atoi(env));
    jobs = std::max(1, jobs);

    const rfse::ScenarioSpec base_spec = load_scenario(scenario);
    const bool builtin = scenario == "1" || scenario == "2" || scenario == "3";
    const rfse::LmbFilterConfig cfg =
        load_filter_config(builtin ? std::stoi(scenario) : 1, config, filter);
    const bool want_rseries = scenario == "3" && filter != "glmb";

    std::vector<RunSeries> results(runs);
    std::vector<std::string> errors(runs);
    std::atomic<int> next{0};

    auto worker = [&] {
        while (true) {
            const int r = next.fetch_add(1);
            if (r >= runs) return;
            try {
                rfse::ScenarioSpec spec = base_spec;
                spec.seed = seed_base + static_cast<std::uint64_t>(r);
                const rfse::ScenarioLog log = rfse::generate(spec);
                RunSeries series;
                const auto records =
                    run_filter(filter, log, cfg, nullptr, want_rseries ? &series : nullptr);
                for (std::size_t i = 0; i < records.size(); ++i)
                    evaluate_step(log.steps[i], records[i].estimates, opt, series);
                results[r] = std::move(series);
            } catch (const std::exception& e) {
                errors[r] = "run " + std::to_string(r) + ": " + e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < std::min(jobs, runs); ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (!e.empty()) throw CliError{kExitBadInput, e};

    std::vector<int> ks;
    for (int k = 1; k <= base_spec.steps; ++k) ks.push_back(k);
    write_metric_csv(out_path, results, ks, opt.extended);

    if (want_rseries) {
        // Per-step per-label mean existence across runs, for weight plots.
        std::map<std::pair<int, rfse::Label>, std::pair<double, int>> acc;
        for (const auto& run : results)
            for (std::size_t i = 0; i < run.existence.size(); ++i)
                for (const auto& [label, r] : run.existence[i]) {
                    auto& slot = acc[{static_cast<int>(i) + 1, label}];
                    slot.first += r;
                    slot.second += 1;
                }
        const std::string rpath = out_path + ".rseries.csv";
        std::ofstream out(rpath, std::ios::binary);
        if (!out) throw CliError{kExitIo, "cannot open output: " + rpath};
        out << "k,label,r_mean,runs\n";
        char buf[40];
        for (const auto& [key, slot] : acc) {
            std::snprintf(buf, sizeof buf, "%.17g", slot.first / slot.second);
            out << key.first << ',' << key.second.str() << ',' << buf << ',' << slot.second
                << '\n';
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extended-target multi-object tracking harness"};
    app.require_subcommand(1);

    std::string scenario = "1", in_path, out_path, truth_path, est_path, config_path;
    std::string filter = "lmb";
    std::uint64_t seed = 0, seed_base = 0;
    int runs = 1, jobs = 1, scenario_defaults = 1;
    EvalOptions eval_opt;

    auto* sim = app.add_subcommand("simulate", "Generate a scenario log (JSON Lines)");
    sim->add_option("--scenario", scenario, "1|2|3 or path to a scenario spec JSON")->required();
    auto* seed_opt = sim->add_option("--seed", seed, "RNG seed (overrides spec seed)");
    sim->add_option("--out", out_path, "Output path")->required();

    auto* trk = app.add_subcommand("track", "Run a filter over a scenario log");
    trk->add_option("--filter", filter, "glmb|lmb|lmb-ab")
        ->required()
        ->check(CLI::IsMember({"glmb", "lmb", "lmb-ab"}));
    trk->add_option("--in", in_path, "Scenario log path")->required();
    trk->add_option("--config", config_path, "Filter config JSON");
    trk->add_option("--scenario-defaults", scenario_defaults, "Base config on scenario 1|2|3")
        ->check(CLI::IsMember({1, 2, 3}));
    trk->add_option("--out", out_path, "Output path")->required();

    auto* ev = app.add_subcommand("eval", "Evaluate estimates against truth");
    ev->add_option("--truth", truth_path, "Scenario log path")->required();
    ev->add_option("--est", est_path, "Estimates path")->required();
    ev->add_option("--ospa-c", eval_opt.ospa_c, "OSPA cutoff");
    ev->add_option("--ospa-p", eval_opt.ospa_p, "OSPA order");
    ev->add_flag("--extended", eval_opt.extended, "Also report rate/extent-aware OSPA");
    ev->add_option("--out", out_path, "Output CSV path")->required();

    auto* mc = app.add_subcommand("mc", "Monte Carlo sweep: simulate + track + eval");
    mc->add_option("--runs", runs, "Number of runs")->required()->check(CLI::PositiveNumber);
    mc->add_option("--scenario", scenario, "1|2|3 or path to a scenario spec JSON")->required();
    mc->add_option("--filter", filter, "glmb|lmb|lmb-ab")
        ->required()
        ->check(CLI::IsMember({"glmb", "lmb", "lmb-ab"}));
    mc->add_option("--seed-base", seed_base, "First seed; run r uses seed-base + r")->required();
    mc->add_option("--jobs", jobs, "Worker threads (RFS_EXTENT_THREADS overrides)");
    mc->add_option("--config", config_path, "Filter config JSON");
    mc->add_option("--ospa-c", eval_opt.ospa_c, "OSPA cutoff");
    mc->add_option("--ospa-p", eval_opt.ospa_p, "OSPA order");
    mc->add_flag("--extended", eval_opt.extended, "Also report rate/extent-aware OSPA");
    mc->add_option("--out", out_path, "Output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? kExitBadInput : 0;
    }

    try {
        if (sim->parsed()) return cmd_simulate(scenario, seed, seed_opt->count() > 0, out_path);
        if (trk->parsed()) return cmd_track(filter, in_path, config_path, scenario_defaults, out_path);
        if (ev->parsed()) return cmd_eval(truth_path, est_path, eval_opt, out_path);
        if (mc->parsed())
            return cmd_mc(runs, scenario, filter, seed_base, jobs, config_path, eval_opt, out_path);
    } catch (const CliError& e) {
        std::cerr << "rfse: " << e.message << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "rfse: " << e.what() << "\n";
        return kExitBadInput;
    }
    return 0;
}
