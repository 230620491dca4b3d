// tulik: simulate, fit, and evaluate discrete-time event models with
// unit-time uncertainty, on a single stream or on a network.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tulik/tulik.hpp"

namespace {

using nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

[[noreturn]] void fail(int code, const std::string& kind, const std::string& message) {
    const json err{{"error", {{"code", code}, {"kind", kind}, {"message", message}}}};
    std::cerr << err.dump() << "\n";
    std::exit(code);
}

void require_input_file(const std::string& path) {
    if (!std::filesystem::exists(path)) fail(kExitUsage, "usage", "no such file: " + path);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const std::string& preset_name, const std::string& params_path, long num,
                 std::uint64_t seed, const std::string& out, bool no_truth) {
    tulik::TimeGrid grid;
    std::optional<tulik::ModelParams> truth;
    std::vector<tulik::NetworkEdge> edges;
    if (!preset_name.empty()) {
        const tulik::Preset preset = tulik::make_preset(preset_name, seed);
        grid = preset.grid;
        truth = preset.truth;
        edges = preset.edges;
    } else {
        require_input_file(params_path);
        const tulik::StoredParams stored = tulik::read_params(params_path);
        grid = tulik::TimeGrid(stored.h, stored.params.kernel.layout().N,
                               stored.params.kernel.layout().Nprime);
        truth = stored.params;
    }

    tulik::Dataset ds;
    ds.grid = grid;
    ds.V = truth->num_nodes();
    ds.trajectories = tulik::simulate_dataset(*truth, grid, static_cast<std::size_t>(num), seed);
    if (!no_truth) {
        ds.truth = truth;
        ds.edges = edges;
    }
    tulik::write_dataset(out, ds);
    std::cout << "wrote " << ds.trajectories.size() << " trajectories (N=" << grid.N
              << ", N'=" << grid.Nprime << ", V=" << ds.V << ") to " << out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train

int cmd_train(const std::string& data_path, const std::string& method,
              const std::string& config_path, const std::string& out,
              const std::string& report_path, std::optional<std::uint64_t> seed) {
    require_input_file(data_path);
    tulik::TrainConfig cfg;
    if (!config_path.empty()) {
        require_input_file(config_path);
        cfg = tulik::parse_train_config(config_path);
    }
    if (!method.empty()) cfg.method = method == "vi" ? tulik::Method::VI : tulik::Method::GD;
    if (seed) cfg.rng_seed = *seed;

    const tulik::Dataset ds = tulik::read_dataset(data_path);
    for (int u : cfg.init_zero_source_nodes)
        if (u < 0 || u >= ds.V)
            throw tulik::argument_error("config/data mismatch: init_zero_source_nodes entry " +
                                        std::to_string(u) + " outside 0.." +
                                        std::to_string(ds.V - 1));

    const tulik::FitReport report = tulik::train(cfg, ds.trajectories);
    tulik::write_params(out, report.final_params, ds.grid.h);

    if (!report_path.empty()) {
        std::ofstream rs(report_path);
        if (!rs) throw tulik::data_error("cannot open report file: " + report_path);
        for (std::size_t e = 0; e < report.nll_per_epoch.size(); ++e) {
            const json line{{"epoch", e + 1},
                            {"nll", report.nll_per_epoch[e]},
                            {"mu", report.mu_trace[e]},
                            {"violations", report.violation_counts[e]}};
            rs << line.dump() << "\n";
        }
        json final_line{{"final", true},
                        {"method", cfg.method == tulik::Method::VI ? "vi" : "gd"},
                        {"mu", report.final_params.mu},
                        {"mu_update_skips", report.mu_update_skips},
                        {"metadata", report.metadata}};
        if (report.truncation_rank) final_line["truncation_rank"] = *report.truncation_rank;
        rs << final_line.dump() << "\n";
    }
    std::cout << "trained " << (cfg.method == tulik::Method::VI ? "vi" : "gd") << " for "
              << report.nll_per_epoch.size() << " epochs; params written to " << out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// predict

int cmd_predict(const std::string& params_path, const std::string& data_path,
                const std::string& mode, int from, int to, int node, const std::string& out) {
    require_input_file(params_path);
    require_input_file(data_path);
    const tulik::StoredParams stored = tulik::read_params(params_path);
    const tulik::Dataset ds = tulik::read_dataset(data_path);
    const tulik::KernelLayout& kl = stored.params.kernel.layout();
    if (kl.N != ds.grid.N || kl.Nprime != ds.grid.Nprime || kl.V != ds.V || stored.h != ds.grid.h)
        throw tulik::data_error("params and data disagree on the grid or node count");

    std::ofstream os(out);
    if (!os) throw tulik::data_error("cannot open output file: " + out);

    if (mode == "step") {
        os << "trajectory,t,node,probability,note\n";
        for (std::size_t m = 0; m < ds.trajectories.size(); ++m) {
            try {
                const auto probs = tulik::step_probabilities(stored.params, ds.trajectories[m]);
                for (int t = 1; t <= ds.grid.N; ++t)
                    for (int u = 0; u < ds.V; ++u)
                        os << m << ',' << t << ',' << u << ','
                           << format_double(probs[static_cast<std::size_t>(t - 1) * ds.V + u])
                           << ",\n";
            } catch (const tulik::infeasible_error& e) {
                os << m << ",,,," << "infeasible t=" << e.t() << " node=" << e.node() << "\n";
            }
        }
    } else {
        if (to <= from) fail(kExitUsage, "usage", "--to must exceed --from");
        if (node < 0 || node >= ds.V) fail(kExitUsage, "usage", "--node must lie in 0..V-1");
        os << "trajectory,t_last,j_l,j_r,node,probability,no_event_by_from,note\n";
        for (std::size_t m = 0; m < ds.trajectories.size(); ++m) {
            const tulik::Trajectory& traj = ds.trajectories[m];
            int t_last = 0;
            for (int t = 1; t <= std::min(from, ds.grid.N); ++t)
                if (traj.has_event(t)) t_last = t;
            try {
                const double p =
                    ds.V == 1
                        ? tulik::predict_interval_time_only(stored.params, traj, t_last, from, to)
                        : tulik::predict_interval_network(stored.params, traj, t_last, from, to,
                                                          node);
                const double survive =
                    ds.V == 1
                        ? tulik::predict_no_event_time_only(stored.params, traj, t_last, from)
                        : tulik::predict_no_event_network(stored.params, traj, t_last, from);
                os << m << ',' << t_last << ',' << from << ',' << to << ',' << node << ','
                   << format_double(p) << ',' << format_double(survive) << ",\n";
            } catch (const tulik::infeasible_error& e) {
                os << m << ',' << t_last << ',' << from << ',' << to << ',' << node << ",,,"
                   << "infeasible t=" << e.t() << " node=" << e.node() << "\n";
            }
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// eval

std::vector<double> stored_kernel_entries(const tulik::KernelParams& kernel) {
    const tulik::KernelLayout& kl = kernel.layout();
    if (kernel.variant() == tulik::KernelVariant::TimeInvariant) return kernel.values();
    std::vector<double> flat;
    for (int i = -kl.Nprime + 1; i <= kl.N; ++i)
        for (int l = 1; l <= kl.Nprime; ++l) {
            if (!kl.in_parallelogram(i, l)) continue;
            for (int up = 0; up < kl.V; ++up)
                for (int u = 0; u < kl.V; ++u)
                    flat.push_back(kernel.values()[kl.unchecked_index(i, l, up, u)]);
        }
    return flat;
}

json norm_triple(const std::vector<double>& est, const std::vector<double>& truth) {
    return json{{"l1", tulik::relative_error(est, truth, tulik::Norm::L1)},
                {"l2", tulik::relative_error(est, truth, tulik::Norm::L2)},
                {"linf", tulik::relative_error(est, truth, tulik::Norm::Linf)}};
}

json eval_one(const tulik::ModelParams& fitted, const tulik::ModelParams& truth,
              const tulik::Dataset& ds, std::optional<int> classify_node) {
    json out;
    out["mu_re"] = norm_triple(fitted.mu, truth.mu);

    const tulik::TimeGrid& grid = ds.grid;
    if (fitted.kernel.variant() == truth.kernel.variant()) {
        out["kernel_re"] =
            norm_triple(stored_kernel_entries(fitted.kernel), stored_kernel_entries(truth.kernel));
    } else {
        const auto lift = [&](const tulik::KernelParams& k) {
            return k.variant() == tulik::KernelVariant::TimeInvariant
                       ? tulik::KernelParams::lift(k, grid)
                       : k;
        };
        out["kernel_re"] = norm_triple(stored_kernel_entries(lift(fitted.kernel)),
                                       stored_kernel_entries(lift(truth.kernel)));
    }

    std::vector<double> est, ref;
    for (const tulik::Trajectory& traj : ds.trajectories) {
        const auto p = tulik::step_probabilities(fitted, traj);
        const auto q = tulik::step_probabilities(truth, traj);
        est.insert(est.end(), p.begin(), p.end());
        ref.insert(ref.end(), q.begin(), q.end());
    }
    out["prediction_re"] = norm_triple(est, ref);

    if (classify_node) {
        const int u = *classify_node;
        if (u < 0 || u >= ds.V) throw tulik::argument_error("classify node outside 0..V-1");
        // even trajectory indices pick the threshold, odd ones are scored
        std::vector<double> val_p, eval_p;
        std::vector<int> val_y, eval_y;
        for (std::size_t m = 0; m < ds.trajectories.size(); ++m) {
            const tulik::Trajectory& traj = ds.trajectories[m];
            const auto p = tulik::step_probabilities(fitted, traj);
            for (int t = 1; t <= ds.grid.N; ++t) {
                const double prob = p[static_cast<std::size_t>(t - 1) * ds.V + u];
                const int label = traj.y(t, u) ? 1 : 0;
                if (m % 2 == 0) {
                    val_p.push_back(prob);
                    val_y.push_back(label);
                } else {
                    eval_p.push_back(prob);
                    eval_y.push_back(label);
                }
            }
        }
        const tulik::ClassificationMetrics metrics =
            tulik::classification_metrics(val_p, val_y, eval_p, eval_y);
        out["classification"] = json{{"node", u},
                                     {"tpr", metrics.tpr},
                                     {"tnr", metrics.tnr},
                                     {"ba", metrics.ba},
                                     {"threshold", metrics.threshold}};
    }
    return out;
}

json aggregate_runs(const std::vector<json>& runs) {
    json agg;
    for (const char* metric : {"mu_re", "kernel_re", "prediction_re"}) {
        for (const char* norm : {"l1", "l2", "linf"}) {
            double mean = 0.0;
            for (const json& r : runs) mean += r.at(metric).at(norm).get<double>();
            mean /= static_cast<double>(runs.size());
            double var = 0.0;
            for (const json& r : runs) {
                const double d = r.at(metric).at(norm).get<double>() - mean;
                var += d * d;
            }
            const double sd =
                runs.size() > 1 ? std::sqrt(var / static_cast<double>(runs.size() - 1)) : 0.0;
            agg[metric][norm] = json{{"mean", mean}, {"std", sd}};
        }
    }
    return agg;
}

int cmd_eval(const std::vector<std::string>& params_paths, const std::string& data_path,
             const std::string& truth_path, const std::string& out,
             std::optional<int> classify_node) {
    require_input_file(data_path);
    const tulik::Dataset ds = tulik::read_dataset(data_path);

    std::optional<tulik::ModelParams> truth;
    if (!truth_path.empty()) {
        require_input_file(truth_path);
        truth = tulik::read_params(truth_path).params;
    } else if (ds.truth) {
        truth = ds.truth;
    } else {
        fail(kExitData, "data", "no truth parameters: pass --truth or embed them in the dataset");
    }

    json result;
    std::vector<json> runs;
    for (const std::string& path : params_paths) {
        require_input_file(path);
        const tulik::StoredParams stored = tulik::read_params(path);
        json run = eval_one(stored.params, *truth, ds, classify_node);
        run["params"] = path;
        runs.push_back(std::move(run));
    }
    result["runs"] = runs;
    if (runs.size() > 1) result["aggregate"] = aggregate_runs(runs);

    std::ofstream os(out);
    if (!os) throw tulik::data_error("cannot open output file: " + out);
    os << result.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"point processes with event-time uncertainty"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate trajectories from a preset or params");
    std::string sim_preset, sim_params, sim_out;
    long sim_num = 0;
    std::uint64_t sim_seed = 1;
    bool sim_no_truth = false;
    auto* preset_opt = sim->add_option("--preset", sim_preset, "benchmark preset")
                           ->check(CLI::IsMember(tulik::preset_names()));
    auto* params_opt = sim->add_option("--params", sim_params, "truth parameter file");
    preset_opt->excludes(params_opt);
    sim->add_option("--num", sim_num, "number of trajectories")->required();
    sim->add_option("--seed", sim_seed, "master seed");
    sim->add_option("--out", sim_out, "output dataset file")->required();
    sim->add_flag("--no-truth", sim_no_truth, "omit the embedded truth parameters");

    // train
    auto* tr = app.add_subcommand("train", "fit parameters by stochastic VI or GD");
    std::string tr_data, tr_method, tr_config, tr_out, tr_report;
    std::optional<std::uint64_t> tr_seed;
    tr->add_option("--data", tr_data, "training dataset")->required();
    tr->add_option("--method", tr_method, "vi or gd")->check(CLI::IsMember({"vi", "gd"}));
    tr->add_option("--config", tr_config, "key=value training configuration");
    tr->add_option("--out", tr_out, "output parameter file")->required();
    tr->add_option("--report", tr_report, "line-delimited JSON fit report");
    tr->add_option("--seed", tr_seed, "override the configured rng seed");

    // predict
    auto* pr = app.add_subcommand("predict", "event probabilities from fitted parameters");
    std::string pr_params, pr_data, pr_mode = "step", pr_out;
    int pr_from = 0, pr_to = 0, pr_node = 0;
    pr->add_option("--params", pr_params, "parameter file")->required();
    pr->add_option("--data", pr_data, "dataset file")->required();
    pr->add_option("--mode", pr_mode, "step or interval")
        ->check(CLI::IsMember({"step", "interval"}));
    pr->add_option("--from", pr_from, "interval left endpoint j_l (grid index)");
    pr->add_option("--to", pr_to, "interval right endpoint j_r (grid index)");
    pr->add_option("--node", pr_node, "target node for interval mode");
    pr->add_option("--out", pr_out, "output CSV")->required();

    // eval
    auto* ev = app.add_subcommand("eval", "relative errors against the truth");
    std::vector<std::string> ev_params;
    std::string ev_data, ev_truth, ev_out;
    std::optional<int> ev_classify;
    ev->add_option("--params", ev_params, "fitted parameter file(s)")->required();
    ev->add_option("--data", ev_data, "evaluation dataset")->required();
    ev->add_option("--truth", ev_truth, "truth parameter file (default: embedded in data)");
    ev->add_option("--out", ev_out, "output JSON")->required();
    ev->add_option("--classify-node", ev_classify, "report TPR/TNR/BA for this node");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        fail(kExitUsage, "usage", e.what());
    }

    try {
        if (sim->parsed()) {
            if (sim_preset.empty() && sim_params.empty())
                fail(kExitUsage, "usage", "simulate needs --preset or --params");
            if (sim_num < 0) fail(kExitUsage, "usage", "--num must be nonnegative");
            return cmd_simulate(sim_preset, sim_params, sim_num, sim_seed, sim_out, sim_no_truth);
        }
        if (tr->parsed())
            return cmd_train(tr_data, tr_method, tr_config, tr_out, tr_report, tr_seed);
        if (pr->parsed())
            return cmd_predict(pr_params, pr_data, pr_mode, pr_from, pr_to, pr_node, pr_out);
        if (ev->parsed()) return cmd_eval(ev_params, ev_data, ev_truth, ev_out, ev_classify);
    } catch (const tulik::infeasible_error& e) {
        fail(kExitNumeric, "numeric", e.what());
    } catch (const tulik::numeric_error& e) {
        fail(kExitNumeric, "numeric", e.what());
    } catch (const tulik::no_root_error& e) {
        fail(kExitNumeric, "numeric", e.what());
    } catch (const tulik::unbounded_error& e) {
        fail(kExitNumeric, "numeric", e.what());
    } catch (const tulik::error& e) {
        fail(kExitData, "data", e.what());
    }
    return 0;
}
