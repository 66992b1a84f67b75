// Experiment driver: offline pre-training + online fine-tuning runs, dataset
// generation, plot-data aggregation and the tabular FQI regret experiments.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "calql/env/generators.hpp"
#include "calql/harness/plots.hpp"
#include "calql/harness/runner.hpp"
#include "calql/theory/fqi.hpp"

namespace fs = std::filesystem;
using namespace calql;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

bool is_config_error(const Error& e) {
    switch (e.kind) {
        case ErrorKind::ParseError:
        case ErrorKind::InvalidArgument:
        case ErrorKind::Unsolvable:
            return true;
        default:
            return false;
    }
}

std::string run_log_name(const harness::ExperimentConfig& cfg, std::uint64_t seed) {
    return cfg.hash() + "_seed" + std::to_string(seed) + ".jsonl";
}

int do_run(const std::string& config_path, std::uint64_t seed, const std::string& out_dir) {
    harness::ExperimentConfig cfg = harness::parse_config_file(config_path);
    fs::create_directories(out_dir);
    harness::RunLog log = harness::run_experiment(cfg, seed);
    const std::string path = (fs::path(out_dir) / run_log_name(cfg, seed)).string();
    log.write(path);
    std::cout << "wrote " << path << " (hash " << std::hex << log.content_hash() << std::dec << ")\n";
    return kExitOk;
}

int do_sweep(const std::string& config_path, const std::string& seeds_text, const std::string& out_dir) {
    harness::ExperimentConfig cfg = harness::parse_config_file(config_path);
    std::vector<std::uint64_t> seeds =
        seeds_text.empty() ? cfg.seeds : harness::parse_seed_list(seeds_text);
    require(!seeds.empty(), ErrorKind::ParseError,
            "no seeds: pass --seeds or set run.seeds in the config");
    fs::create_directories(out_dir);
    for (std::uint64_t seed : seeds) {
        harness::RunLog log = harness::run_experiment(cfg, seed);
        const std::string path = (fs::path(out_dir) / run_log_name(cfg, seed)).string();
        log.write(path);
        std::cout << "wrote " << path << "\n";
    }
    return kExitOk;
}

int do_gen_data(const std::string& env_file, const std::string& policy_kind, int n,
                const std::string& out_csv, std::uint64_t seed, double gamma, double slip,
                bool positive_segments) {
    env::GridMaze maze = env::GridMaze::from_file(env_file);
    maze.slip_prob = slip;
    maze.validate();
    env::GridMazeEnv e{maze};
    env::DiscretePolicy policy = policy_kind == "scripted"
                                     ? env::scripted_controller(maze)
                                     : env::DiscretePolicy::uniform(maze.n_cells(),
                                                                    env::GridMaze::kNumActions);
    data::OfflineDataset ds = data::generate_dataset(
        e, policy, n, seed, gamma, policy_kind == "scripted" ? "narrow" : "diverse");
    if (positive_segments) {
        // Re-cut every trajectory at its first positive reward.
        std::vector<data::Trajectory> cut;
        data::Trajectory current;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            current.steps.push_back(ds.transitions[i]);
            const bool last_of_traj = i + 1 == ds.size() || ds.traj_id[i + 1] != ds.traj_id[i];
            if (last_of_traj) {
                current.behavior_tag = ds.composition_tag;
                cut.push_back(data::truncate_positive_segments(current));
                current = data::Trajectory{};
            }
        }
        ds = data::OfflineDataset::from_trajectories(cut, gamma, ds.composition_tag);
    }
    data::write_csv(ds, out_csv);
    std::cout << "wrote " << out_csv << " (" << ds.size() << " transitions, tag "
              << ds.composition_tag << ")\n";
    return kExitOk;
}

env::TabularMdp parse_mdp_spec(const std::string& spec) {
    const std::size_t colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    std::map<std::string, long> kv;
    if (colon != std::string::npos) {
        std::istringstream ss(spec.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::size_t eq = item.find('=');
            require(eq != std::string::npos, ErrorKind::ParseError, "mdp spec expects k=v pairs");
            kv[item.substr(0, eq)] = std::stol(item.substr(eq + 1));
        }
    }
    auto get = [&](const std::string& key, long fallback) {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    };
    if (kind == "random") {
        return env::make_random_finite_mdp(static_cast<std::size_t>(get("states", 4)),
                                           static_cast<std::size_t>(get("actions", 2)),
                                           static_cast<int>(get("horizon", 3)),
                                           static_cast<std::uint64_t>(get("seed", 1)));
    }
    if (kind == "narrow-path") {
        return env::make_narrow_path_mdp(static_cast<std::uint64_t>(get("seed", 1)));
    }
    fail(ErrorKind::ParseError, "unknown mdp spec kind: " + kind + " (random | narrow-path)");
}

int do_theory(const std::string& mdp_spec, const std::string& calibrate, int iterations, int m_on,
              int m_off, std::uint64_t seed, double ref_epsilon, const std::string& out) {
    require(calibrate == "on" || calibrate == "off", ErrorKind::ParseError,
            "--calibrate must be on or off");
    env::TabularMdp mdp = parse_mdp_spec(mdp_spec);

    // Reference: epsilon-softened optimal policy, its exact Q as tables.
    const env::FiniteValues opt = env::finite_optimal_values(mdp);
    std::vector<int> greedy(mdp.n_states, 0);
    for (std::size_t s = 0; s < mdp.n_states; ++s)
        for (std::size_t a = 1; a < mdp.n_actions; ++a)
            if (opt.q[0][s * mdp.n_actions + a] > opt.q[0][s * mdp.n_actions + greedy[s]])
                greedy[s] = static_cast<int>(a);
    env::DiscretePolicy reference = env::DiscretePolicy::deterministic(greedy, mdp.n_actions);
    for (std::size_t i = 0; i < reference.probs.size(); ++i)
        reference.probs[i] = (1.0 - ref_epsilon) * reference.probs[i] +
                             ref_epsilon / static_cast<double>(mdp.n_actions);

    theory::StepDataset offline = theory::collect_offline_step_data(mdp, reference, m_off, seed);
    theory::StepTables q_ref = theory::reference_q_tables(mdp, reference);

    theory::FqiOptions opts;
    opts.iterations = iterations;
    opts.m_on = m_on;
    opts.calibrate = calibrate == "on";
    opts.seed = seed;
    theory::FqiRun run = theory::run_calibrated_fqi(mdp, offline, q_ref, opts);
    std::vector<theory::RegretRow> rows = theory::regret_decomposition(mdp, run);

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out.empty()) {
        file.open(out);
        require(file.good(), ErrorKind::IoError, "cannot open for writing: " + out);
        os = &file;
    }
    char buf[64];
    *os << "k,term_i,term_ii,regret,cum_regret,calibrate_flag,seed\n";
    for (const theory::RegretRow& r : rows) {
        *os << r.k << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", r.term_i);
        *os << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", r.term_ii);
        *os << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", r.regret);
        *os << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", r.cum_regret);
        *os << buf << ',' << (opts.calibrate ? 1 : 0) << ',' << seed << "\n";
    }
    if (!out.empty()) std::cout << "wrote " << out << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Offline-to-online RL laboratory (conservative and calibrated Q-learning)"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "runs", seeds_text;
    std::uint64_t seed = 0;

    CLI::App* run = app.add_subcommand("run", "One (config, seed) experiment");
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("--seed", seed, "root seed")->required();
    run->add_option("--out", out_dir, "output directory for the run log");

    CLI::App* sweep = app.add_subcommand("sweep", "Run a config across a seed list");
    sweep->add_option("--config", config_path, "experiment config file")->required();
    sweep->add_option("--seeds", seeds_text, "seed list, e.g. 0..4 or 1,5,9");
    sweep->add_option("--out", out_dir, "output directory for run logs");

    std::string env_file, policy_kind = "scripted", out_csv = "dataset.csv";
    int n_traj = 25;
    double gamma = 0.99, slip = 0.0;
    bool positive_segments = false;
    CLI::App* gen = app.add_subcommand("gen-data", "Generate an offline dataset CSV from a maze");
    gen->add_option("--env", env_file, "maze layout file")->required();
    gen->add_option("--policy", policy_kind, "scripted | random")
        ->check(CLI::IsMember({"scripted", "random"}));
    gen->add_option("--n", n_traj, "number of trajectories");
    gen->add_option("--out", out_csv, "output CSV path");
    gen->add_option("--seed", seed, "generation seed");
    gen->add_option("--gamma", gamma, "discount used for return-to-go");
    gen->add_option("--slip", slip, "action slip probability");
    gen->add_flag("--positive-segments", positive_segments,
                  "cut each trajectory at its first positive reward");

    std::string runs_dir, plot_out = "plots";
    CLI::App* plot = app.add_subcommand("plot-data", "Aggregate run logs into per-metric CSVs");
    plot->add_option("--runs", runs_dir, "directory of .jsonl run logs / .theory.csv tables")
        ->required();
    plot->add_option("--out", plot_out, "output directory");

    std::string mdp_spec, calibrate = "off", theory_out;
    int iterations = 50, m_on = 1, m_off = 8;
    double ref_epsilon = 0.05;
    CLI::App* theory_cmd = app.add_subcommand("theory", "Calibrated FQI regret experiment");
    theory_cmd->add_option("--mdp", mdp_spec, "random:states=..,actions=..,horizon=..,seed=.. | narrow-path:seed=..")
        ->required();
    theory_cmd->add_option("--calibrate", calibrate, "on | off")->required();
    theory_cmd->add_option("--K", iterations, "FQI iterations");
    theory_cmd->add_option("--m-on", m_on, "online rollouts per iteration");
    theory_cmd->add_option("--m-off", m_off, "offline rollouts");
    theory_cmd->add_option("--seed", seed, "experiment seed");
    theory_cmd->add_option("--ref-epsilon", ref_epsilon, "reference policy softening");
    theory_cmd->add_option("--out", theory_out, "output CSV (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*run) return do_run(config_path, seed, out_dir);
        if (*sweep) return do_sweep(config_path, seeds_text, out_dir);
        if (*gen) return do_gen_data(env_file, policy_kind, n_traj, out_csv, seed, gamma, slip,
                                     positive_segments);
        if (*plot) {
            harness::PlotEmitReport report = harness::emit_plot_data(runs_dir, plot_out);
            for (const std::string& w : report.warnings) std::cerr << "warning: " << w << "\n";
            for (const std::string& p : report.written) std::cout << "wrote " << p << "\n";
            return kExitOk;
        }
        if (*theory_cmd)
            return do_theory(mdp_spec, calibrate, iterations, m_on, m_off, seed, ref_epsilon,
                             theory_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_config_error(e) ? kExitConfig : kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
