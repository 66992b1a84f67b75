#pragma once

#include <map>
#include <string>
#include <vector>

#include "calql/agents/alpha.hpp"

namespace calql::harness {

enum class AgentKind { Sac, SacOffline, Cql, CalQl };
enum class QModel { Table, Mlp, Exact };
enum class ReferenceMode { Disabled, Mc, Fitted };

/// Flat key=value experiment description with dotted section prefixes.
/// Unknown keys are hard errors.
struct ExperimentConfig {
    // env.*
    std::string env_kind = "maze";
    std::string env_file;
    double slip_prob = 0.0;
    int max_episode_len = 0;  // 0 -> maze default
    int goal_radius = 0;

    // data.*
    std::string data_path;      // load a CSV
    std::string data_generate;  // "scripted" | "random" (recipe alternative)
    int data_n_trajectories = 25;
    std::uint64_t data_seed = 1;
    double data_slip_prob = -1.0;  // <0 -> use env.slip_prob for generation
    std::string data_composition;  // default: narrow (scripted) / diverse (random)

    // agent.*
    AgentKind agent_kind = AgentKind::Cql;
    QModel q_model = QModel::Table;
    std::vector<std::size_t> hidden = {64, 64};
    int n_critics = 0;  // 0 -> 1 for table, 2 for mlp
    agents::AlphaConfig alpha = agents::AlphaConfig::single(0.0);
    bool alpha_is_phased = false;
    bool dual_alpha = false;
    double target_action_gap = 0.0;
    double dual_alpha_lr = 1e-2;
    int k = 10;
    bool max_backup = false;
    bool backup_entropy = true;
    double gamma = 0.99;
    double tau = 5e-3;
    double exact_eta = 0.3;  // damping for q_model=exact
    double q_lr = 3e-4;
    double pi_lr = 3e-4;
    double temperature_lr = 3e-4;
    double init_temperature = 1.0;
    double target_entropy = -1.0;  // negative -> module default

    // reference.*
    ReferenceMode reference_mode = ReferenceMode::Disabled;
    std::string reference_family = "tabular";  // fitted: tabular | network
    std::string reference_fit = "regression";  // fitted: regression | sarsa

    // run.*
    long offline_steps = 0;
    long online_env_steps = 0;
    int utd = 1;
    double mixing_ratio = 0.5;
    std::size_t batch_size = 64;
    std::size_t online_capacity = 100000;
    long eval_every = 500;
    int eval_episodes = 10;
    bool eval_greedy = true;
    long train_log_every = 100;
    /// "episode": completed online episodes get their return-to-go attached
    /// (matching the practical algorithm's replay annotations); "none" keeps
    /// every online row mc_unreliable.
    std::string online_mc = "episode";
    std::size_t avg_q_sample = 256;
    std::vector<std::uint64_t> seeds;  // optional default list for sweeps

    /// Canonical serialization (sorted key=value lines); the config hash in
    /// run logs is the FNV-1a of this text.
    std::string canonical() const;
    std::string hash() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// "a..b" inclusive seed ranges and comma lists ("0..4", "1,2,9").
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

const char* agent_kind_name(AgentKind kind);

}  // namespace calql::harness
