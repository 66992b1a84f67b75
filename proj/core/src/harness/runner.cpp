#include "calql/harness/runner.hpp"

#include <cmath>

#include "calql/agents/discrete_sac.hpp"
#include "calql/agents/exact_agent.hpp"
#include "calql/metrics/metrics.hpp"

namespace calql::harness {

namespace {

data::OfflineDataset build_dataset(const ExperimentConfig& cfg, const env::GridMaze& maze) {
    if (!cfg.data_path.empty())
        return data::load_csv(cfg.data_path, cfg.gamma, cfg.data_composition);
    env::GridMaze data_maze = maze;
    if (cfg.data_slip_prob >= 0.0) data_maze.slip_prob = cfg.data_slip_prob;
    env::GridMazeEnv data_env{data_maze};
    const env::DiscretePolicy policy =
        cfg.data_generate == "scripted"
            ? env::scripted_controller(data_maze)
            : env::DiscretePolicy::uniform(maze.n_cells(), env::GridMaze::kNumActions);
    return data::generate_dataset(data_env, policy, cfg.data_n_trajectories, cfg.data_seed, cfg.gamma,
                                  cfg.data_composition);
}

data::ReferenceValues build_reference(const ExperimentConfig& cfg, const data::OfflineDataset& ds,
                                      std::size_t n_states, std::size_t n_actions) {
    switch (cfg.reference_mode) {
        case ReferenceMode::Disabled: return data::ReferenceValues::disabled();
        case ReferenceMode::Mc: return data::ReferenceValues::mc_return();
        case ReferenceMode::Fitted: {
            data::FitOptions opts;
            opts.seed = cfg.data_seed;
            const auto family = cfg.reference_family == "network" ? data::ReferenceFamily::Network
                                                                  : data::ReferenceFamily::Tabular;
            const auto method = cfg.reference_fit == "sarsa" ? data::FitMethod::Sarsa
                                                             : data::FitMethod::McRegression;
            return data::fit_reference_q(ds, n_states, n_actions, family, method, opts).values;
        }
    }
    return data::ReferenceValues::disabled();
}

agents::DiscreteSacConfig build_agent_config(const ExperimentConfig& cfg, std::size_t n_states,
                                             std::size_t n_actions) {
    agents::DiscreteSacConfig a;
    a.n_states = n_states;
    a.n_actions = n_actions;
    a.q_hidden = cfg.q_model == QModel::Table ? std::vector<std::size_t>{} : cfg.hidden;
    a.pi_hidden = a.q_hidden;
    a.n_critics = cfg.n_critics > 0 ? cfg.n_critics : (cfg.q_model == QModel::Table ? 1 : 2);
    a.gamma = cfg.gamma;
    a.tau = cfg.tau;
    const bool conservative = cfg.agent_kind == AgentKind::Cql || cfg.agent_kind == AgentKind::CalQl;
    a.alpha = conservative ? cfg.alpha : agents::AlphaConfig::single(0.0);
    a.dual_alpha = conservative && cfg.dual_alpha;
    a.target_action_gap = cfg.target_action_gap;
    a.dual_alpha_lr = cfg.dual_alpha_lr;
    a.k = cfg.k;
    a.use_max_backup = cfg.max_backup;
    a.backup_entropy = cfg.backup_entropy;
    a.q_lr = cfg.q_lr;
    a.pi_lr = cfg.pi_lr;
    a.temperature_lr = cfg.temperature_lr;
    a.init_temperature = cfg.init_temperature;
    a.target_entropy = cfg.target_entropy;
    return a;
}

}  // namespace

ExperimentRunner::ExperimentRunner(ExperimentConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)),
      seed_(seed),
      maze_(env::GridMaze::from_file(cfg_.env_file)),
      sampling_rng_(named_stream(seed, "sampling")),
      log_(cfg_.hash(), seed, kCodeVersion) {
    maze_.slip_prob = cfg_.slip_prob;
    if (cfg_.max_episode_len > 0) maze_.max_episode_len = cfg_.max_episode_len;
    maze_.goal_radius = cfg_.goal_radius;
    maze_.validate();
    train_env_ = std::make_unique<env::GridMazeEnv>(maze_);
    eval_env_ = std::make_unique<env::GridMazeEnv>(maze_);

    dataset_ = build_dataset(cfg_, maze_);
    diag_ref_ = build_reference(cfg_, dataset_, maze_.n_cells(), env::GridMaze::kNumActions);
    train_ref_ = cfg_.agent_kind == AgentKind::CalQl ? diag_ref_ : data::ReferenceValues::disabled();
    if (cfg_.q_model == QModel::Exact) {
        const bool conservative =
            cfg_.agent_kind == AgentKind::Cql || cfg_.agent_kind == AgentKind::CalQl;
        agents::ExactAgentConfig ecfg;
        ecfg.eta = cfg_.exact_eta;
        ecfg.tau = cfg_.tau;
        ecfg.alpha = conservative ? cfg_.alpha : agents::AlphaConfig::single(0.0);
        ecfg.policy_lr = cfg_.pi_lr;
        ecfg.temperature_lr = cfg_.temperature_lr;
        ecfg.target_entropy = cfg_.target_entropy;
        agent_ = std::make_unique<agents::ExactMazeAgent>(maze_.to_mdp(cfg_.gamma), dataset_,
                                                          train_ref_, ecfg);
    } else {
        agent_ = std::make_unique<agents::DiscreteSacAgent>(
            build_agent_config(cfg_, maze_.n_cells(), env::GridMaze::kNumActions), seed);
    }
    buffer_ = std::make_unique<replay::MixedReplayBuffer>(&dataset_, cfg_.online_capacity,
                                                          cfg_.mixing_ratio);
}

double ExperimentRunner::evaluate_score() {
    int successes = 0;
    Rng eval_rng = named_stream(derive_seed(seed_, "eval", static_cast<std::uint64_t>(eval_counter_)),
                                "eval-actions");
    for (int ep = 0; ep < cfg_.eval_episodes; ++ep) {
        env::EpisodeStep st = eval_env_->reset(derive_seed(
            seed_, "eval-episode",
            static_cast<std::uint64_t>(eval_counter_) * 1000003ULL + static_cast<std::uint64_t>(ep)));
        bool success = false;
        while (!eval_env_->episode_over()) {
            const int s = eval_env_->current_state();
            const int a = cfg_.eval_greedy ? agent_->greedy_action(s)
                                           : agent_->sample_action(s, eval_rng);
            st = eval_env_->step(a);
            if (st.done && st.reward > 0.0) success = true;
        }
        successes += success ? 1 : 0;
    }
    return metrics::normalized_score(successes, cfg_.eval_episodes);
}

void ExperimentRunner::record_eval(long step, agents::Phase phase) {
    RunRecord rec;
    rec.step = step;
    rec.phase = phase;
    rec.normalized_score = evaluate_score();
    rec.avg_dataset_q = metrics::avg_dataset_q(
        [this](const std::vector<int>& s, const std::vector<int>& a) { return agent_->q_values(s, a); },
        dataset_, cfg_.avg_q_sample, derive_seed(seed_, "avg-q", static_cast<std::uint64_t>(eval_counter_)));
    rec.bounding_rate = agent_->bounding_rate_diagnostic(
        dataset_, diag_ref_, cfg_.avg_q_sample,
        derive_seed(seed_, "bounding", static_cast<std::uint64_t>(eval_counter_)));
    const int pi = phase == agents::Phase::Offline ? 0 : 1;
    regret_sum_[pi] += 1.0 - rec.normalized_score;
    regret_count_[pi] += 1;
    rec.cum_regret_metric = regret_sum_[pi] / static_cast<double>(regret_count_[pi]);
    log_.add_eval(rec);
    ++eval_counter_;
}

void ExperimentRunner::run_offline_phase() {
    record_eval(0, agents::Phase::Offline);
    if (cfg_.offline_steps == 0) return;
    long updates = 0;
    for (long step = 1; step <= cfg_.offline_steps; ++step) {
        replay::Batch batch = buffer_->sample(cfg_.batch_size, sampling_rng_, 1.0);
        last_critic_ = agent_->critic_update(batch, train_ref_, agents::Phase::Offline, sampling_rng_);
        last_actor_loss_ = agent_->actor_update(batch);
        ++updates;
        if (updates % cfg_.train_log_every == 0)
            log_.add_train(step, agents::Phase::Offline, last_critic_.td_loss, last_actor_loss_,
                           last_critic_.reg_value, last_critic_.alpha_used, agent_->temperature());
        if (step % cfg_.eval_every == 0 || step == cfg_.offline_steps)
            record_eval(step, agents::Phase::Offline);
    }
}

void ExperimentRunner::run_online_phase() {
    if (cfg_.online_env_steps == 0) return;
    train_env_->reset(derive_seed(seed_, "env", static_cast<std::uint64_t>(episode_counter_++)));
    long updates = 0;
    std::vector<replay::MixedReplayBuffer::Slot> episode_slots;
    std::vector<double> episode_rewards;
    for (long step = 1; step <= cfg_.online_env_steps; ++step) {
        const int s = train_env_->current_state();
        const int a = agent_->sample_action(s, sampling_rng_);
        const env::EpisodeStep st = train_env_->step(a);
        episode_slots.push_back(buffer_->push_online(st));
        episode_rewards.push_back(st.reward);
        if (train_env_->episode_over()) {
            // Terminal episodes get their return-to-go attached; truncated
            // ones stay mc_unreliable (the tail value is unknown).
            if (st.done && cfg_.online_mc == "episode") {
                double g = 0.0;
                for (std::size_t i = episode_slots.size(); i-- > 0;) {
                    g = episode_rewards[i] + cfg_.gamma * g;
                    buffer_->annotate(episode_slots[i], g);
                }
            }
            episode_slots.clear();
            episode_rewards.clear();
            train_env_->reset(derive_seed(seed_, "env", static_cast<std::uint64_t>(episode_counter_++)));
        }

        // Cold-start fallback: with an empty online store the batch is pure
        // offline (cannot happen after the first push above, kept as a guard).
        const double m = buffer_->online_size() == 0 && cfg_.mixing_ratio >= 0.0 ? 1.0
                                                                                 : cfg_.mixing_ratio;
        for (int u = 0; u < cfg_.utd; ++u) {
            replay::Batch batch = buffer_->sample(cfg_.batch_size, sampling_rng_, m);
            last_critic_ = agent_->critic_update(batch, train_ref_, agents::Phase::Online, sampling_rng_);
            last_actor_loss_ = agent_->actor_update(batch);
            ++updates;
            if (updates % cfg_.train_log_every == 0)
                log_.add_train(step, agents::Phase::Online, last_critic_.td_loss, last_actor_loss_,
                               last_critic_.reg_value, last_critic_.alpha_used, agent_->temperature());
        }
        if (step % cfg_.eval_every == 0 || step == cfg_.online_env_steps)
            record_eval(step, agents::Phase::Online);
    }
}

RunLog run_experiment(const ExperimentConfig& cfg, std::uint64_t seed) {
    ExperimentRunner runner(cfg, seed);
    runner.run_offline_phase();
    runner.run_online_phase();
    return runner.log();
}

}  // namespace calql::harness
