#pragma once

#include <memory>

#include "calql/agents/agent_iface.hpp"
#include "calql/env/grid_maze.hpp"
#include "calql/harness/config.hpp"
#include "calql/harness/runlog.hpp"

namespace calql::harness {

inline constexpr const char* kCodeVersion = "0.1.0";

/// Owns one (config, seed) run: environment instances, dataset, reference,
/// agent, replay buffer and the log. Offline pre-training samples with m=1;
/// online fine-tuning acts, pushes per step, and performs `utd` updates per
/// environment step with the configured mixing ratio.
class ExperimentRunner {
public:
    ExperimentRunner(ExperimentConfig cfg, std::uint64_t seed);

    void run_offline_phase();
    void run_online_phase();

    const RunLog& log() const { return log_; }
    agents::DiscreteAgent& agent() { return *agent_; }
    const data::OfflineDataset& dataset() const { return dataset_; }
    const data::ReferenceValues& training_reference() const { return train_ref_; }
    const env::GridMaze& maze() const { return maze_; }
    const ExperimentConfig& config() const { return cfg_; }

    /// One evaluation pass with the current (frozen) policy.
    double evaluate_score();

private:
    void record_eval(long step, agents::Phase phase);

    ExperimentConfig cfg_;
    std::uint64_t seed_;
    env::GridMaze maze_;
    std::unique_ptr<env::GridMazeEnv> train_env_;
    std::unique_ptr<env::GridMazeEnv> eval_env_;
    data::OfflineDataset dataset_;
    data::ReferenceValues train_ref_;
    data::ReferenceValues diag_ref_;
    std::unique_ptr<agents::DiscreteAgent> agent_;
    std::unique_ptr<replay::MixedReplayBuffer> buffer_;
    Rng sampling_rng_;
    RunLog log_;
    long eval_counter_ = 0;
    long episode_counter_ = 0;
    double regret_sum_[2] = {0.0, 0.0};
    long regret_count_[2] = {0, 0};
    agents::CriticDiagnostics last_critic_;
    double last_actor_loss_ = 0.0;
};

/// Offline phase followed by online fine-tuning; returns the completed log.
RunLog run_experiment(const ExperimentConfig& cfg, std::uint64_t seed);

}  // namespace calql::harness
