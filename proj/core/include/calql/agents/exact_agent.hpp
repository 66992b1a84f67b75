#pragma once

#include "calql/agents/agent_iface.hpp"
#include "calql/agents/exact_tabular.hpp"

namespace calql::agents {

struct ExactAgentConfig {
    double eta = 0.3;  // damping of the fixed-point update
    double tau = 0.3;  // target polyak rate
    AlphaConfig alpha = AlphaConfig::single(0.0);
    double policy_lr = 0.1;
    double temperature_lr = 1e-2;
    double target_entropy = -1.0;  // negative -> ln(n_actions)/2
};

/// Offline oracle agent: enumerated expectations against the exact MDP
/// tables, damped conservative fixed-point updates and an exact softmax
/// actor. Batches are ignored (expectations run over the full dataset
/// distribution), which restricts this agent to the offline phase.
class ExactMazeAgent final : public DiscreteAgent {
public:
    ExactMazeAgent(const env::TabularMdp& mdp, const data::OfflineDataset& ds,
                   const data::ReferenceValues& ref, const ExactAgentConfig& cfg);

    int sample_action(int state, Rng& rng) const override;
    int greedy_action(int state) const override;
    std::vector<double> action_log_probs(int state) const override;

    CriticDiagnostics critic_update(const replay::Batch& batch, const data::ReferenceValues& ref,
                                    Phase phase, Rng& rng) override;
    double actor_update(const replay::Batch& batch) override;

    std::vector<double> q_values(const std::vector<int>& states,
                                 const std::vector<int>& actions) const override;
    std::vector<double> q_row(int state) const override;
    double bounding_rate_diagnostic(const data::OfflineDataset& ds, const data::ReferenceValues& ref,
                                    std::size_t sample_size, std::uint64_t seed) const override;
    double temperature() const override { return actor_.temperature(); }
    long updates_done() const override { return updates_; }

    /// Mean over dataset states (transition-weighted) of E_{a~pi} Q(s,a).
    double mean_policy_value_over_dataset() const;

private:
    env::TabularMdp mdp_;
    ExactDistribution dist_;
    std::vector<double> bounds_;  // empty when the reference is disabled
    ExactCritic critic_;
    ExactActor actor_;
    ExactAgentConfig cfg_;
    long updates_ = 0;
};

}  // namespace calql::agents
