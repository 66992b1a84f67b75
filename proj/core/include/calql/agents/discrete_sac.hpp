#pragma once

#include <optional>

#include "calql/agents/agent_iface.hpp"
#include "calql/agents/alpha.hpp"
#include "calql/data/reference.hpp"
#include "calql/nn/adam.hpp"
#include "calql/nn/features.hpp"
#include "calql/replay/mixed_buffer.hpp"

namespace calql::agents {

/// Gradient-trained agent over one-hot tabular states and discrete actions.
/// Covers the SAC baseline (alpha = 0), CQL (alpha > 0, reference disabled)
/// and the calibrated variant (alpha > 0 with a reference) behind one update
/// path. Empty hidden widths make the Q-function and policy exact linear
/// tables over the one-hot encoding.
struct DiscreteSacConfig {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    std::vector<std::size_t> q_hidden;   // empty -> linear (table)
    std::vector<std::size_t> pi_hidden;  // empty -> linear (table)
    nn::Activation activation = nn::Activation::Tanh;
    int n_critics = 1;  // spec: one table in tabular mode, two nets otherwise
    double gamma = 0.99;
    double tau = 5e-3;

    AlphaConfig alpha = AlphaConfig::single(0.0);
    bool dual_alpha = false;
    double target_action_gap = 0.0;
    double dual_alpha_lr = 1e-2;

    int k = 10;                  // sampled actions for the regularizer and max-backup
    bool use_max_backup = false;
    bool backup_entropy = true;

    double q_lr = 3e-4;
    double pi_lr = 3e-4;
    double temperature_lr = 3e-4;
    double init_temperature = 1.0;
    double target_entropy = -1.0;  // < 0 magnitude ignored; see resolve_target_entropy
};

/// Discrete default: half the maximum entropy, ln(n_actions)/2. Continuous
/// agents use -(action dimension) instead.
double resolve_target_entropy(double configured, std::size_t n_actions);

class DiscreteSacAgent final : public DiscreteAgent {
public:
    DiscreteSacAgent(DiscreteSacConfig cfg, std::uint64_t seed);

    const DiscreteSacConfig& config() const { return cfg_; }

    int sample_action(int state, Rng& rng) const override;
    int greedy_action(int state) const override;
    std::vector<double> action_log_probs(int state) const override;

    /// One gradient step on alpha * regularizer + 0.5 * TD mean-squared
    /// error for every critic, followed by a polyak target update. The
    /// reference masks the policy-action branch of the regularizer.
    CriticDiagnostics critic_update(const replay::Batch& batch, const data::ReferenceValues& ref,
                                    Phase phase, Rng& rng) override;

    /// One ascent step on E[Q_min - temperature * log pi] (exact expectation
    /// over the discrete actions), then the temperature dual step.
    double actor_update(const replay::Batch& batch) override;

    double temperature() const override { return std::exp(log_temperature_); }
    double alpha_for(Phase phase) const;
    double entropy_estimate() const { return last_entropy_; }

    /// Q(s,a) under the pessimistic head (min over critics).
    std::vector<double> q_values(const std::vector<int>& states, const std::vector<int>& actions) const override;
    /// Full Q(s,.) row (min over critics).
    std::vector<double> q_row(int state) const override;

    /// Fresh bounding-rate measurement on a seeded dataset subsample: the
    /// fraction of sampled policy-action evaluations whose reference bound
    /// exceeds the importance-corrected Q value. Zero when ref is disabled.
    double bounding_rate_diagnostic(const data::OfflineDataset& ds, const data::ReferenceValues& ref,
                                    std::size_t sample_size, std::uint64_t seed) const override;

    void save(const std::string& prefix) const;
    void load(const std::string& prefix);

    long updates_done() const override { return updates_; }

private:
    DiscreteSacConfig cfg_;
    std::vector<nn::Mlp> critics_;
    std::vector<nn::Mlp> targets_;
    nn::Mlp policy_;
    std::vector<nn::AdamState> critic_opt_;
    nn::AdamState policy_opt_;
    double log_temperature_ = 0.0;
    double target_entropy_ = 0.0;
    DualAlphaState dual_;
    double last_entropy_ = 0.0;
    long updates_ = 0;
};

}  // namespace calql::agents
