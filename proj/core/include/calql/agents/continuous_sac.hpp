#pragma once

#include "calql/agents/alpha.hpp"
#include "calql/data/reference.hpp"
#include "calql/nn/adam.hpp"

namespace calql::agents {

/// Training batch over continuous actions in [-1,1]^d. Observations are
/// arbitrary feature rows (B x obs_dim).
struct ContinuousBatch {
    nn::Tensor obs;       // B x obs_dim
    nn::Tensor actions;   // B x action_dim
    nn::Tensor next_obs;  // B x obs_dim
    std::vector<double> rewards;
    std::vector<char> done;
    std::vector<double> mc_return;
    std::vector<char> mc_unreliable;

    std::size_t size() const { return obs.rows(); }
};

struct ContinuousSacConfig {
    std::size_t obs_dim = 0;
    std::size_t action_dim = 0;
    std::vector<std::size_t> q_hidden = {64, 64};
    std::vector<std::size_t> pi_hidden = {64, 64};
    nn::Activation activation = nn::Activation::Tanh;
    int n_critics = 2;
    double gamma = 0.99;
    double tau = 5e-3;

    AlphaConfig alpha = AlphaConfig::single(0.0);
    int k = 10;
    bool use_max_backup = false;
    bool backup_entropy = true;

    double q_lr = 3e-4;
    double pi_lr = 3e-4;
    double temperature_lr = 3e-4;
    double init_temperature = 1.0;
    // target entropy defaults to -(action dimension)
};

/// Sampled policy action with its log-density under the squashed Gaussian.
struct ActionSample {
    std::vector<double> action;
    double log_prob = 0.0;
};

/// SAC-style agent with a tanh-transformed Gaussian policy head and the
/// importance-sampled logsumexp conservative estimator: k uniform actions
/// carry a log(0.5^d) density correction, k policy actions their log-prob,
/// the policy branch is masked by max(., reference) and the concatenation is
/// reduced by a row-wise logsumexp before subtracting the dataset Q.
class ContinuousSacAgent {
public:
    ContinuousSacAgent(ContinuousSacConfig cfg, std::uint64_t seed);

    const ContinuousSacConfig& config() const { return cfg_; }

    ActionSample sample_action(const std::vector<double>& obs, Rng& rng) const;

    CriticDiagnostics critic_update(const ContinuousBatch& batch, const data::ReferenceValues& ref,
                                    Phase phase, Rng& rng);
    double actor_update(const ContinuousBatch& batch, Rng& rng);

    double temperature() const { return std::exp(log_temperature_); }

    /// Q(s,a) under the pessimistic head (min over critics).
    std::vector<double> q_values(const nn::Tensor& obs, const nn::Tensor& actions) const;

private:
    struct PolicyHead {
        nn::Tensor mean;     // B x d
        nn::Tensor log_std;  // B x d (soft-bounded)
    };
    PolicyHead head(const nn::Tensor& obs) const;

    ContinuousSacConfig cfg_;
    std::vector<nn::Mlp> critics_;
    std::vector<nn::Mlp> targets_;
    nn::Mlp policy_;  // obs -> (mean, raw log_std)
    std::vector<nn::AdamState> critic_opt_;
    nn::AdamState policy_opt_;
    double log_temperature_ = 0.0;
    double target_entropy_ = 0.0;
};

}  // namespace calql::agents
