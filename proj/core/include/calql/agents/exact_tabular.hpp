#pragma once

#include <optional>

#include "calql/agents/alpha.hpp"
#include "calql/data/reference.hpp"
#include "calql/env/exact_values.hpp"

namespace calql::agents {

/// Empirical dataset distribution for the exact-tabular path: state weights
/// d(s), pair weights d(s,a) and the implied behavior policy, all enumerated
/// from an offline dataset (no sampling).
struct ExactDistribution {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    std::vector<double> state_weight;    // d(s), sums to 1
    std::vector<double> pair_weight;     // d(s,a), sums to 1
    std::vector<double> behavior_prob;   // pi_beta(a|s) on dataset states, 0 elsewhere
    std::vector<char> in_dataset;        // 1 where d(s) > 0

    static ExactDistribution from_dataset(const data::OfflineDataset& ds, std::size_t n_states,
                                          std::size_t n_actions);
};

/// Per-(s,a) calibration bounds for the exact path (-inf disables masking of
/// an entry). McReturn references become per-state bounds equal to the mean
/// return-to-go observed at that state.
std::vector<double> exact_reference_bounds(const data::ReferenceValues& ref,
                                           const data::OfflineDataset& ds, std::size_t n_states,
                                           std::size_t n_actions);

/// Exact Bellman backup of a target table under a policy:
/// B(s,a) = r(s,a) + gamma * (non-terminal) * sum_s' P(s'|s,a) sum_a' pi Q(s',a').
std::vector<double> exact_td_target(const env::TabularMdp& mdp, const std::vector<double>& q_target,
                                    const env::DiscretePolicy& policy);

struct RegularizerValue {
    double value = 0.0;          // E_{s~D,a~pi}[.] - E_{s,a~D}[Q]
    double action_gap = 0.0;     // the same quantity; what the dual variant thresholds
    double bounding_rate = 0.0;  // pi-mass fraction of dataset-state entries where the bound was the max
};

/// Plain conservative regularizer, expectations enumerated exactly.
RegularizerValue exact_cql_regularizer(const std::vector<double>& q, const ExactDistribution& dist,
                                       const env::DiscretePolicy& policy);

/// Calibrated form: policy-action Q-values are replaced by max(Q, bound)
/// inside the first expectation. With all bounds at -inf this equals the
/// plain regularizer bit for bit.
RegularizerValue exact_calibrated_regularizer(const std::vector<double>& q, const ExactDistribution& dist,
                                              const env::DiscretePolicy& policy,
                                              const std::vector<double>& bounds);

/// Exact-mode critic: one Q table plus a delayed copy.
struct ExactCritic {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    std::vector<double> q;
    std::vector<double> q_target;

    static ExactCritic zeros(std::size_t n_states, std::size_t n_actions);
};

struct ExactUpdateOptions {
    double alpha = 0.0;
    double eta = 1.0;  // damping of Q <- (1-eta) Q + eta (target - alpha * reg-gradient)
    double tau = 1.0;  // polyak rate for the delayed copy
    /// Behavior-probability floor in the regularizer gradient. Actions the
    /// dataset never takes at a visited state are pushed down as if the
    /// behavior policy gave them this much mass, which keeps the fixed point
    /// finite while preserving the strong out-of-distribution penalty.
    double behavior_floor = 0.05;
};

struct ExactUpdateResult {
    double max_q_change = 0.0;
    RegularizerValue reg;
};

/// One exact damped fixed-point update. The TD target is the exact backup at
/// every pair; at dataset states the regularizer contributes its per-pair
/// gradient normalized by the pair's data weight,
///   g(s,a) = (pi(a|s) * mask(s,a) - pi_beta(a|s)) / max(pi_beta(a|s), floor),
/// whose fixed point is the conservative consistency equation
/// Q = B - alpha (pi/pi_beta - 1) on supported pairs. Pass empty bounds to
/// run the uncalibrated (CQL) form.
ExactUpdateResult exact_critic_update(ExactCritic& critic, const env::TabularMdp& mdp,
                                      const ExactDistribution& dist, const env::DiscretePolicy& policy,
                                      const std::vector<double>& bounds, const ExactUpdateOptions& opts);

/// Tabular softmax actor with exact-gradient updates and dual-ascent
/// temperature tuning toward a target entropy.
struct ExactActor {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    std::vector<double> logits;
    double log_temperature = 0.0;
    double target_entropy = 0.0;
    double policy_lr = 0.1;
    double temperature_lr = 1e-2;

    static ExactActor uniform(std::size_t n_states, std::size_t n_actions, double target_entropy);

    env::DiscretePolicy policy() const;
    double temperature() const { return std::exp(log_temperature); }
};

struct ExactActorResult {
    double objective = 0.0;  // E_{s~D, a~pi}[Q - temp * log pi]
    double entropy = 0.0;    // mean policy entropy over dataset states
};

/// One exact ascent step on E_{s~D}[ E_{a~pi}(Q - temp log pi) ] followed by
/// the temperature update (entropy above target lowers the temperature).
ExactActorResult exact_actor_update(ExactActor& actor, const std::vector<double>& q,
                                    const ExactDistribution& dist);

}  // namespace calql::agents
