#include "calql/agents/exact_agent.hpp"

#include <cmath>

namespace calql::agents {

ExactMazeAgent::ExactMazeAgent(const env::TabularMdp& mdp, const data::OfflineDataset& ds,
                               const data::ReferenceValues& ref, const ExactAgentConfig& cfg)
    : mdp_(mdp),
      dist_(ExactDistribution::from_dataset(ds, mdp.n_states, mdp.n_actions)),
      critic_(ExactCritic::zeros(mdp.n_states, mdp.n_actions)),
      actor_(ExactActor::uniform(mdp.n_states, mdp.n_actions,
                                 cfg.target_entropy >= 0.0
                                     ? cfg.target_entropy
                                     : 0.5 * std::log(static_cast<double>(mdp.n_actions)))),
      cfg_(cfg) {
    mdp_.validate();
    if (ref.enabled()) bounds_ = exact_reference_bounds(ref, ds, mdp.n_states, mdp.n_actions);
    actor_.policy_lr = cfg.policy_lr;
    actor_.temperature_lr = cfg.temperature_lr;
}

int ExactMazeAgent::sample_action(int state, Rng& rng) const {
    return actor_.policy().sample(static_cast<std::size_t>(state), rng);
}

int ExactMazeAgent::greedy_action(int state) const {
    return actor_.policy().mode(static_cast<std::size_t>(state));
}

std::vector<double> ExactMazeAgent::action_log_probs(int state) const {
    const std::size_t A = actor_.n_actions;
    const double* row = actor_.logits.data() + static_cast<std::size_t>(state) * A;
    const double lse = nn::logsumexp(row, A);
    std::vector<double> lp(A);
    for (std::size_t a = 0; a < A; ++a) lp[a] = row[a] - lse;
    return lp;
}

CriticDiagnostics ExactMazeAgent::critic_update(const replay::Batch&, const data::ReferenceValues&,
                                                Phase phase, Rng&) {
    ExactUpdateOptions opts;
    opts.alpha = phase_alpha(cfg_.alpha, phase);
    opts.eta = cfg_.eta;
    opts.tau = cfg_.tau;
    ExactUpdateResult res =
        exact_critic_update(critic_, mdp_, dist_, actor_.policy(), bounds_, opts);
    ++updates_;
    CriticDiagnostics diag;
    diag.td_loss = res.max_q_change;
    diag.reg_value = res.reg.value;
    diag.alpha_used = opts.alpha;
    diag.bounding_rate = res.reg.bounding_rate;
    double mean_q = 0.0;
    for (std::size_t k = 0; k < critic_.q.size(); ++k) mean_q += dist_.pair_weight[k] * critic_.q[k];
    diag.mean_q_data = mean_q;
    return diag;
}

double ExactMazeAgent::actor_update(const replay::Batch&) {
    ExactActorResult res = exact_actor_update(actor_, critic_.q, dist_);
    return -res.objective;  // loss convention: lower is better
}

std::vector<double> ExactMazeAgent::q_values(const std::vector<int>& states,
                                             const std::vector<int>& actions) const {
    std::vector<double> out(states.size());
    for (std::size_t i = 0; i < states.size(); ++i)
        out[i] = critic_.q[static_cast<std::size_t>(states[i]) * critic_.n_actions +
                           static_cast<std::size_t>(actions[i])];
    return out;
}

std::vector<double> ExactMazeAgent::q_row(int state) const {
    const std::size_t A = critic_.n_actions;
    const double* row = critic_.q.data() + static_cast<std::size_t>(state) * A;
    return std::vector<double>(row, row + A);
}

double ExactMazeAgent::bounding_rate_diagnostic(const data::OfflineDataset& ds,
                                                const data::ReferenceValues& ref, std::size_t,
                                                std::uint64_t) const {
    if (!ref.enabled() || ds.empty()) return 0.0;
    const std::vector<double> b = exact_reference_bounds(ref, ds, mdp_.n_states, mdp_.n_actions);
    return exact_calibrated_regularizer(critic_.q, dist_, actor_.policy(), b).bounding_rate;
}

double ExactMazeAgent::mean_policy_value_over_dataset() const {
    const env::DiscretePolicy pi = actor_.policy();
    const std::size_t A = critic_.n_actions;
    double out = 0.0;
    for (std::size_t s = 0; s < critic_.n_states; ++s) {
        if (dist_.state_weight[s] <= 0.0) continue;
        double v = 0.0;
        for (std::size_t a = 0; a < A; ++a) v += pi.prob(s, a) * critic_.q[s * A + a];
        out += dist_.state_weight[s] * v;
    }
    return out;
}

}  // namespace calql::agents
