#include "calql/agents/exact_tabular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "calql/nn/features.hpp"

namespace calql::agents {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

ExactDistribution ExactDistribution::from_dataset(const data::OfflineDataset& ds, std::size_t n_states,
                                                  std::size_t n_actions) {
    require(!ds.empty(), ErrorKind::EmptyDataset, "dataset is empty");
    ExactDistribution dist;
    dist.n_states = n_states;
    dist.n_actions = n_actions;
    dist.state_weight.assign(n_states, 0.0);
    dist.pair_weight.assign(n_states * n_actions, 0.0);
    dist.behavior_prob.assign(n_states * n_actions, 0.0);
    dist.in_dataset.assign(n_states, 0);
    const double w = 1.0 / static_cast<double>(ds.size());
    for (const auto& t : ds.transitions) {
        dist.state_weight[static_cast<std::size_t>(t.state)] += w;
        dist.pair_weight[static_cast<std::size_t>(t.state) * n_actions +
                         static_cast<std::size_t>(t.action)] += w;
        dist.in_dataset[static_cast<std::size_t>(t.state)] = 1;
    }
    for (std::size_t s = 0; s < n_states; ++s) {
        if (dist.state_weight[s] <= 0.0) continue;
        for (std::size_t a = 0; a < n_actions; ++a)
            dist.behavior_prob[s * n_actions + a] = dist.pair_weight[s * n_actions + a] /
                                                    dist.state_weight[s];
    }
    return dist;
}

std::vector<double> exact_reference_bounds(const data::ReferenceValues& ref,
                                           const data::OfflineDataset& ds, std::size_t n_states,
                                           std::size_t n_actions) {
    std::vector<double> bounds(n_states * n_actions, kNegInf);
    if (!ref.enabled()) return bounds;

    switch (ref.kind) {
        case data::ReferenceValues::Kind::McReturn: {
            // Per-state V^mu = mean return-to-go over reliable dataset
            // transitions at that state, broadcast across actions.
            std::vector<double> sum(n_states, 0.0);
            std::vector<std::size_t> count(n_states, 0);
            for (std::size_t i = 0; i < ds.size(); ++i) {
                if (ds.mc_unreliable[i]) continue;
                sum[static_cast<std::size_t>(ds.transitions[i].state)] += ds.mc_return[i];
                count[static_cast<std::size_t>(ds.transitions[i].state)] += 1;
            }
            for (std::size_t s = 0; s < n_states; ++s) {
                if (count[s] == 0) continue;
                const double v = sum[s] / static_cast<double>(count[s]);
                for (std::size_t a = 0; a < n_actions; ++a) bounds[s * n_actions + a] = v;
            }
            break;
        }
        case data::ReferenceValues::Kind::TableV:
            for (std::size_t s = 0; s < n_states; ++s) {
                const double v = ref.table[s];
                if (std::isnan(v)) continue;
                for (std::size_t a = 0; a < n_actions; ++a) bounds[s * n_actions + a] = v;
            }
            break;
        case data::ReferenceValues::Kind::TableQ:
            for (std::size_t k = 0; k < bounds.size(); ++k)
                if (!std::isnan(ref.table[k])) bounds[k] = ref.table[k];
            break;
        case data::ReferenceValues::Kind::NetworkQ: {
            std::vector<int> states, actions;
            states.reserve(bounds.size());
            actions.reserve(bounds.size());
            for (std::size_t s = 0; s < n_states; ++s)
                for (std::size_t a = 0; a < n_actions; ++a) {
                    states.push_back(static_cast<int>(s));
                    actions.push_back(static_cast<int>(a));
                }
            nn::Tensor x = nn::one_hot_pair(states, actions, n_states, n_actions);
            nn::Tensor q = ref.net->forward(x);
            for (std::size_t k = 0; k < bounds.size(); ++k) bounds[k] = q.data[k];
            break;
        }
        case data::ReferenceValues::Kind::Disabled: break;
    }
    return bounds;
}

std::vector<double> exact_td_target(const env::TabularMdp& mdp, const std::vector<double>& q_target,
                                    const env::DiscretePolicy& policy) {
    const std::size_t S = mdp.n_states;
    const std::size_t A = mdp.n_actions;
    require(q_target.size() == S * A, ErrorKind::ShapeMismatch, "q table has wrong size");

    std::vector<double> v_bar(S, 0.0);
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a = 0; a < A; ++a) v_bar[s] += policy.prob(s, a) * q_target[s * A + a];

    std::vector<double> target(S * A);
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a = 0; a < A; ++a) {
            double x = mdp.r(s, a);
            if (!mdp.is_terminal(s)) {
                double ev = 0.0;
                for (std::size_t s2 = 0; s2 < S; ++s2) ev += mdp.p(s, a, s2) * v_bar[s2];
                x += mdp.gamma * ev;
            }
            target[s * A + a] = x;
        }
    return target;
}

namespace {

RegularizerValue regularizer_impl(const std::vector<double>& q, const ExactDistribution& dist,
                                  const env::DiscretePolicy& policy, const std::vector<double>* bounds) {
    const std::size_t A = dist.n_actions;
    RegularizerValue out;
    double push_up = 0.0;    // E_{s~D, a~pi} of the (masked) Q
    double data_term = 0.0;  // E_{s,a~D} Q
    double bound_mass = 0.0;
    for (std::size_t s = 0; s < dist.n_states; ++s) {
        const double ws = dist.state_weight[s];
        if (ws <= 0.0) continue;
        for (std::size_t a = 0; a < A; ++a) {
            const double pi = policy.prob(s, a);
            double qv = q[s * A + a];
            if (bounds) {
                const double b = (*bounds)[s * A + a];
                if (b >= qv) {
                    qv = b;
                    bound_mass += ws * pi;
                }
            }
            push_up += ws * pi * qv;
            data_term += dist.pair_weight[s * A + a] * q[s * A + a];
        }
    }
    out.value = push_up - data_term;
    out.action_gap = out.value;
    out.bounding_rate = bound_mass;
    return out;
}

}  // namespace

RegularizerValue exact_cql_regularizer(const std::vector<double>& q, const ExactDistribution& dist,
                                       const env::DiscretePolicy& policy) {
    return regularizer_impl(q, dist, policy, nullptr);
}

RegularizerValue exact_calibrated_regularizer(const std::vector<double>& q, const ExactDistribution& dist,
                                              const env::DiscretePolicy& policy,
                                              const std::vector<double>& bounds) {
    require(bounds.size() == q.size(), ErrorKind::ShapeMismatch, "bounds table has wrong size");
    return regularizer_impl(q, dist, policy, &bounds);
}

ExactCritic ExactCritic::zeros(std::size_t n_states, std::size_t n_actions) {
    ExactCritic c;
    c.n_states = n_states;
    c.n_actions = n_actions;
    c.q.assign(n_states * n_actions, 0.0);
    c.q_target.assign(n_states * n_actions, 0.0);
    return c;
}

ExactUpdateResult exact_critic_update(ExactCritic& critic, const env::TabularMdp& mdp,
                                      const ExactDistribution& dist, const env::DiscretePolicy& policy,
                                      const std::vector<double>& bounds, const ExactUpdateOptions& opts) {
    const std::size_t S = critic.n_states;
    const std::size_t A = critic.n_actions;
    require(mdp.n_states == S && mdp.n_actions == A, ErrorKind::ShapeMismatch, "mdp/critic size mismatch");
    const bool masked = !bounds.empty();
    if (masked)
        require(bounds.size() == S * A, ErrorKind::ShapeMismatch, "bounds table has wrong size");

    const std::vector<double> target = exact_td_target(mdp, critic.q_target, policy);

    ExactUpdateResult result;
    result.reg = masked ? exact_calibrated_regularizer(critic.q, dist, policy, bounds)
                        : exact_cql_regularizer(critic.q, dist, policy);

    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            const std::size_t k = s * A + a;
            double grad = 0.0;
            if (opts.alpha != 0.0 && dist.in_dataset[s]) {
                const bool active = !masked || critic.q[k] >= bounds[k];
                const double pi_term = active ? policy.prob(s, a) : 0.0;
                grad = (pi_term - dist.behavior_prob[k]) /
                       std::max(dist.behavior_prob[k], opts.behavior_floor);
            }
            const double fresh = target[k] - opts.alpha * grad;
            const double updated = (1.0 - opts.eta) * critic.q[k] + opts.eta * fresh;
            result.max_q_change = std::max(result.max_q_change, std::abs(updated - critic.q[k]));
            critic.q[k] = updated;
        }
    }
    for (std::size_t k = 0; k < critic.q.size(); ++k)
        critic.q_target[k] = (1.0 - opts.tau) * critic.q_target[k] + opts.tau * critic.q[k];
    return result;
}

ExactActor ExactActor::uniform(std::size_t n_states, std::size_t n_actions, double target_entropy) {
    ExactActor a;
    a.n_states = n_states;
    a.n_actions = n_actions;
    a.logits.assign(n_states * n_actions, 0.0);
    a.target_entropy = target_entropy;
    return a;
}

env::DiscretePolicy ExactActor::policy() const {
    env::DiscretePolicy pi;
    pi.n_states = n_states;
    pi.n_actions = n_actions;
    pi.probs.assign(n_states * n_actions, 0.0);
    for (std::size_t s = 0; s < n_states; ++s) {
        const double lse = nn::logsumexp(logits.data() + s * n_actions, n_actions);
        for (std::size_t a = 0; a < n_actions; ++a)
            pi.probs[s * n_actions + a] = std::exp(logits[s * n_actions + a] - lse);
    }
    return pi;
}

ExactActorResult exact_actor_update(ExactActor& actor, const std::vector<double>& q,
                                    const ExactDistribution& dist) {
    const std::size_t A = actor.n_actions;
    require(q.size() == actor.n_states * A, ErrorKind::ShapeMismatch, "q table has wrong size");
    const double temp = actor.temperature();
    env::DiscretePolicy pi = actor.policy();

    ExactActorResult result;
    double entropy_mass = 0.0;
    for (std::size_t s = 0; s < actor.n_states; ++s) {
        const double ws = dist.state_weight[s];
        if (ws <= 0.0) continue;
        // Soft objective J_s = sum_a pi(a) (q(a) - temp log pi(a)); the exact
        // logit gradient is pi(a) * (u(a) - sum_b pi(b) u(b)) with
        // u = q - temp log pi.
        double j_s = 0.0;
        double h_s = 0.0;
        std::vector<double> u(A);
        for (std::size_t a = 0; a < A; ++a) {
            const double p = pi.prob(s, a);
            const double logp = std::log(std::max(p, 1e-300));
            u[a] = q[s * A + a] - temp * logp;
            j_s += p * u[a];
            h_s -= p * logp;
        }
        for (std::size_t a = 0; a < A; ++a) {
            const double g = pi.prob(s, a) * (u[a] - j_s);
            actor.logits[s * A + a] += actor.policy_lr * ws * g;
        }
        result.objective += ws * j_s;
        entropy_mass += ws * h_s;
    }
    result.entropy = entropy_mass;

    // Dual ascent on the temperature: entropy above target lowers it.
    actor.log_temperature -= actor.temperature_lr * (result.entropy - actor.target_entropy);
    actor.log_temperature = std::clamp(actor.log_temperature, std::log(1e-8), std::log(1e6));
    return result;
}

}  // namespace calql::agents
