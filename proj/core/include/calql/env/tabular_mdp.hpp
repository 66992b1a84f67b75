#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "calql/common.hpp"
#include "calql/rng.hpp"

namespace calql::env {

/// Exact finite MDP (S, A, P, r, rho, gamma), optionally finite-horizon.
/// Tables are immutable after construction and safely shareable.
///
/// A state flagged terminal ends the episode the step after it is acted in:
/// its action yields r(s,a) once and nothing afterwards, so Q(s,a) = r(s,a).
struct TabularMdp {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    std::vector<double> transition;    // P(s'|s,a), layout [(s*A + a)*S + s']
    std::vector<double> reward;        // mean reward r(s,a) in [0,1], layout [s*A + a]
    std::vector<double> initial_dist;  // rho over states
    double gamma = 0.99;               // used in infinite-horizon mode
    std::optional<int> horizon;        // finite-horizon mode when set
    std::vector<char> terminal;        // optional; empty means no terminal states

    double p(std::size_t s, std::size_t a, std::size_t s2) const {
        return transition[(s * n_actions + a) * n_states + s2];
    }
    double r(std::size_t s, std::size_t a) const { return reward[s * n_actions + a]; }
    bool is_terminal(std::size_t s) const { return !terminal.empty() && terminal[s] != 0; }

    /// Checks row-stochasticity of P and rho (1e-9), reward range, gamma range.
    void validate() const;

    int sample_initial(Rng& rng) const;
    int sample_next(std::size_t s, std::size_t a, Rng& rng) const;
};

/// Row-stochastic policy table pi(a|s) over a tabular state space.
struct DiscretePolicy {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    std::vector<double> probs;  // [s*A + a]

    static DiscretePolicy uniform(std::size_t n_states, std::size_t n_actions);
    static DiscretePolicy deterministic(std::vector<int> action_per_state, std::size_t n_actions);

    double prob(std::size_t s, std::size_t a) const { return probs[s * n_actions + a]; }
    int sample(std::size_t s, Rng& rng) const;
    /// Lowest-index action with maximal probability.
    int mode(std::size_t s) const;
    void validate() const;
};

}  // namespace calql::env
