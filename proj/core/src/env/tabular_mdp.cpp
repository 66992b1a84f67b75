#include "calql/env/tabular_mdp.hpp"

#include <cmath>

namespace calql::env {

void TabularMdp::validate() const {
    require(n_states > 0 && n_actions > 0, ErrorKind::InvalidArgument, "mdp needs states and actions");
    require(transition.size() == n_states * n_actions * n_states, ErrorKind::ShapeMismatch,
            "transition tensor has wrong size");
    require(reward.size() == n_states * n_actions, ErrorKind::ShapeMismatch, "reward table has wrong size");
    require(initial_dist.size() == n_states, ErrorKind::ShapeMismatch, "initial distribution has wrong size");
    require(terminal.empty() || terminal.size() == n_states, ErrorKind::ShapeMismatch,
            "terminal mask has wrong size");
    if (horizon) {
        require(*horizon >= 1, ErrorKind::InvalidArgument, "horizon must be >= 1");
    } else {
        require(gamma > 0.0 && gamma < 1.0, ErrorKind::InvalidArgument,
                "infinite-horizon mode needs gamma in (0,1)");
    }
    for (std::size_t s = 0; s < n_states; ++s) {
        for (std::size_t a = 0; a < n_actions; ++a) {
            double row = 0.0;
            for (std::size_t s2 = 0; s2 < n_states; ++s2) {
                const double v = p(s, a, s2);
                require(v >= 0.0, ErrorKind::InvalidArgument, "negative transition probability");
                row += v;
            }
            require(std::abs(row - 1.0) <= 1e-9, ErrorKind::InvalidArgument,
                    "transition row does not sum to 1");
            const double rv = r(s, a);
            require(rv >= 0.0 && rv <= 1.0, ErrorKind::InvalidArgument, "reward outside [0,1]");
        }
    }
    double rho = 0.0;
    for (double v : initial_dist) {
        require(v >= 0.0, ErrorKind::InvalidArgument, "negative initial probability");
        rho += v;
    }
    require(std::abs(rho - 1.0) <= 1e-9, ErrorKind::InvalidArgument, "initial distribution does not sum to 1");
}

int TabularMdp::sample_initial(Rng& rng) const {
    double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t s = 0; s < n_states; ++s) {
        acc += initial_dist[s];
        if (u < acc) return static_cast<int>(s);
    }
    return static_cast<int>(n_states) - 1;
}

int TabularMdp::sample_next(std::size_t s, std::size_t a, Rng& rng) const {
    const double* row = transition.data() + (s * n_actions + a) * n_states;
    double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t s2 = 0; s2 < n_states; ++s2) {
        acc += row[s2];
        if (u < acc) return static_cast<int>(s2);
    }
    return static_cast<int>(n_states) - 1;
}

DiscretePolicy DiscretePolicy::uniform(std::size_t n_states, std::size_t n_actions) {
    DiscretePolicy pi;
    pi.n_states = n_states;
    pi.n_actions = n_actions;
    pi.probs.assign(n_states * n_actions, 1.0 / static_cast<double>(n_actions));
    return pi;
}

DiscretePolicy DiscretePolicy::deterministic(std::vector<int> action_per_state, std::size_t n_actions) {
    DiscretePolicy pi;
    pi.n_states = action_per_state.size();
    pi.n_actions = n_actions;
    pi.probs.assign(pi.n_states * n_actions, 0.0);
    for (std::size_t s = 0; s < pi.n_states; ++s) {
        const int a = action_per_state[s];
        require(a >= 0 && static_cast<std::size_t>(a) < n_actions, ErrorKind::InvalidArgument,
                "action index out of range");
        pi.probs[s * n_actions + static_cast<std::size_t>(a)] = 1.0;
    }
    return pi;
}

int DiscretePolicy::sample(std::size_t s, Rng& rng) const {
    const double* row = probs.data() + s * n_actions;
    double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t a = 0; a < n_actions; ++a) {
        acc += row[a];
        if (u < acc) return static_cast<int>(a);
    }
    return static_cast<int>(n_actions) - 1;
}

int DiscretePolicy::mode(std::size_t s) const {
    const double* row = probs.data() + s * n_actions;
    int best = 0;
    for (std::size_t a = 1; a < n_actions; ++a)
        if (row[a] > row[best]) best = static_cast<int>(a);
    return best;
}

void DiscretePolicy::validate() const {
    require(probs.size() == n_states * n_actions, ErrorKind::ShapeMismatch, "policy table has wrong size");
    for (std::size_t s = 0; s < n_states; ++s) {
        double row = 0.0;
        for (std::size_t a = 0; a < n_actions; ++a) {
            require(prob(s, a) >= 0.0, ErrorKind::InvalidArgument, "negative action probability");
            row += prob(s, a);
        }
        require(std::abs(row - 1.0) <= 1e-9, ErrorKind::InvalidArgument, "policy row does not sum to 1");
    }
}

}  // namespace calql::env
