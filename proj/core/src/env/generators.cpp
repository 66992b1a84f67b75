#include "calql/env/generators.hpp"

#include <cmath>

namespace calql::env {

namespace {

void fill_dirichlet_row(double* row, std::size_t n, Rng& rng) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double u = rng.uniform();
        while (u <= 0.0) u = rng.uniform();
        row[i] = -std::log(u);  // Exp(1) draws, normalized -> Dirichlet(1)
        sum += row[i];
    }
    for (std::size_t i = 0; i < n; ++i) row[i] /= sum;
}

TabularMdp random_core(std::size_t S, std::size_t A, std::uint64_t seed) {
    Rng rng(seed);
    TabularMdp mdp;
    mdp.n_states = S;
    mdp.n_actions = A;
    mdp.transition.assign(S * A * S, 0.0);
    mdp.reward.assign(S * A, 0.0);
    mdp.initial_dist.assign(S, 0.0);
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a = 0; a < A; ++a)
            fill_dirichlet_row(mdp.transition.data() + (s * A + a) * S, S, rng);
    for (double& r : mdp.reward) r = rng.uniform();
    fill_dirichlet_row(mdp.initial_dist.data(), S, rng);
    return mdp;
}

}  // namespace

TabularMdp make_random_mdp(std::size_t n_states, std::size_t n_actions, double gamma, std::uint64_t seed) {
    TabularMdp mdp = random_core(n_states, n_actions, seed);
    mdp.gamma = gamma;
    mdp.validate();
    return mdp;
}

TabularMdp make_random_finite_mdp(std::size_t n_states, std::size_t n_actions, int horizon,
                                  std::uint64_t seed) {
    TabularMdp mdp = random_core(n_states, n_actions, seed);
    mdp.gamma = 1.0;
    mdp.horizon = horizon;
    mdp.validate();
    return mdp;
}

TabularMdp make_narrow_path_mdp(std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t S = 4;  // 0,1: path; 2: payoff state; 3: distractor sink
    const std::size_t A = 2;
    const double noise = 0.05;
    const double sink_reward = rng.uniform(0.05, 0.2);
    const double path_reward = rng.uniform(0.8, 1.0);

    TabularMdp mdp;
    mdp.n_states = S;
    mdp.n_actions = A;
    mdp.gamma = 1.0;
    mdp.horizon = 3;
    mdp.transition.assign(S * A * S, 0.0);
    mdp.reward.assign(S * A, 0.0);
    mdp.initial_dist.assign(S, 0.0);
    mdp.initial_dist[0] = 1.0;

    // Which action makes progress at each path state.
    int good0 = rng.uniform_int(2);
    int good1 = rng.uniform_int(2);

    auto set_row = [&](std::size_t s, std::size_t a, std::size_t target) {
        double* row = mdp.transition.data() + (s * A + a) * S;
        for (std::size_t s2 = 0; s2 < S; ++s2) row[s2] = noise / static_cast<double>(S);
        row[target] += 1.0 - noise;
    };

    // State 0: good action -> 1, bad -> sink.
    set_row(0, static_cast<std::size_t>(good0), 1);
    set_row(0, static_cast<std::size_t>(1 - good0), 3);
    // State 1: good action -> 2, bad -> sink.
    set_row(1, static_cast<std::size_t>(good1), 2);
    set_row(1, static_cast<std::size_t>(1 - good1), 3);
    // Payoff state and sink are sticky.
    for (std::size_t a = 0; a < A; ++a) {
        set_row(2, a, 2);
        set_row(3, a, 3);
        mdp.reward[2 * A + a] = path_reward;
        mdp.reward[3 * A + a] = sink_reward;
    }

    mdp.validate();
    return mdp;
}

}  // namespace calql::env
