#pragma once

#include "calql/env/tabular_mdp.hpp"

namespace calql::env {

/// Dense random MDP: Dirichlet(1) transition rows, rewards U[0,1],
/// Dirichlet(1) initial distribution. Infinite-horizon with the given gamma.
TabularMdp make_random_mdp(std::size_t n_states, std::size_t n_actions, double gamma, std::uint64_t seed);

/// Same construction in finite-horizon mode (undiscounted, gamma = 1 is
/// encoded by setting horizon and leaving gamma at 1.0).
TabularMdp make_random_finite_mdp(std::size_t n_states, std::size_t n_actions, int horizon,
                                  std::uint64_t seed);

/// 4-state, 2-action, H=3 family with a sparse "progress" path and a small
/// distractor sink. A seed randomizes which action makes progress at each
/// state, the sink reward, the path payoff and a little transition noise.
/// The optimal policy follows the path; the sink is strictly worse.
TabularMdp make_narrow_path_mdp(std::uint64_t seed);

}  // namespace calql::env
