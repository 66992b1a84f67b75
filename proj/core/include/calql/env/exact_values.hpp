#pragma once

#include <vector>

#include "calql/env/tabular_mdp.hpp"

namespace calql::env {

struct PolicyValues {
    std::vector<double> v;  // per state
    std::vector<double> q;  // per (s,a), layout [s*A + a]
};

/// Exact V^pi, Q^pi of a stationary policy. Infinite-horizon mode solves the
/// linear system (I - gamma P_pi) V = r_pi; finite-horizon mode runs a
/// discounted backward induction and returns the step-0 tables. The Bellman
/// residual of the result is checked to 1e-8 and SingularSystem is raised if
/// the solve degenerates (cannot happen for gamma < 1, guarded regardless).
PolicyValues exact_policy_values(const TabularMdp& mdp, const DiscretePolicy& policy);

/// Per-step finite-horizon tables. v has H+1 entries (v[H] = 0), q has H.
struct FiniteValues {
    std::vector<std::vector<double>> v;  // (H+1) x S
    std::vector<std::vector<double>> q;  // H x (S*A)
};

/// V_h^pi / Q_h^pi for a per-step policy (one DiscretePolicy per h).
FiniteValues finite_policy_values(const TabularMdp& mdp, const std::vector<DiscretePolicy>& policy);

/// Optimal V*_h / Q*_h by backward induction over max_a.
FiniteValues finite_optimal_values(const TabularMdp& mdp);

/// Max elementwise Bellman-consistency residual of (v, q) under the policy.
double bellman_residual(const TabularMdp& mdp, const DiscretePolicy& policy, const PolicyValues& values);

}  // namespace calql::env
