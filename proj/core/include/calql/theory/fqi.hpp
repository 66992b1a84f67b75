#pragma once

#include "calql/env/exact_values.hpp"

namespace calql::theory {

/// Per-time-step value tables: index [h][s*A + a], h in [0, H).
using StepTables = std::vector<std::vector<double>>;

/// (s, a, r, s') tuples collected at one time step h.
struct StepTuples {
    std::vector<int> s, a, s_next;
    std::vector<double> r;
    std::size_t size() const { return s.size(); }
};

/// One dataset per time step h.
using StepDataset = std::vector<StepTuples>;

/// Roll the per-step policy n_rollouts times and record one tuple per h per
/// rollout (samples from the occupancies d_h^pi).
StepDataset collect_step_data(const env::TabularMdp& mdp, const std::vector<env::DiscretePolicy>& policy,
                              int n_rollouts, Rng& rng);

/// Offline dataset from a stationary behavior policy.
StepDataset collect_offline_step_data(const env::TabularMdp& mdp, const env::DiscretePolicy& behavior,
                                      int n_rollouts, std::uint64_t seed);

/// Exact Q^pi tables per step for a stationary reference policy (the Q^ref
/// input of calibrated FQI).
StepTables reference_q_tables(const env::TabularMdp& mdp, const env::DiscretePolicy& reference);

struct FqiOptions {
    int iterations = 10;  // K
    int m_on = 1;         // rollouts collected per iteration
    bool calibrate = false;
    /// Optional pessimistic-class clamp: estimates are capped from above by
    /// these tables before the calibration clip.
    const StepTables* pessimism_clamp = nullptr;
    std::uint64_t seed = 0;
};

struct FqiIterate {
    StepTables f;                             // H entries; the implicit f_H is zero
    std::vector<env::DiscretePolicy> policy;  // greedy policy derived from f (per h)
};

struct FqiRun {
    std::vector<FqiIterate> iterates;  // K entries: the state at each deployment
    StepTables final_f;                // tables after the last refit (f^{K+1})
    std::vector<env::DiscretePolicy> final_policy;  // greedy w.r.t. final_f
};

/// Conservative least-squares fitted Q-iteration with optional calibration
/// clipping. Each iteration deploys the greedy policy of the current tables,
/// collects m_on rollouts per step, then refits backward over the aggregated
/// offline + online tuples: per-(s,a) empirical mean of
/// r + max_a' f_{h+1}(s',a'), 0 where unvisited, then the optional clamp from
/// above, then (when calibrate) f_h = max(f_h, Q^ref_h).
FqiRun run_calibrated_fqi(const env::TabularMdp& mdp, const StepDataset& offline,
                          const StepTables& q_ref, const FqiOptions& opts);

struct RegretRow {
    int k = 0;
    double term_i = 0.0;   // miscalibration: E_rho[V* - max_a f^k_0]
    double term_ii = 0.0;  // overestimation: E_rho[max_a f^k_0 - V^{pi_k}]
    double regret = 0.0;   // term_i + term_ii = E_rho[V* - V^{pi_k}]
    double cum_regret = 0.0;
};

/// Per-iteration regret decomposition of an FQI run against the exact
/// optimal value of the MDP.
std::vector<RegretRow> regret_decomposition(const env::TabularMdp& mdp, const FqiRun& run);

}  // namespace calql::theory
