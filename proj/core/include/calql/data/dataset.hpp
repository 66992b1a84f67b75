#pragma once

#include <string>
#include <vector>

#include "calql/env/episodic.hpp"

namespace calql::data {

using env::EpisodeStep;

/// One episode worth of chained transitions plus the label of the policy
/// that produced it.
struct Trajectory {
    std::vector<EpisodeStep> steps;
    std::string behavior_tag;

    /// Consecutive steps chain (next_state[t] == state[t+1]) and done can
    /// only appear on the final step.
    void validate() const;
    bool ends_done() const { return !steps.empty() && steps.back().done; }
};

/// Return-to-go per step: G(t) = r(t) + gamma * G(t+1), G at the last step
/// equals its reward. For truncated (non-terminal) trajectories this
/// bootstraps zero at the cut; callers should treat those values as
/// unreliable (OfflineDataset flags them).
std::vector<double> compute_mc_returns(const Trajectory& traj, double gamma);

/// Cut at (and including) the first step with reward > 0, marking that step
/// done. Unchanged when no positive reward occurs. Idempotent.
Trajectory truncate_positive_segments(const Trajectory& traj);

/// Flat transition store with per-transition Monte-Carlo return-to-go
/// annotations. Immutable after construction.
struct OfflineDataset {
    std::vector<EpisodeStep> transitions;
    std::vector<double> mc_return;
    std::vector<char> mc_unreliable;  // 1 when the source trajectory did not end in done
    std::vector<int> traj_id;
    std::vector<int> step_idx;
    std::string composition_tag;  // narrow | diverse | mixed
    double gamma_used = 0.99;

    std::size_t size() const { return transitions.size(); }
    bool empty() const { return transitions.empty(); }

    static OfflineDataset from_trajectories(const std::vector<Trajectory>& trajectories, double gamma,
                                            std::string composition_tag);

    /// Mean mc_return over all transitions (the dataset Q-scale yardstick).
    double mean_mc_return() const;
};

/// Roll out `policy` for n_trajectories episodes (>= 1) and annotate with
/// return-to-go at the given gamma. Deterministic given seed.
OfflineDataset generate_dataset(env::EpisodicEnv& env, const env::DiscretePolicy& policy,
                                int n_trajectories, std::uint64_t seed, double gamma,
                                std::string composition_tag);

/// CSV with header `s,a,r,s_next,done,truncated,mc_return,traj_id,step_idx`.
/// States and actions are integer ids. The loader revalidates the chain
/// invariant per traj_id and recomputes mc_return with `expected_gamma`,
/// rejecting the file when any value drifts beyond 1e-6 (this doubles as the
/// gamma-mismatch check).
void write_csv(const OfflineDataset& ds, const std::string& path);
OfflineDataset load_csv(const std::string& path, double expected_gamma,
                        std::string composition_tag = "mixed");

}  // namespace calql::data
