#pragma once

#include <cstdint>
#include <memory>

#include "calql/env/tabular_mdp.hpp"

namespace calql::env {

/// One simulation transition. `done` means the environment terminated;
/// `truncated` means the time limit cut the episode. They are independent
/// flags: TD targets bootstrap through truncation but never through done.
struct EpisodeStep {
    int state = 0;
    int action = -1;
    double reward = 0.0;
    int next_state = 0;
    bool done = false;
    bool truncated = false;
};

/// Exclusive-access episodic state machine over a tabular state space.
/// reset(seed) is deterministic given the seed; step throws StepAfterDone
/// once the episode is over (done or truncated).
class EpisodicEnv {
public:
    virtual ~EpisodicEnv() = default;
    virtual std::size_t n_states() const = 0;
    virtual std::size_t n_actions() const = 0;
    /// Starts a fresh episode; the returned step carries the initial state in
    /// both `state` and `next_state` with no action/reward.
    virtual EpisodeStep reset(std::uint64_t seed) = 0;
    virtual EpisodeStep step(int action) = 0;
    virtual bool episode_over() const = 0;
    virtual int current_state() const = 0;
};

/// Simulates a TabularMdp episodically. Rewards are emitted as the mean table
/// value r(s,a); stochasticity enters through transitions only. Acting in a
/// terminal state yields its reward and ends the episode.
class TabularMdpEnv final : public EpisodicEnv {
public:
    /// max_episode_len <= 0 means: horizon H when the MDP is finite-horizon,
    /// otherwise no time limit.
    explicit TabularMdpEnv(TabularMdp mdp, int max_episode_len = 0);

    std::size_t n_states() const override { return mdp_.n_states; }
    std::size_t n_actions() const override { return mdp_.n_actions; }
    EpisodeStep reset(std::uint64_t seed) override;
    EpisodeStep step(int action) override;
    bool episode_over() const override { return over_; }
    int current_state() const override { return state_; }

    const TabularMdp& mdp() const { return mdp_; }

private:
    TabularMdp mdp_;
    int max_episode_len_;
    Rng rng_{0};
    int state_ = 0;
    int steps_ = 0;
    bool over_ = true;  // step() before reset() is an error
};

}  // namespace calql::env
