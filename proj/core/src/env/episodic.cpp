#include "calql/env/episodic.hpp"

namespace calql::env {

TabularMdpEnv::TabularMdpEnv(TabularMdp mdp, int max_episode_len)
    : mdp_(std::move(mdp)), max_episode_len_(max_episode_len) {
    mdp_.validate();
    if (max_episode_len_ <= 0 && mdp_.horizon) max_episode_len_ = *mdp_.horizon;
}

EpisodeStep TabularMdpEnv::reset(std::uint64_t seed) {
    rng_ = Rng(seed);
    state_ = mdp_.sample_initial(rng_);
    steps_ = 0;
    over_ = false;
    EpisodeStep st;
    st.state = state_;
    st.next_state = state_;
    return st;
}

EpisodeStep TabularMdpEnv::step(int action) {
    require(!over_, ErrorKind::StepAfterDone, "step called on a finished episode");
    require(action >= 0 && static_cast<std::size_t>(action) < mdp_.n_actions, ErrorKind::InvalidArgument,
            "action index out of range");
    const std::size_t s = static_cast<std::size_t>(state_);
    const std::size_t a = static_cast<std::size_t>(action);

    EpisodeStep st;
    st.state = state_;
    st.action = action;
    st.reward = mdp_.r(s, a);
    if (mdp_.is_terminal(s)) {
        st.next_state = state_;
        st.done = true;
    } else {
        st.next_state = mdp_.sample_next(s, a, rng_);
        state_ = st.next_state;
    }
    ++steps_;
    if (!st.done && max_episode_len_ > 0 && steps_ >= max_episode_len_) st.truncated = true;
    over_ = st.done || st.truncated;
    return st;
}

}  // namespace calql::env
