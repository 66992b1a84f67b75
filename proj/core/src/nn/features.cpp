#include "calql/nn/features.hpp"

namespace calql::nn {

Tensor one_hot(const std::vector<int>& ids, std::size_t n) {
    Tensor t(ids.size(), n);
    for (std::size_t r = 0; r < ids.size(); ++r) {
        require(ids[r] >= 0 && static_cast<std::size_t>(ids[r]) < n, ErrorKind::InvalidArgument,
                "one_hot: id out of range");
        t.at(r, static_cast<std::size_t>(ids[r])) = 1.0;
    }
    return t;
}

Tensor one_hot_pair(const std::vector<int>& states, const std::vector<int>& actions,
                    std::size_t n_states, std::size_t n_actions) {
    require(states.size() == actions.size(), ErrorKind::ShapeMismatch,
            "one_hot_pair: state/action count mismatch");
    Tensor t(states.size(), n_states + n_actions);
    for (std::size_t r = 0; r < states.size(); ++r) {
        require(states[r] >= 0 && static_cast<std::size_t>(states[r]) < n_states,
                ErrorKind::InvalidArgument, "one_hot_pair: state id out of range");
        require(actions[r] >= 0 && static_cast<std::size_t>(actions[r]) < n_actions,
                ErrorKind::InvalidArgument, "one_hot_pair: action id out of range");
        t.at(r, static_cast<std::size_t>(states[r])) = 1.0;
        t.at(r, n_states + static_cast<std::size_t>(actions[r])) = 1.0;
    }
    return t;
}

}  // namespace calql::nn
