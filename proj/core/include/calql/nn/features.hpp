#pragma once

#include <vector>

#include "calql/nn/tensor.hpp"

namespace calql::nn {

/// One-hot encode tabular state ids into a (B x n_states) matrix.
Tensor one_hot(const std::vector<int>& ids, std::size_t n);

/// One-hot state and action side by side: (B x (n_states + n_actions)).
Tensor one_hot_pair(const std::vector<int>& states, const std::vector<int>& actions,
                    std::size_t n_states, std::size_t n_actions);

}  // namespace calql::nn
