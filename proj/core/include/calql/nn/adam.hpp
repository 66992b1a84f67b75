#pragma once

#include <vector>

#include "calql/nn/tensor.hpp"

namespace calql::nn {

struct AdamConfig {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// First/second moment accumulators, one pair per parameter tensor.
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    long step = 0;

    static AdamState for_params(const std::vector<Tensor*>& params);
    bool empty() const { return m.empty(); }
};

/// One bias-corrected adaptive-moment update. Throws if any parameter leaves
/// the finite range afterwards.
void adam_step(std::vector<Tensor*> params, const std::vector<Tensor>& grads, AdamState& state,
               const AdamConfig& cfg);

}  // namespace calql::nn
