#pragma once

#include <string>
#include <vector>

#include "calql/nn/tape.hpp"
#include "calql/rng.hpp"

namespace calql::nn {

enum class Activation { Tanh, Relu };

/// Dense feed-forward network, float64 throughout. Hidden layers share one
/// activation; the output layer is linear.
struct Mlp {
    std::vector<std::size_t> widths;  // {in, hidden..., out}
    Activation activation = Activation::Tanh;
    std::vector<Tensor> weights;  // widths[i] x widths[i+1]
    std::vector<Tensor> biases;   // 1 x widths[i+1]

    /// Uniform fan-in init: W ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), b = 0.
    static Mlp create(std::vector<std::size_t> widths, Activation act, Rng& rng);
    /// All-zero parameters (used in tests and as a blank slate).
    static Mlp zeros(std::vector<std::size_t> widths, Activation act);

    std::size_t input_width() const { return widths.front(); }
    std::size_t output_width() const { return widths.back(); }
    std::size_t num_layers() const { return weights.size(); }
    std::size_t param_count() const;

    /// Parameter slots in a fixed order (W0, b0, W1, b1, ...). The same order
    /// is used by Recorded::params, optimizer state, and checkpoints.
    std::vector<Tensor*> parameters();
    std::vector<const Tensor*> parameters() const;

    bool params_finite() const;

    /// Inference forward pass; no tape involvement.
    Tensor forward(const Tensor& input) const;

    struct Recorded {
        GradTape::ValueRef output;
        std::vector<GradTape::ValueRef> params;  // aligned with parameters()
    };
    /// Forward pass recorded on a tape. After tape.backward() the parameter
    /// gradients are read via tape.grad(rec.params[i]).
    Recorded forward(GradTape& tape, GradTape::ValueRef input) const;

    /// Polyak average: this <- (1 - tau) * this + tau * online.
    void polyak_from(const Mlp& online, double tau);
};

/// Accumulate tape gradients for a recorded forward pass into `grads`
/// (same layout as parameters()).
void accumulate_grads(const GradTape& tape, const Mlp::Recorded& rec, std::vector<Tensor>& grads);

/// Zero-initialized gradient buffers matching a network's parameters.
std::vector<Tensor> zero_grads(const Mlp& net);

}  // namespace calql::nn
