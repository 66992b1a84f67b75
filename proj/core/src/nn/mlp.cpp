#include "calql/nn/mlp.hpp"

#include <cmath>

namespace calql::nn {

Mlp Mlp::create(std::vector<std::size_t> widths, Activation act, Rng& rng) {
    require(widths.size() >= 2, ErrorKind::InvalidArgument, "mlp needs at least in/out widths");
    Mlp net;
    net.widths = std::move(widths);
    net.activation = act;
    for (std::size_t i = 0; i + 1 < net.widths.size(); ++i) {
        const std::size_t fan_in = net.widths[i];
        const std::size_t fan_out = net.widths[i + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Tensor w(fan_in, fan_out);
        for (double& v : w.data) v = rng.uniform(-bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(1, fan_out);
    }
    return net;
}

Mlp Mlp::zeros(std::vector<std::size_t> widths, Activation act) {
    require(widths.size() >= 2, ErrorKind::InvalidArgument, "mlp needs at least in/out widths");
    Mlp net;
    net.widths = std::move(widths);
    net.activation = act;
    for (std::size_t i = 0; i + 1 < net.widths.size(); ++i) {
        net.weights.emplace_back(net.widths[i], net.widths[i + 1]);
        net.biases.emplace_back(1, net.widths[i + 1]);
    }
    return net;
}

std::size_t Mlp::param_count() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += w.size();
    for (const auto& b : biases) n += b.size();
    return n;
}

std::vector<Tensor*> Mlp::parameters() {
    std::vector<Tensor*> out;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        out.push_back(&weights[i]);
        out.push_back(&biases[i]);
    }
    return out;
}

std::vector<const Tensor*> Mlp::parameters() const {
    std::vector<const Tensor*> out;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        out.push_back(&weights[i]);
        out.push_back(&biases[i]);
    }
    return out;
}

bool Mlp::params_finite() const {
    for (const Tensor* p : parameters())
        if (!p->all_finite()) return false;
    return true;
}

Tensor Mlp::forward(const Tensor& input) const {
    require(input.cols() == input_width(), ErrorKind::ShapeMismatch, "mlp forward: input width mismatch");
    Tensor x = input;
    for (std::size_t layer = 0; layer < weights.size(); ++layer) {
        const Tensor& w = weights[layer];
        const Tensor& b = biases[layer];
        Tensor y(x.rows(), w.cols());
        for (std::size_t r = 0; r < x.rows(); ++r) {
            for (std::size_t c = 0; c < w.cols(); ++c) y.at(r, c) = b.data[c];
            for (std::size_t j = 0; j < w.rows(); ++j) {
                const double xv = x.at(r, j);
                if (xv == 0.0) continue;
                for (std::size_t c = 0; c < w.cols(); ++c) y.at(r, c) += xv * w.at(j, c);
            }
        }
        if (layer + 1 < weights.size()) {
            if (activation == Activation::Tanh)
                for (double& v : y.data) v = std::tanh(v);
            else
                for (double& v : y.data) v = v > 0.0 ? v : 0.0;
        }
        x = std::move(y);
    }
    return x;
}

Mlp::Recorded Mlp::forward(GradTape& tape, GradTape::ValueRef input) const {
    require(tape.value(input).cols() == input_width(), ErrorKind::ShapeMismatch,
            "mlp forward: input width mismatch");
    Recorded rec;
    GradTape::ValueRef x = input;
    for (std::size_t layer = 0; layer < weights.size(); ++layer) {
        auto w = tape.param(weights[layer]);
        auto b = tape.param(biases[layer]);
        rec.params.push_back(w);
        rec.params.push_back(b);
        x = tape.add_rowvec(tape.matmul(x, w), b);
        if (layer + 1 < weights.size())
            x = activation == Activation::Tanh ? tape.tanh(x) : tape.relu(x);
    }
    rec.output = x;
    return rec;
}

void Mlp::polyak_from(const Mlp& online, double tau) {
    require(widths == online.widths, ErrorKind::ShapeMismatch, "polyak: architecture mismatch");
    for (std::size_t i = 0; i < weights.size(); ++i) {
        for (std::size_t j = 0; j < weights[i].size(); ++j)
            weights[i].data[j] = (1.0 - tau) * weights[i].data[j] + tau * online.weights[i].data[j];
        for (std::size_t j = 0; j < biases[i].size(); ++j)
            biases[i].data[j] = (1.0 - tau) * biases[i].data[j] + tau * online.biases[i].data[j];
    }
}

void accumulate_grads(const GradTape& tape, const Mlp::Recorded& rec, std::vector<Tensor>& grads) {
    require(grads.size() == rec.params.size(), ErrorKind::ShapeMismatch, "gradient buffer count mismatch");
    for (std::size_t i = 0; i < rec.params.size(); ++i) {
        const Tensor& g = tape.grad(rec.params[i]);
        require(grads[i].same_shape(g), ErrorKind::ShapeMismatch, "gradient buffer shape mismatch");
        for (std::size_t j = 0; j < g.size(); ++j) grads[i].data[j] += g.data[j];
    }
}

std::vector<Tensor> zero_grads(const Mlp& net) {
    std::vector<Tensor> grads;
    for (const Tensor* p : net.parameters()) grads.emplace_back(p->rows(), p->cols());
    return grads;
}

}  // namespace calql::nn
