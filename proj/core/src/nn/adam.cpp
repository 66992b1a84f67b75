#include "calql/nn/adam.hpp"

#include <cmath>

namespace calql::nn {

AdamState AdamState::for_params(const std::vector<Tensor*>& params) {
    AdamState st;
    for (const Tensor* p : params) {
        st.m.emplace_back(p->rows(), p->cols());
        st.v.emplace_back(p->rows(), p->cols());
    }
    return st;
}

void adam_step(std::vector<Tensor*> params, const std::vector<Tensor>& grads, AdamState& state,
               const AdamConfig& cfg) {
    require(params.size() == grads.size(), ErrorKind::ShapeMismatch, "adam: params/grads count mismatch");
    if (state.empty()) state = AdamState::for_params(params);
    require(state.m.size() == params.size(), ErrorKind::ShapeMismatch, "adam: state count mismatch");

    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = grads[i];
        require(p.same_shape(g), ErrorKind::ShapeMismatch, "adam: param/grad shape mismatch");
        Tensor& m = state.m[i];
        Tensor& v = state.v[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            m.data[j] = cfg.beta1 * m.data[j] + (1.0 - cfg.beta1) * g.data[j];
            v.data[j] = cfg.beta2 * v.data[j] + (1.0 - cfg.beta2) * g.data[j] * g.data[j];
            const double mhat = m.data[j] / bc1;
            const double vhat = v.data[j] / bc2;
            p.data[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
        require(p.all_finite(), ErrorKind::InvalidArgument, "adam: parameter became non-finite");
    }
}

}  // namespace calql::nn
