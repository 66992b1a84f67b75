#pragma once

#include <functional>
#include <vector>

#include "calql/nn/tensor.hpp"

namespace calql::nn {

/// Reverse-mode autodiff tape for one forward pass. Nodes are appended in
/// evaluation order, so reverse creation order is a valid topological order
/// and the backward sweep visits each node exactly once.
///
/// Usage: record leaves with input()/param(), build the graph with the op
/// methods, call backward() on a scalar node, then read grad() of any leaf.
class GradTape {
public:
    struct ValueRef {
        int id = -1;
        bool valid() const { return id >= 0; }
    };

    GradTape() = default;
    GradTape(const GradTape&) = delete;
    GradTape& operator=(const GradTape&) = delete;

    /// Leaf that does not need a gradient (observations, action batches).
    ValueRef input(Tensor v);
    /// Leaf whose gradient will be read after backward (network parameters).
    ValueRef param(const Tensor& v);

    // --- elementwise / broadcast arithmetic -------------------------------
    ValueRef add(ValueRef a, ValueRef b);          // same shape
    ValueRef sub(ValueRef a, ValueRef b);          // same shape
    ValueRef mul(ValueRef a, ValueRef b);          // same shape, elementwise
    ValueRef add_rowvec(ValueRef a, ValueRef b);   // (m x n) + (1 x n)
    ValueRef scale(ValueRef a, double c);
    ValueRef add_const(ValueRef a, double c);
    ValueRef add_colvec(ValueRef a, ValueRef b);   // (m x n) + (m x 1)

    // --- nonlinearities ----------------------------------------------------
    ValueRef tanh(ValueRef a);
    ValueRef relu(ValueRef a);
    ValueRef exp(ValueRef a);
    ValueRef log(ValueRef a);
    ValueRef square(ValueRef a);

    /// Elementwise max against a fixed bound; gradient flows to `a` only
    /// where a >= bound. A bound of -inf makes this an exact identity.
    ValueRef max_with(ValueRef a, Tensor bound);
    /// Elementwise min of two tracked tensors; ties route the gradient to a.
    ValueRef min2(ValueRef a, ValueRef b);

    // --- linear algebra / structure ----------------------------------------
    ValueRef matmul(ValueRef a, ValueRef b);           // (m x k) @ (k x n)
    ValueRef concat_cols(ValueRef a, ValueRef b);      // (m x n1) ++ (m x n2)
    ValueRef slice_cols(ValueRef a, std::size_t c0, std::size_t c1);
    /// Pick one column per row: out[r,0] = a[r, idx[r]].
    ValueRef gather_cols(ValueRef a, std::vector<int> idx);

    // --- reductions ----------------------------------------------------------
    ValueRef sum_rows(ValueRef a);        // (m x n) -> (m x 1)
    ValueRef mean_all(ValueRef a);        // -> (1 x 1)
    ValueRef sum_all(ValueRef a);         // -> (1 x 1)
    ValueRef logsumexp_rows(ValueRef a);  // (m x n) -> (m x 1), max-shifted
    ValueRef log_softmax_rows(ValueRef a);

    /// Seed d(root)/d(root)=1 and propagate. root must be scalar.
    void backward(ValueRef root);

    const Tensor& value(ValueRef r) const { return nodes_[check(r)].value; }
    const Tensor& grad(ValueRef r) const { return nodes_[check(r)].grad; }
    std::size_t num_nodes() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        // Accumulates into parents' grads; empty for leaves.
        std::function<void(GradTape&)> backprop;
    };

    int check(ValueRef r) const;
    ValueRef push(Tensor value, std::function<void(GradTape&)> backprop);
    Tensor& grad_mut(ValueRef r) { return nodes_[r.id].grad; }

    std::vector<Node> nodes_;
    bool ran_backward_ = false;
};

}  // namespace calql::nn
