#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "calql/common.hpp"

namespace calql::nn {

/// Dense row-major float64 tensor. Everything the tape manipulates is rank-2
/// (rows x cols); scalars are 1x1.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
        : shape{rows, cols}, data(rows * cols, fill) {}
    Tensor(std::vector<std::size_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
        require(numel(shape) == data.size(), ErrorKind::ShapeMismatch,
                "tensor data length does not match shape");
    }

    static std::size_t numel(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t d : s) n *= d;
        return n;
    }

    static Tensor scalar(double v) {
        Tensor t(1, 1);
        t.data[0] = v;
        return t;
    }

    std::size_t size() const { return data.size(); }
    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? (shape.empty() ? 0 : 1) : shape[1]; }

    double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

    double item() const {
        require(size() == 1, ErrorKind::ShapeMismatch, "item() on non-scalar tensor");
        return data[0];
    }

    bool same_shape(const Tensor& o) const { return rows() == o.rows() && cols() == o.cols(); }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

/// Numerically stable log(sum(exp(values))) over a contiguous range.
double logsumexp(const double* values, std::size_t n);
double logsumexp(const std::vector<double>& values);

/// Row-wise stable logsumexp of a (m x n) tensor, result (m x 1).
Tensor logsumexp_rows(const Tensor& t);

}  // namespace calql::nn
