#include "calql/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <utility>

namespace calql::nn {

int GradTape::check(ValueRef r) const {
    require(r.id >= 0 && r.id < static_cast<int>(nodes_.size()), ErrorKind::NoTape,
            "value ref does not belong to this tape");
    return r.id;
}

GradTape::ValueRef GradTape::push(Tensor value, std::function<void(GradTape&)> backprop) {
    Node n;
    n.grad = Tensor(value.rows(), value.cols());
    n.value = std::move(value);
    n.backprop = std::move(backprop);
    nodes_.push_back(std::move(n));
    return ValueRef{static_cast<int>(nodes_.size()) - 1};
}

GradTape::ValueRef GradTape::input(Tensor v) { return push(std::move(v), nullptr); }
GradTape::ValueRef GradTape::param(const Tensor& v) { return push(v, nullptr); }

GradTape::ValueRef GradTape::add(ValueRef a, ValueRef b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    require(ta.same_shape(tb), ErrorKind::ShapeMismatch, "add: shapes differ");
    Tensor out = ta;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += tb.data[i];
    ValueRef self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, b, self](GradTape& t) {
        const Tensor& g = t.grad(self);
        Tensor& ga = t.grad_mut(a);
        Tensor& gb = t.grad_mut(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data[i] += g.data[i];
            gb.data[i] += g.data[i];
        }
    });
}

GradTape::ValueRef GradTape::sub(ValueRef a, ValueRef b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    require(ta.same_shape(tb), ErrorKind::ShapeMismatch, "sub: shapes differ");
    Tensor out = ta;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= tb.data[i];
    ValueRef self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, b, self](GradTape& t) {
        const Tensor& g = t.grad(self);
        Tensor& ga = t.grad_mut(a);
        Tensor& gb = t.grad_mut(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data[i] += g.data[i];
            gb.data[i] -= g.data[i];
        }
    });
}

GradTape::ValueRef GradTape::mul(ValueRef a, ValueRef b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    require(ta.same_shape(tb), ErrorKind::ShapeMismatch, "mul: shapes differ");
    Tensor out = ta;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= tb.data[i];
    ValueRef self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, b, self](GradTape& t) {
        const Tensor& g = t.grad(self);
        const Tensor& va = t.value(a);
        const Tensor& vb = t.value(b);
        Tensor& ga = t.grad_mut(a);
        Tensor& gb = t.grad_mut(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data[i] += g.data[i] * vb.data[i];
            gb.data[i] += g.data[i] * va.data[i];
        }
    });
}

GradTape::ValueRef GradTape::add_rowvec(ValueRef a, ValueRef b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    require(tb.rows() == 1 && tb.cols() == ta.cols(), ErrorKind::ShapeMismatch,
            "add_rowvec: b must be (1 x cols(a))");
    Tensor out = ta;
    for (std::size_t r = 0; r < ta.rows(); ++r)
        for (std::size_t c = 0; c < ta.cols(); ++c) out.at(r, c) += tb.data[c];
    ValueRef self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, b, self](GradTape& t) {
        const Tensor& g = t.grad(self);
        Tensor& ga = t.grad_mut(a);
        Tensor& gb = t.grad_mut(b);
        for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t c = 0; c < g.cols(); ++c) {
                ga.at(r, c) += g.at(r, c);
                gb.data[c] += g.at(r, c);
            }
    });
}

GradTape::ValueRef GradTape::add_colvec(ValueRef a, ValueRef b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    require(tb.cols() == 1 && tb.rows() == ta.rows(), ErrorKind::ShapeMismatch,
            "add_colvec: b must be (rows(a) x 1)");
    Tensor out = ta;
    for (std::size_t r = 0; r < ta.rows(); ++r)
        for (std::size_t c = 0; c < ta.cols(); ++c) out.at(r, c) += tb.data[r];
    ValueRef self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, b, self](GradTape& t) {
        const Tensor& g = t.grad(self);
        Tensor& ga = t.grad_mut(a);
        Tensor& gb = t.grad_mut(b);
        for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t c = 0; c < g.cols(); ++c) {
                ga.at(r, c) += g.at(r, c);
                gb.data[r] += g.at(r, c);
            }
    });
}

GradTape::ValueRef GradTape::scale(ValueRef a, double c) {
    Tensor out = value(a);
    for (double& v : out.data) v *= c;
    ValueRef self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, c, self](GradTape& t) {
        const Tensor& g = t.grad(self);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += c * g.data[i];
    });
}

GradTape::ValueRef GradTape::add_const(ValueRef a, double c) {
    Tensor out = value(a);
    for (double& v : out.data) v += c;
    ValueRef self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, self](GradTape& t) {
        const Tensor& g = t.grad(self);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
    });
}

GradTape::ValueRef GradTape::tanh(ValueRef a) {
    Tensor out = value(a);
    for (double& v : out.data) v = std::tanh(v);
    ValueRef self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, self](GradTape& t) {
        const Tensor& g = t.grad(self);
        const Tensor& y = t.value(self);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * (1.0 - y.data[i] * y.data[i]);
    });
}

GradTape::ValueRef GradTape::relu(ValueRef a) {
    Tensor out = value(a);
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    ValueRef self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, self](GradTape& t) {
        const Tensor& g = t.grad(self);
        const Tensor& x = t.value(a);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (x.data[i] > 0.0) ga.data[i] += g.data[i];
    });
}

GradTape::ValueRef GradTape::exp(ValueRef a) {
    Tensor out = value(a);
    for (double& v : out.data) v = std::exp(v);
    ValueRef self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, self](GradTape& t) {
        const Tensor& g = t.grad(self);
        const Tensor& y = t.value(self);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * y.data[i];
    });
}

GradTape::ValueRef GradTape::log(ValueRef a) {
    Tensor out = value(a);
    for (double& v : out.data) v = std::log(v);
    ValueRef self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, self](GradTape& t) {
        const Tensor& g = t.grad(self);
        const Tensor& x = t.value(a);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] / x.data[i];
    });
}

GradTape::ValueRef GradTape::square(ValueRef a) {
    Tensor out = value(a);
    for (double& v : out.data) v = v * v;
    ValueRef self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, self](GradTape& t) {
        const Tensor& g = t.grad(self);
        const Tensor& x = t.value(a);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += 2.0 * g.data[i] * x.data[i];
    });
}

GradTape::ValueRef GradTape::max_with(ValueRef a, Tensor bound) {
    const Tensor& ta = value(a);
    require(ta.same_shape(bound), ErrorKind::ShapeMismatch, "max_with: bound shape differs");
    Tensor out = ta;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = std::max(out.data[i], bound.data[i]);
    ValueRef self{static_cast<int>(nodes_.size())};
    auto bnd = std::make_shared<Tensor>(std::move(bound));
    return push(std::move(out), [a, bnd, self](GradTape& t) {
        const Tensor& g = t.grad(self);
        const Tensor& x = t.value(a);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (x.data[i] >= bnd->data[i]) ga.data[i] += g.data[i];
    });
}

GradTape::ValueRef GradTape::min2(ValueRef a, ValueRef b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    require(ta.same_shape(tb), ErrorKind::ShapeMismatch, "min2: shapes differ");
    Tensor out = ta;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = std::min(out.data[i], tb.data[i]);
    ValueRef self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, b, self](GradTape& t) {
        const Tensor& g = t.grad(self);
        const Tensor& va = t.value(a);
        const Tensor& vb = t.value(b);
        Tensor& ga = t.grad_mut(a);
        Tensor& gb = t.grad_mut(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (va.data[i] <= vb.data[i])
                ga.data[i] += g.data[i];
            else
                gb.data[i] += g.data[i];
        }
    });
}

GradTape::ValueRef GradTape::matmul(ValueRef a, ValueRef b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    require(ta.cols() == tb.rows(), ErrorKind::ShapeMismatch, "matmul: inner dims differ");
    const std::size_t m = ta.rows(), k = ta.cols(), n = tb.cols();
    Tensor out(m, n);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t j = 0; j < k; ++j) {
            const double av = ta.at(r, j);
            if (av == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) out.at(r, c) += av * tb.at(j, c);
        }
    ValueRef self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, b, self, m, k, n](GradTape& t) {
        const Tensor& g = t.grad(self);
        const Tensor& va = t.value(a);
        const Tensor& vb = t.value(b);
        Tensor& ga = t.grad_mut(a);
        Tensor& gb = t.grad_mut(b);
        // dA += g @ B^T ; dB += A^T @ g
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < n; ++c) {
                const double gv = g.at(r, c);
                if (gv == 0.0) continue;
                for (std::size_t j = 0; j < k; ++j) {
                    ga.at(r, j) += gv * vb.at(j, c);
                    gb.at(j, c) += va.at(r, j) * gv;
                }
            }
    });
}

GradTape::ValueRef GradTape::concat_cols(ValueRef a, ValueRef b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    require(ta.rows() == tb.rows(), ErrorKind::ShapeMismatch, "concat_cols: row counts differ");
    const std::size_t m = ta.rows(), n1 = ta.cols(), n2 = tb.cols();
    Tensor out(m, n1 + n2);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < n1; ++c) out.at(r, c) = ta.at(r, c);
        for (std::size_t c = 0; c < n2; ++c) out.at(r, n1 + c) = tb.at(r, c);
    }
    ValueRef self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, b, self, m, n1, n2](GradTape& t) {
        const Tensor& g = t.grad(self);
        Tensor& ga = t.grad_mut(a);
        Tensor& gb = t.grad_mut(b);
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t c = 0; c < n1; ++c) ga.at(r, c) += g.at(r, c);
            for (std::size_t c = 0; c < n2; ++c) gb.at(r, c) += g.at(r, n1 + c);
        }
    });
}

GradTape::ValueRef GradTape::slice_cols(ValueRef a, std::size_t c0, std::size_t c1) {
    const Tensor& ta = value(a);
    require(c0 < c1 && c1 <= ta.cols(), ErrorKind::ShapeMismatch, "slice_cols: bad range");
    Tensor out(ta.rows(), c1 - c0);
    for (std::size_t r = 0; r < ta.rows(); ++r)
        for (std::size_t c = c0; c < c1; ++c) out.at(r, c - c0) = ta.at(r, c);
    ValueRef self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, c0, c1, self](GradTape& t) {
        const Tensor& g = t.grad(self);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t c = c0; c < c1; ++c) ga.at(r, c) += g.at(r, c - c0);
    });
}

GradTape::ValueRef GradTape::gather_cols(ValueRef a, std::vector<int> idx) {
    const Tensor& ta = value(a);
    require(idx.size() == ta.rows(), ErrorKind::ShapeMismatch, "gather_cols: one index per row required");
    Tensor out(ta.rows(), 1);
    for (std::size_t r = 0; r < ta.rows(); ++r) {
        require(idx[r] >= 0 && static_cast<std::size_t>(idx[r]) < ta.cols(), ErrorKind::ShapeMismatch,
                "gather_cols: index out of range");
        out.data[r] = ta.at(r, static_cast<std::size_t>(idx[r]));
    }
    ValueRef self{static_cast<int>(nodes_.size())};
    auto ix = std::make_shared<std::vector<int>>(std::move(idx));
    return push(std::move(out), [a, ix, self](GradTape& t) {
        const Tensor& g = t.grad(self);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t r = 0; r < g.rows(); ++r) ga.at(r, static_cast<std::size_t>((*ix)[r])) += g.data[r];
    });
}

GradTape::ValueRef GradTape::sum_rows(ValueRef a) {
    const Tensor& ta = value(a);
    Tensor out(ta.rows(), 1);
    for (std::size_t r = 0; r < ta.rows(); ++r)
        for (std::size_t c = 0; c < ta.cols(); ++c) out.data[r] += ta.at(r, c);
    ValueRef self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, self](GradTape& t) {
        const Tensor& g = t.grad(self);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t r = 0; r < ga.rows(); ++r)
            for (std::size_t c = 0; c < ga.cols(); ++c) ga.at(r, c) += g.data[r];
    });
}

GradTape::ValueRef GradTape::mean_all(ValueRef a) {
    const Tensor& ta = value(a);
    double s = 0.0;
    for (double v : ta.data) s += v;
    const double inv = 1.0 / static_cast<double>(ta.size());
    ValueRef self{static_cast<int>(nodes_.size())};
    return push(Tensor::scalar(s * inv), [a, inv, self](GradTape& t) {
        const double g = t.grad(self).data[0];
        Tensor& ga = t.grad_mut(a);
        for (double& v : ga.data) v += g * inv;
    });
}

GradTape::ValueRef GradTape::sum_all(ValueRef a) {
    const Tensor& ta = value(a);
    double s = 0.0;
    for (double v : ta.data) s += v;
    ValueRef self{static_cast<int>(nodes_.size())};
    return push(Tensor::scalar(s), [a, self](GradTape& t) {
        const double g = t.grad(self).data[0];
        Tensor& ga = t.grad_mut(a);
        for (double& v : ga.data) v += g;
    });
}

GradTape::ValueRef GradTape::logsumexp_rows(ValueRef a) {
    const Tensor& ta = value(a);
    Tensor out = nn::logsumexp_rows(ta);
    ValueRef self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, self](GradTape& t) {
        const Tensor& g = t.grad(self);
        const Tensor& x = t.value(a);
        const Tensor& y = t.value(self);
        Tensor& ga = t.grad_mut(a);
        // d logsumexp / dx_i = softmax(x)_i
        for (std::size_t r = 0; r < x.rows(); ++r)
            for (std::size_t c = 0; c < x.cols(); ++c)
                ga.at(r, c) += g.data[r] * std::exp(x.at(r, c) - y.data[r]);
    });
}

GradTape::ValueRef GradTape::log_softmax_rows(ValueRef a) {
    const Tensor& ta = value(a);
    Tensor lse = nn::logsumexp_rows(ta);
    Tensor out = ta;
    for (std::size_t r = 0; r < ta.rows(); ++r)
        for (std::size_t c = 0; c < ta.cols(); ++c) out.at(r, c) -= lse.data[r];
    ValueRef self{static_cast<int>(nodes_.size())};
    return push(std::move(out), [a, self](GradTape& t) {
        const Tensor& g = t.grad(self);
        const Tensor& y = t.value(self);  // log-probs
        Tensor& ga = t.grad_mut(a);
        for (std::size_t r = 0; r < y.rows(); ++r) {
            double row_sum = 0.0;
            for (std::size_t c = 0; c < y.cols(); ++c) row_sum += g.at(r, c);
            for (std::size_t c = 0; c < y.cols(); ++c)
                ga.at(r, c) += g.at(r, c) - std::exp(y.at(r, c)) * row_sum;
        }
    });
}

void GradTape::backward(ValueRef root) {
    require(!nodes_.empty(), ErrorKind::NoTape, "backward on empty tape");
    require(!ran_backward_, ErrorKind::NoTape, "backward already ran on this tape");
    const int rid = check(root);
    require(nodes_[rid].value.size() == 1, ErrorKind::ShapeMismatch, "backward root must be scalar");
    ran_backward_ = true;
    nodes_[rid].grad.data[0] = 1.0;
    for (int i = rid; i >= 0; --i)
        if (nodes_[i].backprop) nodes_[i].backprop(*this);
}

}  // namespace calql::nn
