#include "calql/nn/tensor.hpp"

#include <algorithm>
#include <limits>

namespace calql::nn {

double logsumexp(const double* values, std::size_t n) {
    require(n > 0, ErrorKind::InvalidArgument, "logsumexp of empty range");
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, values[i]);
    if (!std::isfinite(m)) return m;  // all -inf (or a +inf dominates)
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::exp(values[i] - m);
    return m + std::log(s);
}

double logsumexp(const std::vector<double>& values) { return logsumexp(values.data(), values.size()); }

Tensor logsumexp_rows(const Tensor& t) {
    Tensor out(t.rows(), 1);
    for (std::size_t r = 0; r < t.rows(); ++r)
        out.data[r] = logsumexp(t.data.data() + r * t.cols(), t.cols());
    return out;
}

}  // namespace calql::nn
