#include "calql/data/reference.hpp"

#include <cmath>
#include <limits>

#include "calql/nn/adam.hpp"
#include "calql/nn/features.hpp"

namespace calql::data {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

ReferenceValues ReferenceValues::mc_return() {
    ReferenceValues r;
    r.kind = Kind::McReturn;
    return r;
}

ReferenceValues ReferenceValues::table_q(std::size_t S, std::size_t A, std::vector<double> values) {
    require(values.size() == S * A, ErrorKind::ShapeMismatch, "reference table has wrong size");
    ReferenceValues r;
    r.kind = Kind::TableQ;
    r.n_states = S;
    r.n_actions = A;
    r.table = std::move(values);
    return r;
}

ReferenceValues ReferenceValues::table_v(std::size_t S, std::vector<double> values) {
    require(values.size() == S, ErrorKind::ShapeMismatch, "reference table has wrong size");
    ReferenceValues r;
    r.kind = Kind::TableV;
    r.n_states = S;
    r.table = std::move(values);
    return r;
}

ReferenceValues ReferenceValues::network_q(std::size_t S, std::size_t A, std::shared_ptr<nn::Mlp> net) {
    require(net != nullptr, ErrorKind::InvalidArgument, "reference network is null");
    require(net->input_width() == S + A && net->output_width() == 1, ErrorKind::ShapeMismatch,
            "reference network must map one-hot (state,action) to a scalar");
    ReferenceValues r;
    r.kind = Kind::NetworkQ;
    r.n_states = S;
    r.n_actions = A;
    r.net = std::move(net);
    return r;
}

double ReferenceValues::bound(int state, int sampled_action, double row_mc, bool row_unreliable) const {
    switch (kind) {
        case Kind::Disabled: return kNegInf;
        case Kind::McReturn: return row_unreliable ? kNegInf : row_mc;
        case Kind::TableV: {
            const double v = table[static_cast<std::size_t>(state)];
            if (std::isnan(v)) {
                if (row_unreliable) return kNegInf;
                fail(ErrorKind::MissingReference, "no reference value for state " + std::to_string(state));
            }
            return v;
        }
        case Kind::TableQ: {
            const double v = table[static_cast<std::size_t>(state) * n_actions +
                                   static_cast<std::size_t>(sampled_action)];
            if (std::isnan(v)) {
                if (row_unreliable) return kNegInf;
                fail(ErrorKind::MissingReference, "no reference value for pair (" + std::to_string(state) +
                                                      "," + std::to_string(sampled_action) + ")");
            }
            return v;
        }
        case Kind::NetworkQ: {
            nn::Tensor x = nn::one_hot_pair({state}, {sampled_action}, n_states, n_actions);
            return net->forward(x).data[0];
        }
    }
    return kNegInf;
}

std::vector<double> ReferenceValues::bounds(const std::vector<int>& states,
                                            const std::vector<int>& actions,
                                            const std::vector<double>& row_mc,
                                            const std::vector<char>& row_unreliable) const {
    const std::size_t n = states.size();
    std::vector<double> out(n, kNegInf);
    if (kind == Kind::NetworkQ) {
        nn::Tensor x = nn::one_hot_pair(states, actions, n_states, n_actions);
        nn::Tensor q = net->forward(x);
        for (std::size_t i = 0; i < n; ++i) out[i] = q.data[i];
        return out;
    }
    for (std::size_t i = 0; i < n; ++i)
        out[i] = bound(states[i], actions[i], row_mc[i], row_unreliable[i] != 0);
    return out;
}

double mean_reference_value(const OfflineDataset& ds, const ReferenceValues& ref) {
    require(!ds.empty(), ErrorKind::EmptyDataset, "dataset is empty");
    require(ref.enabled(), ErrorKind::MissingReference, "reference is disabled");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const bool unreliable = ds.mc_unreliable[i] != 0;
        if (ref.kind == ReferenceValues::Kind::McReturn) {
            if (unreliable) continue;
            sum += ds.mc_return[i];
        } else {
            sum += ref.bound(ds.transitions[i].state, ds.transitions[i].action, ds.mc_return[i], false);
        }
        ++n;
    }
    require(n > 0, ErrorKind::MissingReference, "no reliable reference values in dataset");
    return sum / static_cast<double>(n);
}

namespace {

// Successor action per transition (SARSA pairing); -1 where there is none.
std::vector<int> successor_actions(const OfflineDataset& ds) {
    std::vector<int> next_a(ds.size(), -1);
    for (std::size_t i = 0; i + 1 < ds.size(); ++i) {
        if (ds.traj_id[i] == ds.traj_id[i + 1] && ds.step_idx[i] + 1 == ds.step_idx[i + 1])
            next_a[i] = ds.transitions[i + 1].action;
    }
    return next_a;
}

FittedReference fit_tabular_regression(const OfflineDataset& ds, std::size_t S, std::size_t A) {
    std::vector<double> sum(S * A, 0.0);
    std::vector<std::size_t> count(S * A, 0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& t = ds.transitions[i];
        const std::size_t k = static_cast<std::size_t>(t.state) * A + static_cast<std::size_t>(t.action);
        sum[k] += ds.mc_return[i];
        count[k] += 1;
    }
    std::vector<double> table(S * A, kNaN);
    for (std::size_t k = 0; k < table.size(); ++k)
        if (count[k] > 0) table[k] = sum[k] / static_cast<double>(count[k]);
    double sq = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& t = ds.transitions[i];
        const std::size_t k = static_cast<std::size_t>(t.state) * A + static_cast<std::size_t>(t.action);
        const double e = table[k] - ds.mc_return[i];
        sq += e * e;
    }
    FittedReference fit;
    fit.values = ReferenceValues::table_q(S, A, std::move(table));
    fit.rmse = std::sqrt(sq / static_cast<double>(ds.size()));
    fit.steps = 1;
    return fit;
}

FittedReference fit_tabular_sarsa(const OfflineDataset& ds, std::size_t S, std::size_t A,
                                  const FitOptions& opts) {
    const std::vector<int> next_a = successor_actions(ds);
    const double gamma = ds.gamma_used;

    // Transitions usable for the fixed point: terminal steps and steps with a
    // chained successor action. Truncated tails have no (s',a') pair.
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (ds.transitions[i].done || next_a[i] >= 0) usable.push_back(i);
    require(!usable.empty(), ErrorKind::EmptyDataset, "no chained transitions for SARSA fit");

    std::vector<double> q(S * A, 0.0);
    std::vector<char> visited(S * A, 0);
    for (std::size_t i : usable) {
        const auto& t = ds.transitions[i];
        visited[static_cast<std::size_t>(t.state) * A + static_cast<std::size_t>(t.action)] = 1;
    }

    int sweeps = 0;
    double delta = std::numeric_limits<double>::infinity();
    std::vector<double> target_sum(S * A);
    std::vector<std::size_t> target_count(S * A);
    while (delta > opts.tol && sweeps < opts.max_sweeps) {
        std::fill(target_sum.begin(), target_sum.end(), 0.0);
        std::fill(target_count.begin(), target_count.end(), 0);
        for (std::size_t i : usable) {
            const auto& t = ds.transitions[i];
            const std::size_t k =
                static_cast<std::size_t>(t.state) * A + static_cast<std::size_t>(t.action);
            double target = t.reward;
            if (!t.done)
                target += gamma * q[static_cast<std::size_t>(t.next_state) * A +
                                    static_cast<std::size_t>(next_a[i])];
            target_sum[k] += target;
            target_count[k] += 1;
        }
        delta = 0.0;
        for (std::size_t k = 0; k < q.size(); ++k) {
            if (target_count[k] == 0) continue;
            const double nq = target_sum[k] / static_cast<double>(target_count[k]);
            delta = std::max(delta, std::abs(nq - q[k]));
            q[k] = nq;
        }
        ++sweeps;
    }

    double sq = 0.0;
    for (std::size_t i : usable) {
        const auto& t = ds.transitions[i];
        const std::size_t k = static_cast<std::size_t>(t.state) * A + static_cast<std::size_t>(t.action);
        double target = t.reward;
        if (!t.done)
            target += gamma * q[static_cast<std::size_t>(t.next_state) * A +
                                static_cast<std::size_t>(next_a[i])];
        const double e = q[k] - target;
        sq += e * e;
    }

    std::vector<double> table(S * A, kNaN);
    for (std::size_t k = 0; k < table.size(); ++k)
        if (visited[k]) table[k] = q[k];

    FittedReference fit;
    fit.values = ReferenceValues::table_q(S, A, std::move(table));
    fit.rmse = std::sqrt(sq / static_cast<double>(usable.size()));
    fit.steps = sweeps;
    return fit;
}

FittedReference fit_network(const OfflineDataset& ds, std::size_t S, std::size_t A, FitMethod method,
                            const FitOptions& opts) {
    std::vector<int> states, actions, next_states, next_actions_v;
    states.reserve(ds.size());
    actions.reserve(ds.size());
    const std::vector<int> next_a = successor_actions(ds);

    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (method == FitMethod::Sarsa && !ds.transitions[i].done && next_a[i] < 0) continue;
        rows.push_back(i);
    }
    require(!rows.empty(), ErrorKind::EmptyDataset, "no usable transitions for network fit");

    for (std::size_t i : rows) {
        states.push_back(ds.transitions[i].state);
        actions.push_back(ds.transitions[i].action);
        next_states.push_back(ds.transitions[i].next_state);
        next_actions_v.push_back(next_a[i] >= 0 ? next_a[i] : 0);
    }

    Rng rng(opts.seed);
    std::vector<std::size_t> widths{S + A};
    widths.insert(widths.end(), opts.hidden.begin(), opts.hidden.end());
    widths.push_back(1);
    auto net = std::make_shared<nn::Mlp>(nn::Mlp::create(widths, nn::Activation::Tanh, rng));

    nn::Tensor x = nn::one_hot_pair(states, actions, S, A);
    nn::Tensor x_next = nn::one_hot_pair(next_states, next_actions_v, S, A);
    nn::AdamConfig adam_cfg;
    adam_cfg.lr = opts.lr;
    nn::AdamState adam;
    const std::size_t B = rows.size();

    double rmse = 0.0;
    for (int step = 0; step < opts.budget_steps; ++step) {
        // Regression targets: mc_return, or the semi-gradient SARSA target
        // recomputed from the current network.
        nn::Tensor y(B, 1);
        if (method == FitMethod::McRegression) {
            for (std::size_t j = 0; j < B; ++j) y.data[j] = ds.mc_return[rows[j]];
        } else {
            nn::Tensor qn = net->forward(x_next);
            for (std::size_t j = 0; j < B; ++j) {
                const auto& t = ds.transitions[rows[j]];
                y.data[j] = t.reward + (t.done ? 0.0 : ds.gamma_used * qn.data[j]);
            }
        }
        nn::GradTape tape;
        auto xin = tape.input(x);
        auto rec = net->forward(tape, xin);
        auto err = tape.sub(rec.output, tape.input(y));
        auto loss = tape.mean_all(tape.square(err));
        tape.backward(loss);
        std::vector<nn::Tensor> grads = nn::zero_grads(*net);
        nn::accumulate_grads(tape, rec, grads);
        nn::adam_step(net->parameters(), grads, adam, adam_cfg);
        rmse = std::sqrt(tape.value(loss).item());
    }

    FittedReference fit;
    fit.values = ReferenceValues::network_q(S, A, net);
    fit.rmse = rmse;
    fit.steps = opts.budget_steps;
    return fit;
}

}  // namespace

FittedReference fit_reference_q(const OfflineDataset& ds, std::size_t n_states, std::size_t n_actions,
                                ReferenceFamily family, FitMethod method, const FitOptions& opts) {
    require(!ds.empty(), ErrorKind::EmptyDataset, "dataset is empty");
    if (family == ReferenceFamily::Tabular) {
        return method == FitMethod::McRegression ? fit_tabular_regression(ds, n_states, n_actions)
                                                 : fit_tabular_sarsa(ds, n_states, n_actions, opts);
    }
    return fit_network(ds, n_states, n_actions, method, opts);
}

}  // namespace calql::data
