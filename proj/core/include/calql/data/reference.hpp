#pragma once

#include <memory>

#include "calql/data/dataset.hpp"
#include "calql/nn/mlp.hpp"

namespace calql::data {

/// Reference value accessor used for calibration masking. Sources:
///  - McReturn: the batch transition's own return-to-go, broadcast across
///    that row's sampled policy actions (rows flagged mc_unreliable skip
///    masking entirely);
///  - TableQ / NetworkQ: a fitted per-pair estimator queried at the sampled
///    action;
///  - TableV: a fitted per-state estimator;
///  - Disabled: the bound is -inf, which reduces calibrated updates to their
///    plain conservative form exactly.
struct ReferenceValues {
    enum class Kind { Disabled, McReturn, TableQ, TableV, NetworkQ };
    Kind kind = Kind::Disabled;

    std::vector<double> table;  // TableQ: S*A, TableV: S; NaN marks missing
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    std::shared_ptr<nn::Mlp> net;  // NetworkQ over one-hot (state, action)

    static ReferenceValues disabled() { return {}; }
    static ReferenceValues mc_return();
    static ReferenceValues table_q(std::size_t S, std::size_t A, std::vector<double> values);
    static ReferenceValues table_v(std::size_t S, std::vector<double> values);
    static ReferenceValues network_q(std::size_t S, std::size_t A, std::shared_ptr<nn::Mlp> net);

    bool enabled() const { return kind != Kind::Disabled; }

    /// Mask bound for one sampled policy action at one batch row. Throws
    /// MissingReference when a fitted table has no value (unless the row is
    /// flagged unreliable, in which case masking is skipped with -inf).
    double bound(int state, int sampled_action, double row_mc, bool row_unreliable) const;

    /// Batched bound query (one network forward for NetworkQ).
    std::vector<double> bounds(const std::vector<int>& states, const std::vector<int>& actions,
                               const std::vector<double>& row_mc,
                               const std::vector<char>& row_unreliable) const;
};

/// Transition-weighted mean of the reference value over dataset states:
/// the `mean V^mu` side of the calibration comparison. McReturn averages
/// return-to-go over reliable transitions; fitted references are queried at
/// the dataset's own state (and action, for Q estimators).
double mean_reference_value(const OfflineDataset& ds, const ReferenceValues& ref);

enum class ReferenceFamily { Tabular, Network };
enum class FitMethod { McRegression, Sarsa };

struct FitOptions {
    int budget_steps = 2000;  // network fits
    double lr = 1e-2;
    std::uint64_t seed = 0;
    double tol = 1e-9;  // tabular SARSA fixed-point tolerance
    int max_sweeps = 100000;
    std::vector<std::size_t> hidden = {64, 64};
};

struct FittedReference {
    ReferenceValues values;
    double rmse = 0.0;  // final training RMSE
    int steps = 0;      // gradient steps or sweeps actually used
};

/// Fit a reference Q estimator from the dataset.
///  - Tabular + McRegression: per-(s,a) mean of mc_return (exact least squares).
///  - Tabular + Sarsa: synchronous sweeps of Q(s,a) <- mean[r + gamma Q(s',a')]
///    over chained transitions until the fixed point settles.
///  - Network + McRegression: full-batch Adam on squared error to mc_return.
///  - Network + Sarsa: semi-gradient steps toward r + gamma Q(s',a').
FittedReference fit_reference_q(const OfflineDataset& ds, std::size_t n_states, std::size_t n_actions,
                                ReferenceFamily family, FitMethod method, const FitOptions& opts = {});

}  // namespace calql::data
