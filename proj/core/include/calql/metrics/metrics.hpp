#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "calql/data/dataset.hpp"

namespace calql::metrics {

/// Goal-achieved rate for sparse goal-reaching tasks.
double normalized_score(int successes, int episodes);

/// Subtask fraction for multi-subtask tasks (# solved / total).
double normalized_score_subtasks(int solved, int total);

/// Mean of (1 - score) over evaluation points; 1.00 is the worst, 0 the best.
double cumulative_regret_metric(const std::vector<double>& scores);

/// Batched Q accessor: values for (state, action) pairs.
using QBatchFn =
    std::function<std::vector<double>(const std::vector<int>&, const std::vector<int>&)>;

/// Mean Q over a seeded subsample of dataset pairs (without replacement; the
/// full dataset when sample_size covers it).
double avg_dataset_q(const QBatchFn& q_fn, const data::OfflineDataset& ds, std::size_t sample_size,
                     std::uint64_t seed);

struct DipReport {
    bool dip = false;
    double depth = 0.0;
    std::optional<std::size_t> recovery_index;  // index into the online series
};

/// Flags an initial unlearning dip: the minimum of the first `window` online
/// scores fell below offline_final_score - tolerance. depth is the drop from
/// the offline score to that minimum (never negative); recovery_index is the
/// first online evaluation at or after the minimum that regains the offline
/// score.
DipReport detect_unlearning_dip(const std::vector<double>& online_scores, double offline_final_score,
                                std::size_t window, double tolerance);

}  // namespace calql::metrics
