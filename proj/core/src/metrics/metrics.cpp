#include "calql/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace calql::metrics {

double normalized_score(int successes, int episodes) {
    require(episodes > 0, ErrorKind::InvalidArgument, "score needs at least one episode");
    require(successes >= 0 && successes <= episodes, ErrorKind::InvalidArgument,
            "successes outside [0, episodes]");
    return static_cast<double>(successes) / static_cast<double>(episodes);
}

double normalized_score_subtasks(int solved, int total) {
    require(total > 0, ErrorKind::InvalidArgument, "score needs at least one subtask");
    require(solved >= 0 && solved <= total, ErrorKind::InvalidArgument, "solved outside [0, total]");
    return static_cast<double>(solved) / static_cast<double>(total);
}

double cumulative_regret_metric(const std::vector<double>& scores) {
    require(!scores.empty(), ErrorKind::InvalidArgument, "score series is empty");
    double s = 0.0;
    for (double v : scores) {
        require(v >= 0.0 && v <= 1.0, ErrorKind::InvalidArgument, "score outside [0,1]");
        s += 1.0 - v;
    }
    return s / static_cast<double>(scores.size());
}

double avg_dataset_q(const QBatchFn& q_fn, const data::OfflineDataset& ds, std::size_t sample_size,
                     std::uint64_t seed) {
    require(!ds.empty(), ErrorKind::EmptyDataset, "dataset is empty");
    std::vector<int> states, actions;
    if (sample_size >= ds.size()) {
        for (const auto& t : ds.transitions) {
            states.push_back(t.state);
            actions.push_back(t.action);
        }
    } else {
        // Seeded partial Fisher-Yates: a uniform sample without replacement.
        Rng rng(seed);
        std::vector<std::size_t> idx(ds.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (std::size_t i = 0; i < sample_size; ++i) {
            const std::size_t j = i + rng.uniform_index(idx.size() - i);
            std::swap(idx[i], idx[j]);
            states.push_back(ds.transitions[idx[i]].state);
            actions.push_back(ds.transitions[idx[i]].action);
        }
    }
    const std::vector<double> q = q_fn(states, actions);
    double s = 0.0;
    for (double v : q) s += v;
    return s / static_cast<double>(q.size());
}

DipReport detect_unlearning_dip(const std::vector<double>& online_scores, double offline_final_score,
                                std::size_t window, double tolerance) {
    require(window >= 1, ErrorKind::InvalidArgument, "window must be >= 1");
    require(online_scores.size() >= window, ErrorKind::InvalidArgument,
            "series shorter than the detection window");
    std::size_t argmin = 0;
    for (std::size_t i = 1; i < window; ++i)
        if (online_scores[i] < online_scores[argmin]) argmin = i;
    const double lowest = online_scores[argmin];

    DipReport report;
    report.depth = std::max(0.0, offline_final_score - lowest);
    report.dip = lowest < offline_final_score - tolerance;
    for (std::size_t i = argmin; i < online_scores.size(); ++i) {
        if (online_scores[i] >= offline_final_score) {
            report.recovery_index = i;
            break;
        }
    }
    return report;
}

}  // namespace calql::metrics
