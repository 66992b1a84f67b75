#pragma once

#include <string>
#include <vector>

#include "calql/agents/alpha.hpp"

namespace calql::harness {

/// One evaluation record: the per-checkpoint training diagnostics.
struct RunRecord {
    long step = 0;
    agents::Phase phase = agents::Phase::Offline;
    double normalized_score = 0.0;
    double avg_dataset_q = 0.0;
    double bounding_rate = 0.0;
    double cum_regret_metric = 0.0;  // running mean of (1 - score) within the phase
};

/// Append-only JSON-lines log. The header goes first; records are monotone
/// in step within each phase. Serialization is byte-deterministic (%.17g
/// floats, no timestamps), so identical (config, seed) runs hash identically.
class RunLog {
public:
    RunLog(const std::string& config_hash, std::uint64_t seed, const std::string& code_version);

    void add_eval(const RunRecord& rec);
    void add_train(long step, agents::Phase phase, double critic_loss, double actor_loss,
                   double reg_value, double alpha, double temperature);

    const std::vector<RunRecord>& records() const { return records_; }
    const std::string& text() const { return text_; }
    std::uint64_t content_hash() const;

    void write(const std::string& path) const;

    /// Scores of eval records in one phase, in step order.
    std::vector<double> scores(agents::Phase phase) const;

private:
    std::vector<RunRecord> records_;
    std::string text_;
    long last_step_[2] = {-1, -1};
};

}  // namespace calql::harness
