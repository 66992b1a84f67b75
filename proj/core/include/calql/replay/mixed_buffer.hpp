#pragma once

#include <vector>

#include "calql/data/dataset.hpp"
#include "calql/rng.hpp"

namespace calql::replay {

/// A sampled training batch. Offline rows come first, then online rows
/// (uniform with replacement within each store). mc_unreliable marks rows
/// whose return-to-go must not be used for calibration masking (truncated
/// offline trajectories and per-step online pushes).
struct Batch {
    std::vector<env::EpisodeStep> transitions;
    std::vector<double> mc_return;
    std::vector<char> mc_unreliable;
    std::vector<char> from_offline;

    std::size_t size() const { return transitions.size(); }
    std::size_t offline_rows() const;
};

/// Offline store + bounded online FIFO with mixing-ratio sampling.
/// m in [0,1] fixes the offline fraction of every batch exactly
/// (round-half-up of m*B); m = -1 appends the stores and samples uniformly.
class MixedReplayBuffer {
public:
    MixedReplayBuffer(const data::OfflineDataset* offline, std::size_t online_capacity,
                      double mixing_ratio);

    double mixing_ratio() const { return m_; }
    std::size_t offline_size() const { return offline_ ? offline_->size() : 0; }
    std::size_t online_size() const { return online_.size(); }

    /// Ticket for a pushed online transition, usable to attach its
    /// return-to-go once the episode has finished.
    struct Slot {
        std::size_t index = 0;
        std::uint64_t push_id = 0;
    };

    /// Append one online transition, evicting the oldest at capacity.
    /// Per-step pushes carry no return-to-go, so the row is flagged
    /// mc_unreliable; the annotated overload is for callers that insert
    /// completed episodes with computed returns.
    Slot push_online(const env::EpisodeStep& step) { return push_online(step, 0.0, true); }
    Slot push_online(const env::EpisodeStep& step, double mc_return, bool mc_unreliable);

    /// Attach a return-to-go to a previously pushed transition. A no-op when
    /// the slot has already been evicted.
    void annotate(const Slot& slot, double mc_return);

    /// One batch under the buffer's mixing ratio.
    Batch sample(std::size_t batch_size, Rng& rng) const { return sample(batch_size, rng, m_); }
    /// One batch under an explicit ratio (the fine-tuning cold-start falls
    /// back to m=1 through this overload).
    Batch sample(std::size_t batch_size, Rng& rng, double m) const;
    Batch sample_seeded(std::size_t batch_size, std::uint64_t seed) const {
        Rng rng(seed);
        return sample(batch_size, rng, m_);
    }

    /// round-half-up(m*B): the exact offline row count for m in [0,1].
    static std::size_t offline_count(double m, std::size_t batch_size);

private:
    struct OnlineRow {
        env::EpisodeStep step;
        double mc_return;
        char mc_unreliable;
        std::uint64_t push_id;
    };

    const data::OfflineDataset* offline_;
    std::size_t capacity_;
    double m_;
    std::vector<OnlineRow> online_;  // ring buffer
    std::size_t head_ = 0;           // insertion point once full
    std::uint64_t next_push_id_ = 0;
};

}  // namespace calql::replay
