#include "calql/replay/mixed_buffer.hpp"

#include <cmath>

namespace calql::replay {

std::size_t Batch::offline_rows() const {
    std::size_t n = 0;
    for (char c : from_offline) n += c != 0;
    return n;
}

MixedReplayBuffer::MixedReplayBuffer(const data::OfflineDataset* offline, std::size_t online_capacity,
                                     double mixing_ratio)
    : offline_(offline), capacity_(online_capacity), m_(mixing_ratio) {
    require(capacity_ > 0, ErrorKind::InvalidArgument, "online capacity must be positive");
    require((mixing_ratio >= 0.0 && mixing_ratio <= 1.0) || mixing_ratio == -1.0,
            ErrorKind::InvalidArgument, "mixing ratio must be in [0,1] or -1");
}

MixedReplayBuffer::Slot MixedReplayBuffer::push_online(const env::EpisodeStep& step, double mc_return,
                                                       bool mc_unreliable) {
    OnlineRow row{step, mc_return, static_cast<char>(mc_unreliable ? 1 : 0), next_push_id_++};
    Slot slot;
    slot.push_id = row.push_id;
    if (online_.size() < capacity_) {
        slot.index = online_.size();
        online_.push_back(row);
    } else {
        slot.index = head_;
        online_[head_] = row;
        head_ = (head_ + 1) % capacity_;
    }
    return slot;
}

void MixedReplayBuffer::annotate(const Slot& slot, double mc_return) {
    if (slot.index >= online_.size()) return;
    OnlineRow& row = online_[slot.index];
    if (row.push_id != slot.push_id) return;  // evicted and reused
    row.mc_return = mc_return;
    row.mc_unreliable = 0;
}

std::size_t MixedReplayBuffer::offline_count(double m, std::size_t batch_size) {
    return static_cast<std::size_t>(std::floor(m * static_cast<double>(batch_size) + 0.5));
}

Batch MixedReplayBuffer::sample(std::size_t batch_size, Rng& rng, double m) const {
    require(batch_size > 0, ErrorKind::InvalidArgument, "batch size must be positive");
    require((m >= 0.0 && m <= 1.0) || m == -1.0, ErrorKind::InvalidArgument,
            "mixing ratio must be in [0,1] or -1");
    Batch batch;
    batch.transitions.reserve(batch_size);

    auto push_offline = [&](std::size_t i) {
        batch.transitions.push_back(offline_->transitions[i]);
        batch.mc_return.push_back(offline_->mc_return[i]);
        batch.mc_unreliable.push_back(offline_->mc_unreliable[i]);
        batch.from_offline.push_back(1);
    };
    auto push_online_row = [&](std::size_t i) {
        const OnlineRow& row = online_[i];
        batch.transitions.push_back(row.step);
        batch.mc_return.push_back(row.mc_return);
        batch.mc_unreliable.push_back(row.mc_unreliable);
        batch.from_offline.push_back(0);
    };

    if (m == -1.0) {
        const std::size_t n_off = offline_size();
        const std::size_t total = n_off + online_.size();
        require(total > 0, ErrorKind::EmptyOfflineStore, "both stores are empty");
        for (std::size_t i = 0; i < batch_size; ++i) {
            const std::size_t j = rng.uniform_index(total);
            if (j < n_off)
                push_offline(j);
            else
                push_online_row(j - n_off);
        }
        return batch;
    }

    const std::size_t want_off = offline_count(m, batch_size);
    const std::size_t want_on = batch_size - want_off;
    if (want_off > 0)
        require(offline_ != nullptr && !offline_->empty(), ErrorKind::EmptyOfflineStore,
                "offline store is empty");
    if (want_on > 0)
        require(!online_.empty(), ErrorKind::EmptyOnlineStore, "online store is empty");
    for (std::size_t i = 0; i < want_off; ++i) push_offline(rng.uniform_index(offline_->size()));
    for (std::size_t i = 0; i < want_on; ++i) push_online_row(rng.uniform_index(online_.size()));
    return batch;
}

}  // namespace calql::replay
