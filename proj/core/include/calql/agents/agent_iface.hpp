#pragma once

#include "calql/agents/alpha.hpp"
#include "calql/data/reference.hpp"
#include "calql/replay/mixed_buffer.hpp"

namespace calql::agents {

/// What the experiment harness needs from a discrete-action agent. The
/// gradient-trained agent and the exact-tabular oracle agent both implement
/// this surface.
class DiscreteAgent {
public:
    virtual ~DiscreteAgent() = default;

    virtual int sample_action(int state, Rng& rng) const = 0;
    virtual int greedy_action(int state) const = 0;
    virtual std::vector<double> action_log_probs(int state) const = 0;

    virtual CriticDiagnostics critic_update(const replay::Batch& batch,
                                            const data::ReferenceValues& ref, Phase phase,
                                            Rng& rng) = 0;
    virtual double actor_update(const replay::Batch& batch) = 0;

    virtual std::vector<double> q_values(const std::vector<int>& states,
                                         const std::vector<int>& actions) const = 0;
    virtual std::vector<double> q_row(int state) const = 0;
    virtual double bounding_rate_diagnostic(const data::OfflineDataset& ds,
                                            const data::ReferenceValues& ref,
                                            std::size_t sample_size, std::uint64_t seed) const = 0;
    virtual double temperature() const = 0;
    virtual long updates_done() const = 0;
};

}  // namespace calql::agents
