#pragma once

#include <algorithm>
#include <cmath>

#include "calql/common.hpp"

namespace calql::agents {

enum class Phase { Offline, Online };

/// Conservatism weight, optionally phase-dependent (one value for offline
/// pre-training, another for online fine-tuning). Negative values are
/// rejected at construction.
struct AlphaConfig {
    double offline = 1.0;
    double online = 1.0;

    static AlphaConfig single(double a) {
        require(a >= 0.0, ErrorKind::InvalidArgument, "alpha must be nonnegative");
        return AlphaConfig{a, a};
    }
    static AlphaConfig phased(double offline_a, double online_a) {
        require(offline_a >= 0.0 && online_a >= 0.0, ErrorKind::InvalidArgument,
                "alpha must be nonnegative");
        return AlphaConfig{offline_a, online_a};
    }
};

inline double phase_alpha(const AlphaConfig& cfg, Phase phase) {
    return phase == Phase::Offline ? cfg.offline : cfg.online;
}

/// Lagrangian auto-tuning of alpha against a target regularizer threshold
/// (the target action gap). log-alpha moves along (observed - target) and
/// alpha is clipped to [1e-6, 1e6].
struct DualAlphaState {
    double log_alpha = 0.0;

    double alpha() const { return std::exp(log_alpha); }
};

inline double dual_alpha_update(DualAlphaState& state, double observed_gap, double target_action_gap,
                                double lr = 1e-2) {
    state.log_alpha += lr * (observed_gap - target_action_gap);
    const double lo = std::log(1e-6);
    const double hi = std::log(1e6);
    state.log_alpha = std::clamp(state.log_alpha, lo, hi);
    return state.alpha();
}

/// Per-update critic diagnostics shared by the discrete and continuous
/// agents.
struct CriticDiagnostics {
    double td_loss = 0.0;
    double reg_value = 0.0;  // conservative gap before scaling by alpha
    double alpha_used = 0.0;
    double mean_q_data = 0.0;
    double mean_target = 0.0;
    double bounding_rate = 0.0;
};

}  // namespace calql::agents
