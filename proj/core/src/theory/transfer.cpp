#include "calql/theory/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace calql::theory {

namespace {
constexpr double kZeroTol = 1e-12;
}

StepTables state_action_occupancy(const env::TabularMdp& mdp,
                                  const std::vector<env::DiscretePolicy>& policy) {
    require(mdp.horizon.has_value(), ErrorKind::InvalidArgument, "occupancies need horizon mode");
    const std::size_t H = static_cast<std::size_t>(*mdp.horizon);
    const std::size_t S = mdp.n_states;
    const std::size_t A = mdp.n_actions;
    require(policy.size() == H, ErrorKind::ShapeMismatch, "need one policy per time step");

    StepTables occ(H, std::vector<double>(S * A, 0.0));
    std::vector<double> d_state = mdp.initial_dist;
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < A; ++a) occ[h][s * A + a] = d_state[s] * policy[h].prob(s, a);
        if (h + 1 == H) break;
        std::vector<double> next(S, 0.0);
        for (std::size_t s = 0; s < S; ++s) {
            if (d_state[s] <= 0.0) continue;
            for (std::size_t a = 0; a < A; ++a) {
                const double w = occ[h][s * A + a];
                if (w <= 0.0) continue;
                if (mdp.is_terminal(s)) {
                    next[s] += w;  // absorbing
                    continue;
                }
                for (std::size_t s2 = 0; s2 < S; ++s2) next[s2] += w * mdp.p(s, a, s2);
            }
        }
        d_state = std::move(next);
    }
    return occ;
}

std::vector<double> bellman_optimality_backup(const env::TabularMdp& mdp,
                                              const std::vector<double>* f_next) {
    const std::size_t S = mdp.n_states;
    const std::size_t A = mdp.n_actions;
    std::vector<double> out(S * A);
    std::vector<double> vmax(S, 0.0);
    if (f_next) {
        for (std::size_t s2 = 0; s2 < S; ++s2) {
            double best = (*f_next)[s2 * A];
            for (std::size_t a = 1; a < A; ++a) best = std::max(best, (*f_next)[s2 * A + a]);
            vmax[s2] = best;
        }
    }
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a = 0; a < A; ++a) {
            double x = mdp.r(s, a);
            if (f_next && !mdp.is_terminal(s)) {
                double ev = 0.0;
                for (std::size_t s2 = 0; s2 < S; ++s2) ev += mdp.p(s, a, s2) * vmax[s2];
                x += ev;
            }
            out[s * A + a] = x;
        }
    return out;
}

namespace {

struct RatioAccumulator {
    const env::TabularMdp& mdp;
    const StepTables& d_pi;
    const StepTables& nu;
    std::size_t H, S, A;

    // Ratio for one candidate; NaN encodes "skip".
    double evaluate(const StepTables& f) const {
        double num = 0.0;
        double den_sq = 0.0;
        for (std::size_t h = 0; h < H; ++h) {
            const std::vector<double>* next = h + 1 < H ? &f[h + 1] : nullptr;
            const std::vector<double> backed = bellman_optimality_backup(mdp, next);
            for (std::size_t key = 0; key < S * A; ++key) {
                const double err = backed[key] - f[h][key];
                num += d_pi[h][key] * err;
                den_sq += nu[h][key] * err * err;
            }
        }
        const double den = std::sqrt(den_sq);
        if (den <= kZeroTol) {
            if (std::abs(num) <= kZeroTol) return std::numeric_limits<double>::quiet_NaN();
            return num > 0.0 ? std::numeric_limits<double>::infinity()
                             : std::numeric_limits<double>::quiet_NaN();
        }
        return num / den;
    }
};

bool admits(const StepTables& f, const StepTables& q_ref) {
    for (std::size_t h = 0; h < f.size(); ++h)
        for (std::size_t key = 0; key < f[h].size(); ++key)
            if (f[h][key] < q_ref[h][key] - kZeroTol) return false;
    return true;
}

}  // namespace

double transfer_coefficient_over(const env::TabularMdp& mdp,
                                 const std::vector<env::DiscretePolicy>& policy, const StepTables& nu,
                                 const std::vector<StepTables>& candidates,
                                 const TransferOptions& opts) {
    require(!candidates.empty(), ErrorKind::EmptyGrid, "candidate set is empty");
    require(mdp.horizon.has_value(), ErrorKind::InvalidArgument, "transfer coefficient needs horizon mode");
    if (opts.calibrated)
        require(opts.q_ref != nullptr, ErrorKind::InvalidArgument, "calibrated mode needs q_ref");

    const std::size_t H = static_cast<std::size_t>(*mdp.horizon);
    const StepTables d_pi = state_action_occupancy(mdp, policy);
    RatioAccumulator acc{mdp, d_pi, nu, H, mdp.n_states, mdp.n_actions};

    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (const StepTables& f : candidates) {
        require(f.size() == H, ErrorKind::ShapeMismatch, "candidate must cover every time step");
        if (opts.calibrated && !admits(f, *opts.q_ref)) continue;
        const double ratio = acc.evaluate(f);
        if (std::isnan(ratio)) continue;
        any = true;
        best = std::max(best, ratio);
        if (std::isinf(best)) break;
    }
    if (!any) return 0.0;
    return opts.calibrated ? best : std::max(0.0, best);
}

double transfer_coefficient(const env::TabularMdp& mdp, const std::vector<env::DiscretePolicy>& policy,
                            const StepTables& nu, const LatticeGrid& grid, const TransferOptions& opts) {
    require(grid.levels >= 1, ErrorKind::EmptyGrid, "lattice needs at least one level");
    require(grid.v_max >= 0.0, ErrorKind::InvalidArgument, "v_max must be nonnegative");
    require(mdp.horizon.has_value(), ErrorKind::InvalidArgument, "transfer coefficient needs horizon mode");
    if (opts.calibrated)
        require(opts.q_ref != nullptr, ErrorKind::InvalidArgument, "calibrated mode needs q_ref");

    const std::size_t H = static_cast<std::size_t>(*mdp.horizon);
    const std::size_t cells = H * mdp.n_states * mdp.n_actions;
    double total = std::pow(static_cast<double>(grid.levels), static_cast<double>(cells));
    require(total <= 1e8, ErrorKind::InvalidArgument,
            "lattice too large to enumerate; reduce levels or the MDP size");

    std::vector<double> level_values(static_cast<std::size_t>(grid.levels), 0.0);
    for (int i = 0; i < grid.levels; ++i)
        level_values[static_cast<std::size_t>(i)] =
            grid.levels == 1 ? 0.0
                             : grid.v_max * static_cast<double>(i) / static_cast<double>(grid.levels - 1);

    const StepTables d_pi = state_action_occupancy(mdp, policy);
    RatioAccumulator acc{mdp, d_pi, nu, H, mdp.n_states, mdp.n_actions};

    // Odometer over the lattice digits.
    std::vector<int> digits(cells, 0);
    StepTables f(H, std::vector<double>(mdp.n_states * mdp.n_actions, level_values[0]));
    const std::size_t per_step = mdp.n_states * mdp.n_actions;

    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    const std::uint64_t count = static_cast<std::uint64_t>(total);
    for (std::uint64_t iter = 0;; ++iter) {
        if (!opts.calibrated || admits(f, *opts.q_ref)) {
            const double ratio = acc.evaluate(f);
            if (!std::isnan(ratio)) {
                any = true;
                best = std::max(best, ratio);
                if (std::isinf(best)) break;
            }
        }
        if (iter + 1 >= count) break;
        // Increment the odometer.
        std::size_t pos = 0;
        while (pos < cells) {
            digits[pos] += 1;
            if (digits[pos] < grid.levels) break;
            digits[pos] = 0;
            f[pos / per_step][pos % per_step] = level_values[0];
            ++pos;
        }
        f[pos / per_step][pos % per_step] = level_values[static_cast<std::size_t>(digits[pos])];
    }
    if (!any) return 0.0;
    return opts.calibrated ? best : std::max(0.0, best);
}

}  // namespace calql::theory
