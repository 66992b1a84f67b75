#pragma once

#include "calql/theory/fqi.hpp"

namespace calql::theory {

/// Per-step state-action occupancies d_h^pi induced by a per-step policy
/// from the initial distribution; index [h][s*A + a].
StepTables state_action_occupancy(const env::TabularMdp& mdp,
                                  const std::vector<env::DiscretePolicy>& policy);

/// Optimality Bellman backup of the next-step table:
/// (T f_{h+1})(s,a) = r(s,a) + sum_s' P(s'|s,a) max_a' f_{h+1}(s',a'),
/// with f_H treated as zero.
std::vector<double> bellman_optimality_backup(const env::TabularMdp& mdp,
                                              const std::vector<double>* f_next);

/// Finite lattice over value tables: every (h,s,a) entry ranges over
/// `levels` evenly spaced values in [0, v_max]. levels^(H*S*A) candidates.
struct LatticeGrid {
    double v_max = 1.0;
    int levels = 2;
};

struct TransferOptions {
    /// Restrict the grid to f >= q_ref everywhere and drop the outer
    /// max{0, .} clamp (the calibrated coefficient). Uncalibrated mode keeps
    /// the clamp.
    bool calibrated = false;
    const StepTables* q_ref = nullptr;  // required when calibrated
};

/// Bellman-error transfer coefficient over an explicit candidate list:
/// max over candidates of
///   sum_h E_{d_h^pi}[T f_{h+1} - f_h] / sqrt(sum_h E_{nu_h}(T f_{h+1} - f_h)^2).
/// Candidates with both numerator and denominator at zero are skipped; a zero
/// denominator with nonzero positive numerator yields +inf. When every
/// candidate is skipped the coefficient is 0.
double transfer_coefficient_over(const env::TabularMdp& mdp,
                                 const std::vector<env::DiscretePolicy>& policy, const StepTables& nu,
                                 const std::vector<StepTables>& candidates,
                                 const TransferOptions& opts);

/// Same coefficient with the candidate set enumerated lazily from a lattice.
/// Throws EmptyGrid for degenerate lattices and InvalidArgument when the
/// lattice would exceed ~10^8 candidates.
double transfer_coefficient(const env::TabularMdp& mdp, const std::vector<env::DiscretePolicy>& policy,
                            const StepTables& nu, const LatticeGrid& grid, const TransferOptions& opts);

}  // namespace calql::theory
