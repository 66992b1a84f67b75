#pragma once

#include <string>
#include <vector>

namespace calql::harness {

struct PlotEmitReport {
    std::vector<std::string> written;   // CSV paths
    std::vector<std::string> warnings;  // grid mismatches etc.
};

/// Aggregate run logs (*.jsonl) and theory regret tables (*.theory.csv)
/// found in runs_dir into per-metric CSVs `step, mean, stderr, n_seeds`
/// under out_dir. Runs are grouped by config hash; step grids that differ
/// across seeds are aligned by intersection with a warning.
PlotEmitReport emit_plot_data(const std::string& runs_dir, const std::string& out_dir);

}  // namespace calql::harness
