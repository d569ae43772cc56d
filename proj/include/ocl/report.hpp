#pragma once

#include <map>
#include <string>

#include "ocl/harness.hpp"
#include "ocl/metrics.hpp"

namespace ocl {

/// Render with 6 significant digits (the summary-file number format).
std::string format_sig6(double v);
/// Full-precision rendering that round-trips through parsing exactly.
std::string format_exact(double v);

/// Write the experiment outputs into out_dir:
///   accuracy_matrix_seed<seed>.csv  - header task_i,task_j,accuracy (1-based
///                                     indices, full-precision accuracy)
///   summary.txt                     - config echo, per-seed A_T / F_T and
///                                     aggregates, 6 significant digits
///   diagnostics_seed<seed>.csv      - when diagnostics were recorded
///   buffer_seed<seed>.ocld(.scores) - when the buffer dump was requested
/// Output bytes are a pure function of (cfg, result).
void emit_report(const ExperimentConfig& cfg, const RunResult& result,
                 const std::string& out_dir);

/// Sweep outputs: sweep.csv keyed by the axes plus one subdirectory per cell.
void emit_sweep_report(const SweepReport& report, const std::string& out_dir);

/// Parse an accuracy-matrix CSV back into the triangular table.
AccuracyMatrix read_matrix_csv(const std::string& path);

/// Parse a summary file into its key -> value map (config echo included).
std::map<std::string, std::string> read_summary(const std::string& path);

}  // namespace ocl
