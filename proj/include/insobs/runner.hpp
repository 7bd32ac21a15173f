// Experiment orchestration: simulate the configured scenario, run each
// requested observer, export time series (CSV) and a JSON summary with all
// observability scalars. Deterministic: (config, seeds) fix every output
// byte on one platform; wall time is reported to the console only.
#pragma once

#include <json.hpp>

#include "insobs/config.hpp"

namespace insobs {

struct RunSummary {
    nlohmann::ordered_json summary;
    std::vector<std::string> files_written;
    double wall_seconds = 0.0;
};

/// Runs every observer in cfg.observers and writes
/// <dir>/<name>_summary.json plus per-observer CSVs. output_dir overrides
/// cfg.output.directory when non-empty.
RunSummary run_experiment(const ExperimentConfig& cfg, const std::string& output_dir = "");

/// N seeded EKF runs (seed_i = base_seed + i), concurrent but with
/// deterministic output: per-run terminal estimates and manifold residuals
/// plus aggregate percentile statistics.
RunSummary monte_carlo(const ExperimentConfig& cfg, const std::string& output_dir = "");

/// Writes the simulated IMU stream as CSV (t, wx, wy, wz, fx, fy, fz and
/// derivative columns when requested; derivative cells are empty where
/// absent).
RunSummary dump_imu(const ExperimentConfig& cfg, bool with_derivatives,
                    const std::string& output_dir = "");

}  // namespace insobs
