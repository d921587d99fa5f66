#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "artex/experiment.hpp"
#include "artex/metrics.hpp"

namespace artex {

struct Manifest {
  ExperimentConfig config;
  std::vector<TrialSpec> trials;
  std::vector<std::string> trial_ids;
  std::string status;
};

/// Reads <dir>/manifest.json. Throws ManifestError.
Manifest load_manifest(const std::filesystem::path& results_dir);

/// Trial results of one finished run, reloaded from the trial CSVs.
struct LoadedResults {
  Manifest manifest;
  /// cells[s][t * runs + r] for manifest.config.strategies[s].
  std::vector<std::vector<TrialResult>> cells;
};

/// Throws ManifestError when files are missing or malformed.
LoadedResults load_results(const std::filesystem::path& results_dir);

struct ParticipantDistance {
  std::string participant_id;
  StrategyKind strategy = StrategyKind::Random;
  double mean_js = 0.0;
  std::size_t pairs = 0;
};

struct AnalysisReport {
  std::vector<StrategyKind> strategies;
  /// Mean per-cell JS distance between exploration profiles.
  std::vector<std::vector<double>> js_matrix;
  std::vector<double> most_touched;  // per strategy
  std::vector<ConfusionMatrix> confusion;
  std::vector<ParticipantDistance> human_distances;
  std::optional<double> human_most_touched;
  std::optional<ConfusionMatrix> human_confusion;
};

/// Computes the report and, when `write_files`, writes it under
/// <dir>/analysis/. Human trials are matched to experiment trials by
/// trial_id. Throws ManifestError, LogParseError and AlignmentError.
AnalysisReport analyze(const std::filesystem::path& results_dir,
                       const std::optional<std::filesystem::path>& human_log = std::nullopt,
                       bool write_files = true);

}  // namespace artex
