#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "artex/config.hpp"
#include "artex/engine.hpp"
#include "artex/metrics.hpp"

namespace artex {

/// Seed shared by every strategy for one (trial, run) cell, so strategies
/// start from the same baseline and touches.
std::uint64_t cell_seed(std::uint64_t master, std::size_t trial, int run) noexcept;

/// "trial000", "trial001", ...
std::string trial_id(std::size_t index);

/// Applies the output-root override variable ARTEX_OUTPUT_ROOT to relative
/// paths.
std::filesystem::path resolve_output_dir(const std::filesystem::path& dir);

struct ExperimentOptions {
  /// Forwarded to every trial; must be safe to call from several threads.
  TrialHooks hooks;
  /// Progress lines, one per finished cell.
  std::ostream* progress = nullptr;
  /// Skip file emission entirely.
  bool write_files = true;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialSpec> trials;  // seed fields unset; see cell_seed
  /// results[s][t][r] for strategy config.strategies[s], trial t, run r.
  std::vector<std::vector<std::vector<TrialResult>>> results;
  std::filesystem::path output_dir;

  /// All cells of one strategy in (trial, run) order.
  std::vector<TrialResult> flatten(std::size_t strategy_index) const;
};

/// Runs strategies x trials x runs and writes the output tree:
///   manifest.json, index.csv, final_accuracy.csv,
///   trials/<strategy>/<trial>_run<r>.csv,
///   summary/<strategy>_<metric>.csv and <strategy>_<metric>_by_trial.csv,
///   confusion/<strategy>.csv.
/// Files are written atomically. On failure, completed trial files stay,
/// FAILED holds the error and the error is rethrown.
ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentOptions& options = {});

/// Trial CSV header and round rows (round 0 is the baseline).
void write_trial_csv(std::ostream& out, const TrialResult& result, const std::string& trial_id, int run);

/// Rebuilds the round metrics, touch counts and final prediction of a trial
/// from its CSV. Throws ManifestError.
TrialResult read_trial_csv(std::istream& in, const TrialSpec& spec, StrategyKind strategy);

/// `step,mean,std` rows.
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Per-round statistics after first averaging each trial's runs.
Summary summarize_by_trial(const std::vector<std::vector<TrialResult>>& by_trial);

struct SweepRow {
  std::string setting;
  StrategyKind strategy = StrategyKind::Random;
  SummaryRow final_accuracy;
};

struct SweepResult {
  std::vector<std::string> settings;
  std::vector<SweepRow> rows;
};

/// Config for one sweep value; the label names the output subdirectory.
std::pair<std::string, ExperimentConfig> sweep_setting(const ExperimentConfig& base, const std::string& value);

/// Runs one experiment per sweep value under <output>/<label>/ and writes
/// sweep_table.csv (long form) and sweep_table_wide.csv (settings x
/// strategies).
SweepResult ablation_sweep(const ExperimentConfig& base, const ExperimentOptions& options = {});

/// Writes `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace artex
