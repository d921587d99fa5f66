#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "artex/acquisition.hpp"
#include "artex/classifier.hpp"
#include "artex/dataset.hpp"
#include "artex/engine.hpp"

namespace artex {

enum class DatasetSource { Synthetic, Directory };
enum class TrialMode { Sample, List, Balanced };

/// Named synthetic class sets: "easy", "hard", "frequency", "suite8".
std::vector<SyntheticClassParams> synthetic_preset(std::string_view name);

struct DatasetConfig {
  DatasetSource source = DatasetSource::Synthetic;
  std::filesystem::path path;
  ImageShape shape{32, 32, 1};
  std::vector<SyntheticClassParams> classes = synthetic_preset("easy");
  int n_per_class = 20;
  std::uint64_t seed = 1;
};

struct TrialListEntry {
  std::string reference;
  std::array<std::string, kComparisonPlatforms> comparisons;
};

struct TrialConfig {
  TrialMode mode = TrialMode::Sample;
  int n = 5;
  std::uint64_t seed = 7;
  /// Balanced mode: times each fabric serves as reference.
  int placements = 4;
  std::vector<TrialListEntry> list;
};

struct SupervisedConfig {
  double val_fraction = 0.2;
  int epochs = 20;
};

enum class SweepAxis { DropoutRate, Augmentation };

struct SweepConfig {
  SweepAxis axis = SweepAxis::DropoutRate;
  std::vector<std::string> values{"0.05", "0.15", "0.25", "0.5"};
};

struct ExperimentConfig {
  DatasetConfig dataset;
  TrialConfig trials;
  std::vector<StrategyKind> strategies{std::begin(kAllStrategies), std::end(kAllStrategies)};
  int runs = 1;
  int max_rounds = 20;
  std::uint64_t seed = 42;
  /// Worker threads; 0 uses the hardware concurrency. Does not affect results.
  int threads = 0;
  EngineParams engine;
  ClassifierConfig classifier;
  SupervisedConfig supervised;
  SweepConfig sweep;
  std::filesystem::path output_dir = "results";
  bool timestamps = false;
  bool resume = false;

  /// Cross-field checks. Throws ConfigError naming the field.
  void validate() const;
};

/// Reads `key = value` lines; `#` starts a comment. Errors carry
/// `<origin>:<line>` and the field name. Throws ConfigError.
ExperimentConfig parse_config(std::istream& in, std::string_view origin = "config");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies one setting. Throws ConfigError naming the field.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Applies `key=value`. Throws ConfigError.
void apply_override(ExperimentConfig& config, std::string_view assignment);

/// Every result-affecting key with its resolved value, in a fixed order.
/// Feeding the lines back through parse_config reproduces the config.
std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& config);

/// config_entries as `key = value` lines.
std::string to_text(const ExperimentConfig& config);

/// All recognized keys.
std::vector<std::string> config_keys();


/// `name:orientation:frequency:phase_jitter:rotation_jitter:noise;...`
std::vector<SyntheticClassParams> parse_synthetic_classes(std::string_view text);
std::string format_synthetic_classes(std::span<const SyntheticClassParams> classes);

/// Materializes the configured dataset. Synthetic sources are generated,
/// directories are loaded.
Dataset resolve_dataset(const DatasetConfig& config);

/// Trial layout for the configured mode, without seeds.
std::vector<TrialSpec> build_trials(const TrialConfig& trials, const Dataset& dataset, int max_rounds);

}  // namespace artex
