#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "artex/acquisition.hpp"
#include "artex/classifier.hpp"
#include "artex/dataset.hpp"

namespace artex {

inline constexpr int kComparisonPlatforms = 4;
inline constexpr int kPlatforms = kComparisonPlatforms + 1;  // platform 0 holds the reference

/// One reference fabric and the four fabrics on comparison platforms 1..4.
struct TrialSpec {
  std::string reference_fabric;
  std::array<std::string, kComparisonPlatforms> comparison_fabrics;
  int max_rounds = 20;
  /// Root of every random stream used by the trial.
  std::uint64_t seed = 0;

  /// Exactly one comparison must hold the reference. Throws SpecError.
  void validate() const;
  /// 1-based platform holding the reference fabric.
  int reference_platform() const;
};

struct EngineParams {
  /// Rotated copies per touch; ignored when augmentation is off.
  int copies = 10;
  /// Off: each touch contributes the raw image once.
  bool augmentation = true;
  int epochs_baseline = 10;
  int epochs_per_round = 10;
  int n_mc = 30;
  /// Re-initialize before each round's training instead of continuing.
  bool retrain_from_scratch = false;

  /// Throws ParamError.
  void validate() const;
  int images_per_touch() const { return augmentation ? copies : 1; }
};

struct TouchRecord {
  int round = 0;     // 0 for the initial five touches
  int platform = 0;  // 0 reference, 1..4 comparisons
  std::string image_id;
  std::vector<std::string> augmented_ids;
  bool reused = false;
};

struct RoundMetrics {
  int round = 0;
  int predicted_platform = 1;
  bool correct = false;
  double train_accuracy = 0.0;
  double train_loss = 0.0;
  /// Variance scores averaged over platforms.
  double mean_variance = 0.0;
  /// Entropy scores summed over classes: the mean per-sample entropy.
  double mean_entropy = 0.0;
  /// Platform touched in this round; 0 when none (baseline, YOTO).
  int touched_platform = 0;
  std::vector<double> mean_probs;
  AcquisitionScores scores;
};

struct TrialResult {
  TrialSpec spec;
  StrategyKind strategy = StrategyKind::Random;
  std::vector<TouchRecord> touches;
  /// State after the initial phase.
  RoundMetrics baseline;
  /// Rounds 1..max_rounds; YOTO replicates its baseline here.
  std::vector<RoundMetrics> rounds;
  std::array<int, kPlatforms> touch_counts{};
  int predicted_platform = 1;
  bool correct = false;
  int total_epochs = 0;
  std::size_t training_pool_size = 0;
  std::size_t reference_size = 0;

  /// Fabric on the predicted platform.
  const std::string& predicted_fabric() const { return spec.comparison_fabrics[predicted_platform - 1]; }
};

/// Optional observation points. Called synchronously from the trial's thread.
struct TrialHooks {
  /// Every probability vector the trial produces: "mc", "deterministic",
  /// "mean_probs".
  std::function<void(std::string_view kind, std::span<const double> probs)> on_probabilities;
  /// After each training phase; round 0 is the baseline.
  std::function<void(int round, std::size_t pool_size, int epochs_so_far)> on_trained;
};

/// Runs one trial. All randomness derives from spec.seed; the initial phase
/// depends only on the seed, so strategies sharing a seed share their
/// baseline. Throws SpecError, ParamError, dataset errors and
/// NumericalDivergence.
TrialResult run_trial(const TrialSpec& spec, const Dataset& dataset, StrategyKind strategy,
                      const ClassifierConfig& classifier_config, const EngineParams& params,
                      const TrialHooks* hooks = nullptr);

}  // namespace artex
