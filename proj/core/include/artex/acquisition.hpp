#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "artex/classifier.hpp"
#include "artex/random.hpp"

namespace artex {

enum class StrategyKind { Random, Variance, Entropy, Yoto };

inline constexpr StrategyKind kAllStrategies[] = {StrategyKind::Random, StrategyKind::Variance,
                                                  StrategyKind::Entropy, StrategyKind::Yoto};

/// "random", "variance", "entropy", "yoto".
std::string_view to_string(StrategyKind kind) noexcept;

/// Case-insensitive inverse of to_string. Throws ConfigError.
StrategyKind parse_strategy(std::string_view name);

/// Per-class acquisition scores; index i scores comparison platform i + 1.
struct AcquisitionScores {
  /// Mean over reference images of the population variance across MC samples.
  std::vector<double> variance;
  /// Mean over reference images and MC samples of -p ln p, with 0 ln 0 = 0.
  std::vector<double> entropy;
};

/// `mc_samples[k]` holds the MC samples for reference image k. Every image
/// must carry the same number of samples, each of the same length.
/// Throws EmptyReference or ShapeError.
AcquisitionScores acquisition_scores(std::span<const std::vector<PredictiveSample>> mc_samples);

/// Platform (1-based) chosen from precomputed scores. Random draws one index
/// from `rng`; Variance and Entropy take the argmax with ties to the lowest
/// platform and leave `rng` untouched. Throws StrategyMisuse for YOTO.
int select_from_scores(StrategyKind strategy, const AcquisitionScores& scores, Rng& rng);

/// Runs predict_mc over every reference image with `rng` and selects. Random
/// skips the MC passes. Throws StrategyMisuse for YOTO.
int select_next(StrategyKind strategy, const Classifier& classifier, const ReferenceSet& ref, int n_mc, Rng& rng);

}  // namespace artex
