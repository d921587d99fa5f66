#pragma once

#include <cstdint>
#include <vector>

#include "artex/classifier.hpp"
#include "artex/config.hpp"
#include "artex/dataset.hpp"
#include "artex/metrics.hpp"

namespace artex {

struct SupervisedEpoch {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
};

struct SupervisedResult {
  std::vector<SupervisedEpoch> curve;
  ConfusionMatrix val_confusion{{}};
  std::size_t train_size = 0;
  std::size_t val_size = 0;
};

/// Fabric classification with a per-fabric train/validation split. The
/// classifier gets one class per fabric. Every fabric needs at least two
/// images. Throws ParamError.
SupervisedResult run_supervised(const Dataset& dataset, ClassifierConfig classifier, const SupervisedConfig& config,
                                std::uint64_t seed);

}  // namespace artex
