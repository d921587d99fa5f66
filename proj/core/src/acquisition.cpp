#include "artex/acquisition.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "artex/error.hpp"

namespace artex {

std::string_view to_string(StrategyKind kind) noexcept {
  switch (kind) {
    case StrategyKind::Random: return "random";
    case StrategyKind::Variance: return "variance";
    case StrategyKind::Entropy: return "entropy";
    case StrategyKind::Yoto: return "yoto";
  }
  return "unknown";
}

StrategyKind parse_strategy(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (StrategyKind kind : kAllStrategies)
    if (lower == to_string(kind)) return kind;
  throw Error(ErrorCode::ConfigError, "unknown strategy '" + std::string(name) + "'");
}

AcquisitionScores acquisition_scores(std::span<const std::vector<PredictiveSample>> mc_samples) {
  if (mc_samples.empty()) throw Error(ErrorCode::EmptyReference, "no reference images to score");
  const std::size_t m = mc_samples.front().size();
  if (m == 0) throw Error(ErrorCode::ShapeError, "reference image 0 has no MC samples");
  const std::size_t classes = mc_samples.front().front().probs.size();
  for (std::size_t k = 0; k < mc_samples.size(); ++k) {
    if (mc_samples[k].size() != m)
      throw Error(ErrorCode::ShapeError, "reference image " + std::to_string(k) + " has " +
                                             std::to_string(mc_samples[k].size()) + " MC samples, expected " +
                                             std::to_string(m));
    for (const PredictiveSample& s : mc_samples[k])
      if (s.probs.size() != classes) throw Error(ErrorCode::ShapeError, "MC samples differ in class count");
  }

  AcquisitionScores out;
  out.variance.assign(classes, 0.0);
  out.entropy.assign(classes, 0.0);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (const auto& samples : mc_samples) {
    for (std::size_t i = 0; i < classes; ++i) {
      // Shifted by the first sample so identical samples give exactly zero.
      const double shift = samples.front().probs[i];
      double mean = 0.0;
      for (const PredictiveSample& s : samples) mean += s.probs[i] - shift;
      mean *= inv_m;
      double var = 0.0;
      double ent = 0.0;
      for (const PredictiveSample& s : samples) {
        const double p = s.probs[i];
        const double d = (p - shift) - mean;
        var += d * d;
        if (p > 0.0) ent -= p * std::log(p);
      }
      out.variance[i] += var * inv_m;
      out.entropy[i] += ent * inv_m;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(mc_samples.size());
  for (double& v : out.variance) v *= inv_n;
  for (double& e : out.entropy) e *= inv_n;
  return out;
}

int select_from_scores(StrategyKind strategy, const AcquisitionScores& scores, Rng& rng) {
  switch (strategy) {
    case StrategyKind::Random:
      if (scores.variance.empty()) throw Error(ErrorCode::ShapeError, "no platforms to choose from");
      return 1 + static_cast<int>(rng.below(scores.variance.size()));
    case StrategyKind::Variance:
      return 1 + argmax_lowest(scores.variance);
    case StrategyKind::Entropy:
      return 1 + argmax_lowest(scores.entropy);
    case StrategyKind::Yoto:
      break;
  }
  throw Error(ErrorCode::StrategyMisuse, "YOTO never selects a platform");
}

int select_next(StrategyKind strategy, const Classifier& classifier, const ReferenceSet& ref, int n_mc, Rng& rng) {
  if (strategy == StrategyKind::Yoto) throw Error(ErrorCode::StrategyMisuse, "YOTO never selects a platform");
  if (strategy == StrategyKind::Random) {
    AcquisitionScores uniform;
    uniform.variance.assign(classifier.config().num_classes, 0.0);
    return select_from_scores(strategy, uniform, rng);
  }
  if (ref.images.empty()) throw Error(ErrorCode::EmptyReference, "reference set is empty");
  std::vector<std::vector<PredictiveSample>> samples;
  samples.reserve(ref.images.size());
  for (const TextureImage& img : ref.images) samples.push_back(classifier.predict_mc(img, n_mc, rng));
  return select_from_scores(strategy, acquisition_scores(samples), rng);
}

}  // namespace artex
