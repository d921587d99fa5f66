#include <algorithm>
#include <cmath>
#include <numeric>

#include "artex/classifier.hpp"
#include "artex/error.hpp"

namespace artex {

namespace {

// Smallest per-block quota q such that sum(min(size_b, q)) >= target.
std::size_t block_quota(std::span<const ParameterBlock> blocks, std::size_t target) {
  std::size_t total_params = 0;
  for (const auto& b : blocks) total_params += b.size;
  target = std::min(target, total_params);
  std::size_t q = (target + blocks.size() - 1) / blocks.size();
  for (;; ++q) {
    std::size_t sum = 0;
    for (const auto& b : blocks) sum += std::min(b.size, q);
    if (sum >= target) return q;
  }
}

}  // namespace

GradientCheckReport gradient_check(const Classifier& classifier, std::span<const LabeledImage> batch,
                                   const GradientCheckOptions& options) {
  if (batch.empty()) throw Error(ErrorCode::ParamError, "gradient check needs a nonempty batch");
  if (!(options.epsilon > 0.0)) throw Error(ErrorCode::ParamError, "epsilon must be positive");

  Rng rng(options.seed);
  std::vector<DropoutMask> masks;
  if (classifier.config().dropout_rate > 0.0)
    for (std::size_t i = 0; i < batch.size(); ++i) masks.push_back(classifier.sample_mask(rng));

  std::vector<double> analytic;
  classifier.loss_and_gradient(batch, masks, &analytic);
  const auto blocks = classifier.parameter_blocks();
  if (options.corrupt_block >= 0) {
    if (static_cast<std::size_t>(options.corrupt_block) >= blocks.size())
      throw Error(ErrorCode::ParamError, "corrupt_block out of range");
    const ParameterBlock& b = blocks[options.corrupt_block];
    for (std::size_t i = 0; i < b.size; ++i) analytic[b.offset + i] = -analytic[b.offset + i];
  }

  Classifier probe = classifier;
  std::span<double> params = probe.mutable_parameters();
  const std::size_t quota = block_quota(blocks, options.min_parameters);

  GradientCheckReport report;
  report.block_max_relative_error.assign(blocks.size(), 0.0);
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const ParameterBlock& b = blocks[bi];
    std::vector<std::size_t> idx(b.size);
    std::iota(idx.begin(), idx.end(), b.offset);
    const std::size_t take = std::min(b.size, quota);
    for (std::size_t i = 0; i < take; ++i) std::swap(idx[i], idx[i + rng.below(b.size - i)]);

    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t p = idx[i];
      const double saved = params[p];
      params[p] = saved + options.epsilon;
      const double plus = probe.loss_and_gradient(batch, masks, nullptr);
      params[p] = saved - options.epsilon;
      const double minus = probe.loss_and_gradient(batch, masks, nullptr);
      params[p] = saved;
      const double numeric = (plus - minus) / (2.0 * options.epsilon);
      const double a = analytic[p];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      report.block_max_relative_error[bi] = std::max(report.block_max_relative_error[bi], rel);
      report.max_relative_error = std::max(report.max_relative_error, rel);
      ++report.parameters_checked;
    }
  }
  return report;
}

}  // namespace artex
