#include "artex/engine.hpp"

#include <algorithm>
#include <numeric>

#include "artex/error.hpp"

namespace artex {

void TrialSpec::validate() const {
  if (reference_fabric.empty()) throw Error(ErrorCode::SpecError, "reference fabric is empty");
  const auto hits = std::count(comparison_fabrics.begin(), comparison_fabrics.end(), reference_fabric);
  if (hits != 1)
    throw Error(ErrorCode::SpecError, "reference '" + reference_fabric + "' appears on " + std::to_string(hits) +
                                          " comparison platforms, expected exactly 1");
  for (const std::string& f : comparison_fabrics)
    if (f.empty()) throw Error(ErrorCode::SpecError, "comparison fabric id is empty");
  if (max_rounds < 0) throw Error(ErrorCode::SpecError, "max_rounds must be >= 0");
}

int TrialSpec::reference_platform() const {
  const auto it = std::find(comparison_fabrics.begin(), comparison_fabrics.end(), reference_fabric);
  if (it == comparison_fabrics.end()) throw Error(ErrorCode::SpecError, "reference is on no comparison platform");
  return 1 + static_cast<int>(it - comparison_fabrics.begin());
}

void EngineParams::validate() const {
  if (copies < 1) throw Error(ErrorCode::ParamError, "copies must be >= 1");
  if (epochs_baseline < 0 || epochs_per_round < 0) throw Error(ErrorCode::ParamError, "epochs must be >= 0");
  if (n_mc < 1) throw Error(ErrorCode::ParamError, "n_mc must be >= 1");
}

namespace {

// Stream tags below spec.seed.
enum : std::uint64_t { kTouchStream = 1, kAugmentStream, kInitStream, kTrainStream, kMcStream, kSelectStream };

class TrialRunner {
 public:
  TrialRunner(const TrialSpec& spec, const Dataset& dataset, StrategyKind strategy, const ClassifierConfig& config,
              const EngineParams& params, const TrialHooks* hooks)
      : spec_(spec),
        strategy_(strategy),
        config_(config),
        params_(params),
        hooks_(hooks),
        sampler_(dataset),
        touch_rng_(derive_seed(spec.seed, {kTouchStream})),
        augment_rng_(derive_seed(spec.seed, {kAugmentStream})),
        train_rng_(derive_seed(spec.seed, {kTrainStream})),
        mc_rng_(derive_seed(spec.seed, {kMcStream})),
        select_rng_(derive_seed(spec.seed, {kSelectStream, static_cast<std::uint64_t>(strategy)})),
        init_seed_(derive_seed(spec.seed, {kInitStream})),
        classifier_(config, init_seed_) {
    result_.spec = spec;
    result_.strategy = strategy;
  }

  TrialResult run() {
    touch(0, 0);
    for (int p = 1; p <= kComparisonPlatforms; ++p) touch(0, p);
    train(params_.epochs_baseline, false);
    result_.baseline = evaluate(0, 0);

    if (strategy_ == StrategyKind::Yoto) {
      for (int r = 1; r <= spec_.max_rounds; ++r) {
        RoundMetrics m = result_.baseline;
        m.round = r;
        result_.rounds.push_back(std::move(m));
      }
    } else {
      const AcquisitionScores* scores = &result_.baseline.scores;
      for (int r = 1; r <= spec_.max_rounds; ++r) {
        const int platform = select_from_scores(strategy_, *scores, select_rng_);
        if (platform < 1 || platform > kComparisonPlatforms)
          throw Error(ErrorCode::InternalError, "strategy chose platform " + std::to_string(platform));
        touch(r, platform);
        train(params_.epochs_per_round, params_.retrain_from_scratch);
        result_.rounds.push_back(evaluate(r, platform));
        scores = &result_.rounds.back().scores;
      }
    }

    const RoundMetrics& last = result_.rounds.empty() ? result_.baseline : result_.rounds.back();
    result_.predicted_platform = last.predicted_platform;
    result_.correct = last.correct;
    result_.training_pool_size = pool_.size();
    result_.reference_size = reference_.images.size();
    return std::move(result_);
  }

 private:
  void touch(int round, int platform) {
    const std::string& fabric = platform == 0 ? spec_.reference_fabric : spec_.comparison_fabrics[platform - 1];
    Touch t = sampler_.sample(fabric, touch_rng_);
    TouchRecord record{round, platform, t.image.id, {}, t.reused};
    std::vector<TextureImage> views;
    if (params_.augmentation)
      views = augment_rotations(t.image, params_.copies, augment_rng_);
    else
      views.push_back(std::move(t.image));
    for (TextureImage& v : views) {
      record.augmented_ids.push_back(v.id);
      if (platform == 0)
        reference_.images.push_back(std::move(v));
      else
        pool_.push_back({std::move(v), platform - 1});
    }
    result_.touches.push_back(std::move(record));
    ++result_.touch_counts[platform];
  }

  void train(int epochs, bool from_scratch) {
    if (from_scratch) classifier_ = Classifier(config_, init_seed_);
    last_stats_ = classifier_.train_epochs(pool_, epochs, train_rng_);
    result_.total_epochs += epochs;
    if (hooks_ && hooks_->on_trained)
      hooks_->on_trained(static_cast<int>(result_.touches.size()) - kPlatforms, pool_.size(), result_.total_epochs);
  }

  RoundMetrics evaluate(int round, int touched) {
    RoundMetrics m;
    m.round = round;
    m.touched_platform = touched;
    m.train_accuracy = last_stats_.final_train_accuracy;
    m.train_loss = last_stats_.final_loss;

    std::vector<PredictiveSample> deterministic;
    std::vector<std::vector<PredictiveSample>> mc;
    for (const TextureImage& img : reference_.images) {
      deterministic.push_back(classifier_.predict(img));
      mc.push_back(classifier_.predict_mc(img, params_.n_mc, mc_rng_));
    }
    const ReferencePrediction pred = average_predictions(deterministic);
    m.predicted_platform = pred.label + 1;
    m.correct = spec_.comparison_fabrics[pred.label] == spec_.reference_fabric;
    m.mean_probs = pred.mean_probs;
    m.scores = acquisition_scores(mc);
    m.mean_variance =
        std::accumulate(m.scores.variance.begin(), m.scores.variance.end(), 0.0) / m.scores.variance.size();
    m.mean_entropy = std::accumulate(m.scores.entropy.begin(), m.scores.entropy.end(), 0.0);

    if (hooks_ && hooks_->on_probabilities) {
      for (const PredictiveSample& s : deterministic) hooks_->on_probabilities("deterministic", s.probs);
      for (const auto& samples : mc)
        for (const PredictiveSample& s : samples) hooks_->on_probabilities("mc", s.probs);
      hooks_->on_probabilities("mean_probs", m.mean_probs);
    }
    return m;
  }

  const TrialSpec& spec_;
  StrategyKind strategy_;
  const ClassifierConfig& config_;
  const EngineParams& params_;
  const TrialHooks* hooks_;
  TouchSampler sampler_;
  Rng touch_rng_;
  Rng augment_rng_;
  Rng train_rng_;
  Rng mc_rng_;
  Rng select_rng_;
  std::uint64_t init_seed_;
  Classifier classifier_;
  std::vector<LabeledImage> pool_;
  ReferenceSet reference_;
  TrainStats last_stats_;
  TrialResult result_;
};

}  // namespace

TrialResult run_trial(const TrialSpec& spec, const Dataset& dataset, StrategyKind strategy,
                      const ClassifierConfig& classifier_config, const EngineParams& params,
                      const TrialHooks* hooks) {
  spec.validate();
  params.validate();
  if (classifier_config.num_classes != kComparisonPlatforms)
    throw Error(ErrorCode::ParamError, "recognition needs num_classes = 4, got " +
                                           std::to_string(classifier_config.num_classes));
  if (classifier_config.input != dataset.shape())
    throw Error(ErrorCode::InputShapeError, "classifier expects " + to_string(classifier_config.input) +
                                                ", dataset provides " + to_string(dataset.shape()));
  if (!dataset.contains(spec.reference_fabric)) throw Error(ErrorCode::UnknownFabric, spec.reference_fabric);
  for (const std::string& f : spec.comparison_fabrics)
    if (!dataset.contains(f)) throw Error(ErrorCode::UnknownFabric, f);
  return TrialRunner(spec, dataset, strategy, classifier_config, params, hooks).run();
}

}  // namespace artex
