#include "artex/supervised.hpp"

#include <cmath>

#include "artex/error.hpp"

namespace artex {

SupervisedResult run_supervised(const Dataset& dataset, ClassifierConfig classifier, const SupervisedConfig& config,
                                std::uint64_t seed) {
  classifier.input = dataset.shape();
  classifier.num_classes = static_cast<int>(dataset.fabric_count());
  std::vector<LabeledImage> train;
  std::vector<LabeledImage> val;
  const auto fabrics = dataset.fabrics();
  for (std::size_t f = 0; f < fabrics.size(); ++f) {
    const auto& images = fabrics[f].images;
    if (images.size() < 2)
      throw Error(ErrorCode::ParamError, "fabric '" + fabrics[f].id + "' needs at least 2 images for a split");
    std::vector<std::size_t> order(images.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(seed, {0x73706c6974ULL, f}));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    auto n_val = static_cast<std::size_t>(std::llround(config.val_fraction * static_cast<double>(images.size())));
    n_val = std::clamp<std::size_t>(n_val, 1, images.size() - 1);
    for (std::size_t i = 0; i < order.size(); ++i)
      (i < n_val ? val : train).push_back({images[order[i]], static_cast<int>(f)});
  }

  Classifier net(classifier, derive_seed(seed, {0x696e6974ULL}));
  Rng train_rng(derive_seed(seed, {0x747261696eULL}));
  SupervisedResult result;
  result.train_size = train.size();
  result.val_size = val.size();
  for (int e = 1; e <= config.epochs; ++e) {
    const TrainStats stats = net.train_epochs(train, 1, train_rng);
    std::size_t correct = 0;
    for (const LabeledImage& s : val)
      if (argmax_lowest(net.predict(s.image).probs) == s.label) ++correct;
    result.curve.push_back({e, stats.final_loss, stats.final_train_accuracy,
                            static_cast<double>(correct) / static_cast<double>(val.size())});
  }
  result.val_confusion = ConfusionMatrix(dataset.fabric_ids());
  for (const LabeledImage& s : val)
    result.val_confusion.add(fabrics[s.label].id, fabrics[argmax_lowest(net.predict(s.image).probs)].id);
  return result;
}

}  // namespace artex
