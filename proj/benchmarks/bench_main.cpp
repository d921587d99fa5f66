#include <benchmark/benchmark.h>

#include <vector>

#include "artex/acquisition.hpp"
#include "artex/classifier.hpp"
#include "artex/config.hpp"
#include "artex/dataset.hpp"
#include "artex/image.hpp"
#include "artex/metrics.hpp"

namespace {

using namespace artex;

const Dataset& dataset() {
  static const Dataset d = resolve_dataset(DatasetConfig{});
  return d;
}

const TextureImage& image() { return dataset().fabrics()[0].images[0]; }

void BM_Predict(benchmark::State& state) {
  const Classifier net(ClassifierConfig{}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(net.predict(image()));
}
BENCHMARK(BM_Predict);

void BM_PredictMc(benchmark::State& state) {
  const Classifier net(ClassifierConfig{}, 1);
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(net.predict_mc(image(), static_cast<int>(state.range(0)), rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PredictMc)->Arg(1)->Arg(30);

// One epoch over a default-sized round-20 training pool.
void BM_TrainEpoch(benchmark::State& state) {
  Classifier net(ClassifierConfig{}, 1);
  std::vector<LabeledImage> pool;
  for (std::size_t i = 0; i < 240; ++i) {
    const auto& f = dataset().fabrics()[i % 4];
    pool.push_back({f.images[i / 4 % f.images.size()], static_cast<int>(i % 4)});
  }
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(net.train_epochs(pool, 1, rng));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pool.size()));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

void BM_AcquisitionScores(benchmark::State& state) {
  Rng rng(4);
  std::vector<std::vector<PredictiveSample>> mc(10);
  for (auto& img : mc)
    for (int m = 0; m < 30; ++m) img.push_back(softmax(std::vector<double>{rng.normal(), rng.normal(), rng.normal(), rng.normal()}));
  for (auto _ : state) benchmark::DoNotOptimize(acquisition_scores(mc));
}
BENCHMARK(BM_AcquisitionScores);

void BM_JsDistance(benchmark::State& state) {
  const std::vector<double> p{0.1, 0.2, 0.3, 0.15, 0.25}, q{0.3, 0.1, 0.1, 0.4, 0.1};
  for (auto _ : state) benchmark::DoNotOptimize(js_distance(p, q));
}
BENCHMARK(BM_JsDistance);

void BM_RotateImage(benchmark::State& state) {
  double angle = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rotate_image(image(), angle));
    angle += 7.0;
  }
}
BENCHMARK(BM_RotateImage);

}  // namespace

BENCHMARK_MAIN();
