#pragma once

#include <cstdint>
#include <iosfwd>
#include <new>
#include <span>
#include <string>
#include <vector>

#include "artex/image.hpp"
#include "artex/random.hpp"

namespace artex {

/// Architecture and optimizer settings of the probabilistic classifier:
/// N blocks of conv3x3(same) + ReLU + maxpool2x2 + dropout, then a dense
/// ReLU layer + dropout, then a softmax head.
struct ClassifierConfig {
  ImageShape input{32, 32, 1};
  std::vector<int> conv_channels{8, 16};
  int dense_hidden_units = 64;
  int num_classes = 4;
  double dropout_rate = 0.25;
  double learning_rate = 0.01;
  double momentum = 0.9;
  int batch_size = 16;
  /// Multiplier on the fan-in Gaussian standard deviation sqrt(2 / fan_in).
  double weight_init_scale = 1.0;

  /// Throws ParamError.
  void validate() const;
  friend bool operator==(const ClassifierConfig&, const ClassifierConfig&) = default;
};

/// One probability vector over the class labels.
struct PredictiveSample {
  std::vector<double> probs;
};

/// Keep factors for every dropout layer: 0 for a dropped unit, 1/(1-p) for a
/// kept one (inverted dropout).
struct DropoutMask {
  std::vector<std::vector<double>> layers;
};

struct LabeledImage {
  TextureImage image;
  int label = 0;
};

struct TrainStats {
  /// Mean cross-entropy over the last epoch, measured with dropout active.
  double final_loss = 0.0;
  /// Dropout-off accuracy on the training samples after the last epoch.
  double final_train_accuracy = 0.0;
  int epochs = 0;
};

/// Named slice of the flat parameter vector.
struct ParameterBlock {
  std::string name;
  std::string layer_type;  // "conv", "dense" or "head"
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// 64-byte aligned storage. Vectorized kernels choose their scalar edge
/// handling from the runtime address, so buffers at varying alignments give
/// results that differ in the last bits between threads and runs.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t alignment{64};
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), alignment)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using AlignedVector = std::vector<double, AlignedAllocator<double>>;

/// Small convolutional classifier with inverted dropout and SGD + momentum.
///
/// Inputs are centered as 2x - 1 before the first convolution. All
/// arithmetic is double precision. Not thread-safe for concurrent training;
/// the const prediction methods may run concurrently with each other.
class Classifier {
 public:
  /// Fan-in scaled Gaussian initialization; zero biases. Throws ParamError.
  Classifier(ClassifierConfig config, std::uint64_t seed);

  const ClassifierConfig& config() const { return config_; }
  bool valid() const { return valid_; }
  std::uint64_t training_steps() const { return steps_; }
  std::size_t parameter_count() const { return params_.size(); }

  /// `epochs` shuffled mini-batch passes; warm-starts from the current
  /// parameters. Dropout masks come from the classifier's own mask stream,
  /// the sample order from `rng`. Throws NumericalDivergence on a non-finite
  /// loss and leaves the classifier flagged invalid.
  TrainStats train_epochs(std::span<const LabeledImage> samples, int epochs, Rng& rng);

  /// Dropout-off forward pass.
  PredictiveSample predict(const TextureImage& image) const;

  /// n_mc forward passes with independently sampled dropout masks.
  std::vector<PredictiveSample> predict_mc(const TextureImage& image, int n_mc, Rng& rng) const;

  DropoutMask sample_mask(Rng& rng) const;

  /// Raw head outputs; `mask == nullptr` disables dropout.
  std::vector<double> logits(const TextureImage& image, const DropoutMask* mask) const;

  /// Mean cross-entropy over `batch` with one mask per sample (empty span:
  /// dropout off). Accumulates the mean gradient into `gradient` when given.
  double loss_and_gradient(std::span<const LabeledImage> batch, std::span<const DropoutMask> masks,
                           std::vector<double>* gradient) const;

  std::span<const double> parameters() const { return params_; }
  std::span<double> mutable_parameters() { return params_; }
  std::span<const ParameterBlock> parameter_blocks() const { return blocks_; }

  friend void save_checkpoint(const Classifier& classifier, std::ostream& out);
  friend Classifier load_checkpoint(std::istream& in);

 private:
  struct Geometry {
    int in_channels, out_channels, height, width, pooled_height, pooled_width;
  };
  struct BlockTrace {
    AlignedVector activ;           // (Cout, H, W) after ReLU
    std::vector<int> pool_argmax;  // (Cout, H/2, W/2) flat index into activ
    AlignedVector out;             // pooled, after dropout
  };
  /// Activations of one mini-batch; dense-layer tensors are (batch, units)
  /// row-major.
  struct Trace {
    std::size_t batch = 0;
    std::vector<AlignedVector> centered;  // per sample network input
    std::vector<std::vector<BlockTrace>> samples;
    AlignedVector flat;
    AlignedVector hidden_pre;
    AlignedVector hidden_out;  // after ReLU and dropout
    AlignedVector logits;
  };

  void build_layout();
  void check_input(const TextureImage& image) const;
  void forward(std::span<const TextureImage* const> images, std::span<const DropoutMask* const> masks,
               Trace& trace) const;
  void backward(const Trace& trace, std::span<const DropoutMask* const> masks, std::span<const int> labels,
                double scale, AlignedVector& grad) const;

  ClassifierConfig config_;
  std::vector<Geometry> geometry_;
  std::size_t flat_size_ = 0;
  std::vector<ParameterBlock> blocks_;
  AlignedVector params_;
  AlignedVector velocity_;
  Rng mask_rng_;
  std::uint64_t steps_ = 0;
  bool valid_ = true;
};

inline Classifier init_classifier(const ClassifierConfig& config, std::uint64_t seed) {
  return Classifier(config, seed);
}

/// Numerically stable softmax.
PredictiveSample softmax(std::span<const double> logits);

/// Cross-entropy -log softmax(logits)[label], accurate for saturated logits.
double cross_entropy(std::span<const double> logits, int label);

/// Index of the largest entry; ties go to the lowest index.
int argmax_lowest(std::span<const double> values);

struct ReferenceSet {
  std::vector<TextureImage> images;
  std::size_t n_ref() const { return images.size(); }
};

struct ReferencePrediction {
  int label = 0;  // class index
  std::vector<double> mean_probs;
};

/// Arithmetic mean of the given samples and its argmax. Throws EmptyReference.
ReferencePrediction average_predictions(std::span<const PredictiveSample> samples);

/// Averages dropout-off predictions over the reference images.
ReferencePrediction predict_reference(const Classifier& classifier, const ReferenceSet& ref);

void save_checkpoint(const Classifier& classifier, std::ostream& out);
Classifier load_checkpoint(std::istream& in);

struct GradientCheckOptions {
  double epsilon = 1e-5;
  /// Lower bound on the number of parameters probed; every block is probed.
  std::size_t min_parameters = 200;
  std::uint64_t seed = 17;
  /// Test hook: negate the analytic gradient of this parameter block.
  int corrupt_block = -1;
};

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::size_t parameters_checked = 0;
  /// Per parameter block, aligned with Classifier::parameter_blocks().
  std::vector<double> block_max_relative_error;
};

/// Compares analytic gradients against central differences with dropout
/// masks frozen. Relative error is |a - n| / max(|a|, |n|, 1e-8).
GradientCheckReport gradient_check(const Classifier& classifier, std::span<const LabeledImage> batch,
                                   const GradientCheckOptions& options = {});

}  // namespace artex
