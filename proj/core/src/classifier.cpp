#include "artex/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "artex/error.hpp"

namespace artex {

void ClassifierConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::ParamError, "classifier config: " + what); };
  if (input.height < 1 || input.width < 1) bad("input dimensions must be positive");
  if (input.channels != 1 && input.channels != 3) bad("input channels must be 1 or 3");
  if (conv_channels.empty()) bad("at least one conv block is required");
  int h = input.height, w = input.width;
  for (int c : conv_channels) {
    if (c < 1) bad("conv channel counts must be positive");
    h /= 2;
    w /= 2;
    if (h < 1 || w < 1) bad("input too small for " + std::to_string(conv_channels.size()) + " pooling stages");
  }
  if (dense_hidden_units < 1) bad("dense_hidden_units must be positive");
  if (num_classes < 2) bad("num_classes must be >= 2");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) bad("dropout_rate must lie in [0, 1)");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) bad("learning_rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) bad("momentum must lie in [0, 1)");
  if (batch_size < 1) bad("batch_size must be positive");
  if (!(weight_init_scale > 0.0) || !std::isfinite(weight_init_scale)) bad("weight_init_scale must be positive");
}

Classifier::Classifier(ClassifierConfig config, std::uint64_t seed)
    : config_(std::move(config)), mask_rng_(derive_seed(seed, {0x6d61736bULL})) {
  config_.validate();
  build_layout();
  params_.assign(params_.size(), 0.0);
  Rng rng(seed);
  for (const ParameterBlock& block : blocks_) {
    if (block.name.ends_with(".bias")) continue;
    double fan_in = 1.0;
    double gain = 2.0;
    if (block.layer_type == "conv") {
      const Geometry& g = geometry_[std::stoi(block.name.substr(4))];
      fan_in = g.in_channels * 9.0;
    } else if (block.layer_type == "dense") {
      fan_in = static_cast<double>(flat_size_);
    } else {
      fan_in = config_.dense_hidden_units;
      gain = 1.0;  // linear softmax head
    }
    const double sd = config_.weight_init_scale * std::sqrt(gain / fan_in);
    for (std::size_t i = 0; i < block.size; ++i) params_[block.offset + i] = sd * rng.normal();
  }
  velocity_.assign(params_.size(), 0.0);
}

void Classifier::build_layout() {
  geometry_.clear();
  blocks_.clear();
  std::size_t offset = 0;
  auto add = [&](std::string name, std::string type, std::size_t size) {
    blocks_.push_back({std::move(name), std::move(type), offset, size});
    offset += size;
  };
  int c = config_.input.channels, h = config_.input.height, w = config_.input.width;
  for (std::size_t b = 0; b < config_.conv_channels.size(); ++b) {
    const int out = config_.conv_channels[b];
    geometry_.push_back({c, out, h, w, h / 2, w / 2});
    add("conv" + std::to_string(b) + ".weight", "conv", static_cast<std::size_t>(out) * c * 9);
    add("conv" + std::to_string(b) + ".bias", "conv", out);
    c = out;
    h /= 2;
    w /= 2;
  }
  flat_size_ = static_cast<std::size_t>(c) * h * w;
  const auto units = static_cast<std::size_t>(config_.dense_hidden_units);
  const auto classes = static_cast<std::size_t>(config_.num_classes);
  add("dense.weight", "dense", flat_size_ * units);  // (flat, units)
  add("dense.bias", "dense", units);
  add("head.weight", "head", units * classes);  // (units, classes)
  add("head.bias", "head", classes);
  params_.resize(offset);
}

void Classifier::check_input(const TextureImage& image) const {
  if (image.shape != config_.input || image.pixels.size() != config_.input.pixel_count())
    throw Error(ErrorCode::InputShapeError, "expected " + to_string(config_.input) + ", got " +
                                                to_string(image.shape) + " for image '" + image.id + "'");
}

DropoutMask Classifier::sample_mask(Rng& rng) const {
  const double keep = 1.0 - config_.dropout_rate;
  const double scale = 1.0 / keep;
  DropoutMask mask;
  for (const Geometry& g : geometry_) {
    std::vector<double> layer(static_cast<std::size_t>(g.out_channels) * g.pooled_height * g.pooled_width);
    for (double& f : layer) f = rng.bernoulli(keep) ? scale : 0.0;
    mask.layers.push_back(std::move(layer));
  }
  std::vector<double> dense(config_.dense_hidden_units);
  for (double& f : dense) f = rng.bernoulli(keep) ? scale : 0.0;
  mask.layers.push_back(std::move(dense));
  return mask;
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMatrix>;
using ConstRowMap = Eigen::Map<const RowMatrix>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

// (Cin*9, H*W) patch matrix for a 3x3 same-padded convolution.
void im2col(const double* input, int channels, int height, int width, AlignedVector& columns) {
  const std::size_t plane = static_cast<std::size_t>(height) * width;
  columns.assign(plane * channels * 9, 0.0);
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        double* row = &columns[(static_cast<std::size_t>(c) * 9 + ky * 3 + kx) * plane];
        for (int y = 0; y < height; ++y) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= height) continue;
          const double* src = input + c * plane + static_cast<std::size_t>(sy) * width;
          double* dst = row + static_cast<std::size_t>(y) * width;
          const int x0 = std::max(0, 1 - kx);
          const int x1 = std::min(width, width + 1 - kx);
          for (int x = x0; x < x1; ++x) dst[x] = src[x + kx - 1];
        }
      }
    }
  }
}

// Adjoint of im2col: scatters patch gradients back onto the input plane.
void col2im(const double* columns, int channels, int height, int width, double* input_grad) {
  const std::size_t plane = static_cast<std::size_t>(height) * width;
  std::fill(input_grad, input_grad + plane * channels, 0.0);
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const double* row = columns + (static_cast<std::size_t>(c) * 9 + ky * 3 + kx) * plane;
        for (int y = 0; y < height; ++y) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= height) continue;
          double* dst = input_grad + c * plane + static_cast<std::size_t>(sy) * width;
          const double* src = row + static_cast<std::size_t>(y) * width;
          const int x0 = std::max(0, 1 - kx);
          const int x1 = std::min(width, width + 1 - kx);
          for (int x = x0; x < x1; ++x) dst[x + kx - 1] += src[x];
        }
      }
    }
  }
}

// Per-thread scratch reused across calls; large fresh allocations are
// page-faulted on every touch and dominate the runtime otherwise.
struct Workspace {
  AlignedVector columns;
  AlignedVector dcolumns;
  AlignedVector dout;
  AlignedVector dactiv;
  AlignedVector row_in;
  AlignedVector row_out;
  RowMatrix dlogits;
  RowMatrix dhidden;
  RowMatrix dflat;
};

Workspace& workspace() {
  thread_local Workspace ws;
  return ws;
}

// out.row(r) = in.row(r) * w through aligned scratch rows, so every sample
// takes the same kernel path whatever its position in the batch.
template <class In, class Out>
void row_product(const In& in, const ConstRowMap& w, Out& out, Workspace& ws) {
  ws.row_in.resize(static_cast<std::size_t>(in.cols()));
  ws.row_out.resize(static_cast<std::size_t>(out.cols()));
  Eigen::Map<Eigen::RowVectorXd, Eigen::Aligned64> x(ws.row_in.data(), in.cols());
  Eigen::Map<Eigen::RowVectorXd, Eigen::Aligned64> y(ws.row_out.data(), out.cols());
  for (Eigen::Index r = 0; r < in.rows(); ++r) {
    x = in.row(r);
    y.noalias() = x * w;
    out.row(r) = y;
  }
}

}  // namespace

void Classifier::forward(std::span<const TextureImage* const> images, std::span<const DropoutMask* const> masks,
                         Trace& trace) const {
  const std::size_t n = images.size();
  const std::size_t nb = geometry_.size();
  const auto units = static_cast<Eigen::Index>(config_.dense_hidden_units);
  const auto classes = static_cast<Eigen::Index>(config_.num_classes);
  trace.batch = n;
  trace.samples.resize(n);
  trace.centered.resize(n);
  trace.flat.resize(n * flat_size_);
  Workspace& ws = workspace();
  AlignedVector& columns = ws.columns;

  for (std::size_t s = 0; s < n; ++s) {
    const DropoutMask* mask = masks.empty() ? nullptr : masks[s];
    auto& blocks = trace.samples[s];
    blocks.resize(nb);
    AlignedVector& centered = trace.centered[s];
    centered.resize(images[s]->pixels.size());
    for (std::size_t i = 0; i < centered.size(); ++i) centered[i] = 2.0 * images[s]->pixels[i] - 1.0;
    const double* input = centered.data();
    for (std::size_t b = 0; b < nb; ++b) {
      const Geometry& g = geometry_[b];
      BlockTrace& bt = blocks[b];
      const auto plane = static_cast<Eigen::Index>(g.height) * g.width;
      im2col(input, g.in_channels, g.height, g.width, columns);
      ConstRowMap weight(&params_[blocks_[2 * b].offset], g.out_channels, g.in_channels * 9);
      ConstVecMap bias(&params_[blocks_[2 * b + 1].offset], g.out_channels);
      ConstRowMap cols(columns.data(), g.in_channels * 9, plane);
      bt.activ.resize(static_cast<std::size_t>(plane) * g.out_channels);
      RowMap act(bt.activ.data(), g.out_channels, plane);
      act.noalias() = weight * cols;
      act.colwise() += bias;
      act = act.cwiseMax(0.0);

      const std::size_t pooled_plane = static_cast<std::size_t>(g.pooled_height) * g.pooled_width;
      bt.out.resize(pooled_plane * g.out_channels);
      bt.pool_argmax.resize(bt.out.size());
      for (int oc = 0; oc < g.out_channels; ++oc) {
        for (int py = 0; py < g.pooled_height; ++py) {
          for (int px = 0; px < g.pooled_width; ++px) {
            const int base = oc * static_cast<int>(plane) + (2 * py) * g.width + 2 * px;
            int best = base;
            if (bt.activ[base + 1] > bt.activ[best]) best = base + 1;
            if (bt.activ[base + g.width] > bt.activ[best]) best = base + g.width;
            if (bt.activ[base + g.width + 1] > bt.activ[best]) best = base + g.width + 1;
            const std::size_t o = oc * pooled_plane + static_cast<std::size_t>(py) * g.pooled_width + px;
            bt.pool_argmax[o] = best;
            bt.out[o] = bt.activ[best];
          }
        }
      }
      if (mask) {
        const std::vector<double>& m = mask->layers[b];
        for (std::size_t i = 0; i < bt.out.size(); ++i) bt.out[i] *= m[i];
      }
      input = bt.out.data();
    }
    std::copy(input, input + flat_size_, &trace.flat[s * flat_size_]);
  }

  const auto rows = static_cast<Eigen::Index>(n);
  ConstRowMap flat(trace.flat.data(), rows, static_cast<Eigen::Index>(flat_size_));
  ConstRowMap dense_w(&params_[blocks_[2 * nb].offset], static_cast<Eigen::Index>(flat_size_), units);
  ConstVecMap dense_b(&params_[blocks_[2 * nb + 1].offset], units);
  trace.hidden_pre.resize(n * units);
  RowMap pre(trace.hidden_pre.data(), rows, units);
  // Row by row so a sample's logits do not depend on batch size or position:
  // GEMM kernels pick different summation orders for edge rows.
  row_product(flat, dense_w, pre, ws);
  pre.rowwise() += dense_b.transpose();
  trace.hidden_out.resize(n * units);
  RowMap hid(trace.hidden_out.data(), rows, units);
  hid = pre.cwiseMax(0.0);
  for (std::size_t s = 0; s < masks.size(); ++s) {
    if (!masks[s]) continue;
    hid.row(static_cast<Eigen::Index>(s)) =
        hid.row(static_cast<Eigen::Index>(s)).cwiseProduct(ConstVecMap(masks[s]->layers.back().data(), units).transpose());
  }

  ConstRowMap head_w(&params_[blocks_[2 * nb + 2].offset], units, classes);
  ConstVecMap head_b(&params_[blocks_[2 * nb + 3].offset], classes);
  trace.logits.resize(n * classes);
  RowMap logit(trace.logits.data(), rows, classes);
  row_product(hid, head_w, logit, ws);
  logit.rowwise() += head_b.transpose();
}

void Classifier::backward(const Trace& trace, std::span<const DropoutMask* const> masks,
                          std::span<const int> labels, double scale, AlignedVector& grad) const {
  const std::size_t n = trace.batch;
  const std::size_t nb = geometry_.size();
  const auto rows = static_cast<Eigen::Index>(n);
  const auto units = static_cast<Eigen::Index>(config_.dense_hidden_units);
  const auto classes = static_cast<Eigen::Index>(config_.num_classes);
  auto mask_of = [&](std::size_t s) { return masks.empty() ? nullptr : masks[s]; };
  Workspace& ws = workspace();

  RowMatrix& dlogits = ws.dlogits;
  dlogits.resize(rows, classes);
  for (std::size_t s = 0; s < n; ++s) {
    const PredictiveSample p =
        softmax(std::span<const double>(&trace.logits[s * classes], static_cast<std::size_t>(classes)));
    for (Eigen::Index k = 0; k < classes; ++k) dlogits(static_cast<Eigen::Index>(s), k) = p.probs[k] * scale;
    dlogits(static_cast<Eigen::Index>(s), labels[s]) -= scale;
  }

  ConstRowMap hid(trace.hidden_out.data(), rows, units);
  ConstRowMap head_w(&params_[blocks_[2 * nb + 2].offset], units, classes);
  RowMap g_head_w(&grad[blocks_[2 * nb + 2].offset], units, classes);
  VecMap g_head_b(&grad[blocks_[2 * nb + 3].offset], classes);
  g_head_w.noalias() += hid.transpose() * dlogits;
  g_head_b += dlogits.colwise().sum().transpose();

  RowMatrix& dhidden = ws.dhidden;
  dhidden.resize(rows, units);
  dhidden.noalias() = dlogits * head_w.transpose();
  ConstRowMap pre(trace.hidden_pre.data(), rows, units);
  for (Eigen::Index s = 0; s < rows; ++s) {
    const double* m = mask_of(s) ? mask_of(s)->layers.back().data() : nullptr;
    for (Eigen::Index u = 0; u < units; ++u) {
      double v = dhidden(s, u);
      if (m) v *= m[u];
      dhidden(s, u) = pre(s, u) > 0.0 ? v : 0.0;
    }
  }

  const auto flat_cols = static_cast<Eigen::Index>(flat_size_);
  ConstRowMap flat(trace.flat.data(), rows, flat_cols);
  ConstRowMap dense_w(&params_[blocks_[2 * nb].offset], flat_cols, units);
  RowMap g_dense_w(&grad[blocks_[2 * nb].offset], flat_cols, units);
  VecMap g_dense_b(&grad[blocks_[2 * nb + 1].offset], units);
  g_dense_w.noalias() += flat.transpose() * dhidden;
  g_dense_b += dhidden.colwise().sum().transpose();
  RowMatrix& dflat = ws.dflat;
  dflat.resize(rows, flat_cols);
  dflat.noalias() = dhidden * dense_w.transpose();

  AlignedVector& dout = ws.dout;
  AlignedVector& dactiv = ws.dactiv;
  AlignedVector& columns = ws.columns;
  AlignedVector& dcols = ws.dcolumns;
  for (std::size_t s = 0; s < n; ++s) {
    const auto& blocks = trace.samples[s];
    const DropoutMask* mask = mask_of(s);
    dout.assign(dflat.row(static_cast<Eigen::Index>(s)).data(),
                dflat.row(static_cast<Eigen::Index>(s)).data() + flat_size_);
    for (std::size_t bi = nb; bi-- > 0;) {
      const Geometry& g = geometry_[bi];
      const BlockTrace& bt = blocks[bi];
      const auto plane = static_cast<Eigen::Index>(g.height) * g.width;
      if (mask) {
        const std::vector<double>& m = mask->layers[bi];
        for (std::size_t i = 0; i < dout.size(); ++i) dout[i] *= m[i];
      }
      dactiv.assign(static_cast<std::size_t>(plane) * g.out_channels, 0.0);
      for (std::size_t i = 0; i < dout.size(); ++i)
        if (bt.activ[bt.pool_argmax[i]] > 0.0) dactiv[bt.pool_argmax[i]] += dout[i];

      ConstRowMap dact(dactiv.data(), g.out_channels, plane);
      const double* input = bi == 0 ? trace.centered[s].data() : blocks[bi - 1].out.data();
      im2col(input, g.in_channels, g.height, g.width, columns);
      ConstRowMap cols(columns.data(), g.in_channels * 9, plane);
      RowMap g_weight(&grad[blocks_[2 * bi].offset], g.out_channels, g.in_channels * 9);
      VecMap g_bias(&grad[blocks_[2 * bi + 1].offset], g.out_channels);
      g_weight.noalias() += dact * cols.transpose();
      g_bias += dact.rowwise().sum();

      if (bi > 0) {
        ConstRowMap weight(&params_[blocks_[2 * bi].offset], g.out_channels, g.in_channels * 9);
        dcols.resize(static_cast<std::size_t>(plane) * g.in_channels * 9);
        RowMap dc(dcols.data(), g.in_channels * 9, plane);
        dc.noalias() = weight.transpose() * dact;
        dout.resize(static_cast<std::size_t>(plane) * g.in_channels);
        col2im(dcols.data(), g.in_channels, g.height, g.width, dout.data());
      }
    }
  }
}

std::vector<double> Classifier::logits(const TextureImage& image, const DropoutMask* mask) const {
  check_input(image);
  thread_local Trace trace;
  const TextureImage* images[] = {&image};
  const DropoutMask* masks[] = {mask};
  forward(images, masks, trace);
  return {trace.logits.begin(), trace.logits.end()};
}

PredictiveSample Classifier::predict(const TextureImage& image) const {
  return softmax(logits(image, nullptr));
}

std::vector<PredictiveSample> Classifier::predict_mc(const TextureImage& image, int n_mc, Rng& rng) const {
  if (n_mc < 1) throw Error(ErrorCode::ParamError, "n_mc must be >= 1");
  check_input(image);
  const auto n = static_cast<std::size_t>(n_mc);
  std::vector<DropoutMask> masks;
  std::vector<const DropoutMask*> mask_ptrs(n, nullptr);
  if (config_.dropout_rate > 0.0) {
    masks.reserve(n);
    for (std::size_t i = 0; i < n; ++i) masks.push_back(sample_mask(rng));
    for (std::size_t i = 0; i < n; ++i) mask_ptrs[i] = &masks[i];
  }
  const std::vector<const TextureImage*> images(n, &image);
  thread_local Trace trace;
  forward(images, mask_ptrs, trace);
  const auto classes = static_cast<std::size_t>(config_.num_classes);
  std::vector<PredictiveSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(softmax(std::span<const double>(&trace.logits[i * classes], classes)));
  return out;
}

double Classifier::loss_and_gradient(std::span<const LabeledImage> batch, std::span<const DropoutMask> masks,
                                     std::vector<double>* gradient) const {
  if (batch.empty()) throw Error(ErrorCode::ParamError, "empty batch");
  if (!masks.empty() && masks.size() != batch.size())
    throw Error(ErrorCode::ShapeError, "one dropout mask per batch sample is required");
  if (gradient) gradient->resize(params_.size(), 0.0);
  std::vector<const TextureImage*> images;
  std::vector<const DropoutMask*> mask_ptrs;
  std::vector<int> labels;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const LabeledImage& s = batch[i];
    check_input(s.image);
    if (s.label < 0 || s.label >= config_.num_classes)
      throw Error(ErrorCode::ParamError, "label " + std::to_string(s.label) + " out of range");
    images.push_back(&s.image);
    labels.push_back(s.label);
    mask_ptrs.push_back(masks.empty() ? nullptr : &masks[i]);
  }
  thread_local Trace trace;
  forward(images, mask_ptrs, trace);
  const auto classes = static_cast<std::size_t>(config_.num_classes);
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i)
    total += cross_entropy(std::span<const double>(&trace.logits[i * classes], classes), labels[i]);
  const double scale = 1.0 / static_cast<double>(batch.size());
  if (gradient) {
    AlignedVector grad(gradient->begin(), gradient->end());
    backward(trace, mask_ptrs, labels, scale, grad);
    gradient->assign(grad.begin(), grad.end());
  }
  return total * scale;
}

TrainStats Classifier::train_epochs(std::span<const LabeledImage> samples, int epochs, Rng& rng) {
  if (!valid_) throw Error(ErrorCode::NumericalDivergence, "classifier was invalidated by an earlier divergence");
  if (samples.empty()) throw Error(ErrorCode::ParamError, "no training samples");
  if (epochs < 0) throw Error(ErrorCode::ParamError, "epochs must be >= 0");
  for (const LabeledImage& s : samples) {
    check_input(s.image);
    if (s.label < 0 || s.label >= config_.num_classes)
      throw Error(ErrorCode::ParamError, "label " + std::to_string(s.label) + " out of range");
  }

  const std::size_t n = samples.size();
  const auto batch = static_cast<std::size_t>(config_.batch_size);
  const auto classes = static_cast<std::size_t>(config_.num_classes);
  std::vector<std::size_t> order(n);
  AlignedVector grad(params_.size());
  std::vector<const TextureImage*> images;
  std::vector<int> labels;
  std::vector<DropoutMask> masks;
  std::vector<const DropoutMask*> mask_ptrs;
  Trace trace;
  TrainStats stats;
  const bool use_dropout = config_.dropout_rate > 0.0;

  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t count = std::min(batch, n - start);
      images.clear();
      labels.clear();
      masks.clear();
      mask_ptrs.assign(count, nullptr);
      for (std::size_t j = 0; j < count; ++j) {
        const LabeledImage& s = samples[order[start + j]];
        images.push_back(&s.image);
        labels.push_back(s.label);
        if (use_dropout) masks.push_back(sample_mask(mask_rng_));
      }
      if (use_dropout)
        for (std::size_t j = 0; j < count; ++j) mask_ptrs[j] = &masks[j];

      forward(images, mask_ptrs, trace);
      double batch_loss = 0.0;
      for (std::size_t j = 0; j < count; ++j)
        batch_loss += cross_entropy(std::span<const double>(&trace.logits[j * classes], classes), labels[j]);
      if (!std::isfinite(batch_loss)) {
        valid_ = false;
        throw Error(ErrorCode::NumericalDivergence, "non-finite training loss at step " + std::to_string(steps_));
      }
      epoch_loss += batch_loss;
      std::fill(grad.begin(), grad.end(), 0.0);
      backward(trace, mask_ptrs, labels, 1.0 / static_cast<double>(count), grad);

      const double lr = config_.learning_rate;
      const double mu = config_.momentum;
      for (std::size_t p = 0; p < params_.size(); ++p) {
        velocity_[p] = mu * velocity_[p] - lr * grad[p];
        params_[p] += velocity_[p];
      }
      ++steps_;
    }
    stats.final_loss = epoch_loss / static_cast<double>(n);
    ++stats.epochs;
  }
  for (double p : params_) {
    if (!std::isfinite(p)) {
      valid_ = false;
      throw Error(ErrorCode::NumericalDivergence, "non-finite parameter after training");
    }
  }

  std::size_t correct = 0;
  for (std::size_t start = 0; start < n; start += batch) {
    const std::size_t count = std::min(batch, n - start);
    images.clear();
    for (std::size_t j = 0; j < count; ++j) images.push_back(&samples[start + j].image);
    forward(images, {}, trace);
    for (std::size_t j = 0; j < count; ++j)
      if (argmax_lowest(std::span<const double>(&trace.logits[j * classes], classes)) == samples[start + j].label)
        ++correct;
  }
  stats.final_train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
  return stats;
}

PredictiveSample softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  PredictiveSample out;
  out.probs.resize(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out.probs[i] = std::exp(logits[i] - m);
    sum += out.probs[i];
  }
  for (double& p : out.probs) p /= sum;
  return out;
}

double cross_entropy(std::span<const double> logits, int label) {
  const int top = argmax_lowest(logits);
  const double m = logits[top];
  double tail = 0.0;  // sum of exp(z_j - m) over j != top
  for (std::size_t j = 0; j < logits.size(); ++j)
    if (static_cast<int>(j) != top) tail += std::exp(logits[j] - m);
  return (m - logits[label]) + std::log1p(tail);
}

int argmax_lowest(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = static_cast<int>(i);
  return best;
}

ReferencePrediction average_predictions(std::span<const PredictiveSample> samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptyReference, "no reference predictions to average");
  ReferencePrediction out;
  out.mean_probs.assign(samples.front().probs.size(), 0.0);
  for (const PredictiveSample& s : samples) {
    if (s.probs.size() != out.mean_probs.size())
      throw Error(ErrorCode::ShapeError, "reference predictions differ in length");
    for (std::size_t i = 0; i < s.probs.size(); ++i) out.mean_probs[i] += s.probs[i];
  }
  for (double& p : out.mean_probs) p /= static_cast<double>(samples.size());
  out.label = argmax_lowest(out.mean_probs);
  return out;
}

ReferencePrediction predict_reference(const Classifier& classifier, const ReferenceSet& ref) {
  if (ref.images.empty()) throw Error(ErrorCode::EmptyReference, "reference set is empty");
  std::vector<PredictiveSample> samples;
  samples.reserve(ref.images.size());
  for (const TextureImage& img : ref.images) samples.push_back(classifier.predict(img));
  return average_predictions(samples);
}

}  // namespace artex
