#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "artex/image.hpp"
#include "artex/random.hpp"

namespace artex {

/// Parameters of one synthetic grating texture class.
struct SyntheticClassParams {
  std::string name;
  double orientation_degrees = 0.0;
  double frequency_cycles_per_image = 8.0;
  double phase_jitter = 0.0;  // radians
  double placement_rotation_jitter_degrees = 0.0;
  double noise_sigma = 0.0;

  void validate() const;
};

/// Renders one draw of a synthetic class:
/// 0.5 + 0.4 sin(2 pi f (u cos t + v sin t) + phase) + N(0, sigma^2), clamped,
/// where (u, v) are pixel-center coordinates normalized to [-0.5, 0.5), t is
/// the jittered orientation and phase is the jittered offset.
TextureImage render_synthetic(const SyntheticClassParams& params, const ImageShape& shape, Rng& rng);

struct LoadOptions {
  /// Target size; when unset, the first decoded image's size is used.
  std::optional<int> height;
  std::optional<int> width;
  int channels = 1;
};

/// Images grouped by fabric. Immutable after construction.
class Dataset {
 public:
  struct Fabric {
    std::string id;
    std::vector<TextureImage> images;
    /// Set for synthetic fabrics; touches render fresh draws from it.
    std::optional<SyntheticClassParams> synthetic;
  };

  Dataset(std::vector<Fabric> fabrics, ImageShape shape, std::string origin);

  const ImageShape& shape() const { return shape_; }
  const std::string& origin() const { return origin_; }
  std::size_t fabric_count() const { return fabrics_.size(); }
  std::size_t image_count() const;
  const std::vector<std::string>& fabric_ids() const { return ids_; }
  bool contains(std::string_view fabric_id) const;

  /// Throws UnknownFabric.
  const Fabric& fabric(std::string_view fabric_id) const;
  std::span<const Fabric> fabrics() const { return fabrics_; }

 private:
  std::vector<Fabric> fabrics_;
  std::vector<std::string> ids_;
  ImageShape shape_;
  std::string origin_;
};

/// Loads `<root>/<fabric_id>/<image>.{png,pgm,bmp}`. Fabrics and images are
/// taken in lexicographic order.
Dataset load_dataset(const std::filesystem::path& root, const LoadOptions& options = {});

/// Writes one 16-bit PNG per image under `<root>/<fabric_id>/`.
void save_dataset(const Dataset& dataset, const std::filesystem::path& root);

/// Draw n of class c uses the stream derive_seed(seed, {c, n}), so the result
/// depends only on (params, n_per_class, shape, seed).
Dataset generate_synthetic(std::span<const SyntheticClassParams> classes, int n_per_class, ImageShape shape,
                           std::uint64_t seed);

/// `copies` independently rotated versions, angles ~ U[0, 360). The original
/// is not included.
std::vector<TextureImage> augment_rotations(const TextureImage& image, int copies, Rng& rng);

struct Touch {
  TextureImage image;
  /// True once the fabric's images have all been drawn in this trial.
  bool reused = false;
};

/// Per-trial touch state. File fabrics are drawn without replacement until
/// exhausted, then with replacement. Synthetic fabrics render a fresh draw
/// per touch.
class TouchSampler {
 public:
  explicit TouchSampler(const Dataset& dataset) : dataset_(&dataset) {}

  Touch sample(std::string_view fabric_id, Rng& rng);

 private:
  const Dataset* dataset_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> remaining_;
  std::map<std::string, std::uint64_t, std::less<>> draws_;
};

}  // namespace artex
