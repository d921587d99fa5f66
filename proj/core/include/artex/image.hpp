#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace artex {

struct ImageShape {
  int height = 32;
  int width = 32;
  int channels = 1;

  std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width * channels; }
  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

std::string to_string(const ImageShape& shape);

struct FileSource {
  std::string path;
};

struct SyntheticSource {
  int class_index = 0;
  std::uint64_t draw_index = 0;
};

struct AugmentedSource {
  std::string parent_id;
  double angle_degrees = 0.0;
};

using ImageSource = std::variant<FileSource, SyntheticSource, AugmentedSource>;

/// One tactile observation. Pixels are stored channel-major (C, H, W) with
/// intensities in [0, 1].
struct TextureImage {
  std::string id;
  std::string fabric_id;
  ImageShape shape;
  std::vector<double> pixels;
  ImageSource source;

  double at(int c, int y, int x) const {
    return pixels[(static_cast<std::size_t>(c) * shape.height + y) * shape.width + x];
  }
  double& at(int c, int y, int x) {
    return pixels[(static_cast<std::size_t>(c) * shape.height + y) * shape.width + x];
  }

  double mean_intensity() const;

  /// Throws ShapeError if the pixel count disagrees with the shape or any
  /// pixel lies outside [0, 1].
  void validate() const;
};

/// Rotates about the image center by `angle_degrees` (counter-clockwise) with
/// bilinear interpolation. Pixels whose source falls outside the frame take
/// the mean intensity of the input. The result records an AugmentedSource.
TextureImage rotate_image(const TextureImage& image, double angle_degrees);

/// Separable resample to a new height and width; channel count unchanged.
/// Shrinking axes use area averaging, growing axes use linear interpolation.
std::vector<double> resize_image(std::span<const double> pixels, const ImageShape& from, int height,
                                 int width);

}  // namespace artex
