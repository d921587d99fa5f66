#include "artex/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "artex/error.hpp"

namespace artex {

std::string to_string(const ImageShape& shape) {
  return std::to_string(shape.height) + "x" + std::to_string(shape.width) + "x" +
         std::to_string(shape.channels);
}

double TextureImage::mean_intensity() const {
  if (pixels.empty()) return 0.0;
  return std::accumulate(pixels.begin(), pixels.end(), 0.0) / static_cast<double>(pixels.size());
}

void TextureImage::validate() const {
  if (shape.height <= 0 || shape.width <= 0 || (shape.channels != 1 && shape.channels != 3))
    throw Error(ErrorCode::ShapeError, "image '" + id + "' has invalid shape " + to_string(shape));
  if (pixels.size() != shape.pixel_count())
    throw Error(ErrorCode::ShapeError, "image '" + id + "' pixel count does not match its shape");
  for (double v : pixels) {
    if (!(v >= 0.0 && v <= 1.0))
      throw Error(ErrorCode::ShapeError, "image '" + id + "' has a pixel outside [0,1]");
  }
}

namespace {

// Interpolates with nested lerps so a constant neighbourhood reproduces its
// value exactly.
double bilinear(const double* plane, int height, int width, double sy, double sx) {
  int x0 = static_cast<int>(std::floor(sx));
  int y0 = static_cast<int>(std::floor(sy));
  x0 = std::clamp(x0, 0, std::max(0, width - 2));
  y0 = std::clamp(y0, 0, std::max(0, height - 2));
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const double fx = std::clamp(sx - x0, 0.0, 1.0);
  const double fy = std::clamp(sy - y0, 0.0, 1.0);
  const double a = plane[y0 * width + x0];
  const double b = plane[y0 * width + x1];
  const double c = plane[y1 * width + x0];
  const double d = plane[y1 * width + x1];
  const double top = a + fx * (b - a);
  const double bottom = c + fx * (d - c);
  return top + fy * (bottom - top);
}

std::string format_angle(double degrees) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", degrees);
  return buf;
}

}  // namespace

TextureImage rotate_image(const TextureImage& image, double angle_degrees) {
  const int h = image.shape.height;
  const int w = image.shape.width;
  const double theta = angle_degrees * std::numbers::pi / 180.0;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double cy = (h - 1) / 2.0;
  const double cx = (w - 1) / 2.0;
  const double fill = image.mean_intensity();
  constexpr double kEdgeTolerance = 1e-9;

  TextureImage out;
  out.id = image.id + "@" + format_angle(angle_degrees);
  out.fabric_id = image.fabric_id;
  out.shape = image.shape;
  out.pixels.assign(image.pixels.size(), fill);
  out.source = AugmentedSource{image.id, angle_degrees};

  const std::size_t plane_size = static_cast<std::size_t>(h) * w;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      // Inverse mapping: output pixel pulls from the source rotated by -theta.
      const double sx = cx + cos_t * dx + sin_t * dy;
      const double sy = cy - sin_t * dx + cos_t * dy;
      if (sx < -kEdgeTolerance || sy < -kEdgeTolerance || sx > (w - 1) + kEdgeTolerance ||
          sy > (h - 1) + kEdgeTolerance)
        continue;
      for (int c = 0; c < image.shape.channels; ++c) {
        const double* plane = image.pixels.data() + c * plane_size;
        const double v = bilinear(plane, h, w, std::clamp(sy, 0.0, h - 1.0), std::clamp(sx, 0.0, w - 1.0));
        out.pixels[c * plane_size + static_cast<std::size_t>(y) * w + x] = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return out;
}

namespace {

struct Tap {
  int index;
  double weight;
};

// Per-output-sample source taps along one axis.
std::vector<std::vector<Tap>> axis_taps(int from, int to) {
  std::vector<std::vector<Tap>> taps(to);
  const double scale = static_cast<double>(from) / to;
  for (int i = 0; i < to; ++i) {
    if (scale > 1.0) {
      const double lo = i * scale;
      const double hi = lo + scale;
      for (int j = static_cast<int>(std::floor(lo)); j < from && j < hi; ++j) {
        const double overlap = std::min<double>(j + 1, hi) - std::max<double>(j, lo);
        if (overlap > 0.0) taps[i].push_back({j, overlap / scale});
      }
    } else {
      const double s = std::clamp((i + 0.5) * scale - 0.5, 0.0, from - 1.0);
      const int j0 = std::min(static_cast<int>(std::floor(s)), from - 1);
      const int j1 = std::min(j0 + 1, from - 1);
      const double f = s - j0;
      taps[i].push_back({j0, 1.0 - f});
      if (j1 != j0 && f > 0.0) taps[i].push_back({j1, f});
    }
  }
  return taps;
}

}  // namespace

std::vector<double> resize_image(std::span<const double> pixels, const ImageShape& from, int height,
                                 int width) {
  if (height == from.height && width == from.width) return {pixels.begin(), pixels.end()};
  const auto row_taps = axis_taps(from.height, height);
  const auto col_taps = axis_taps(from.width, width);
  const std::size_t src_plane = static_cast<std::size_t>(from.height) * from.width;
  const std::size_t dst_plane = static_cast<std::size_t>(height) * width;
  std::vector<double> out(static_cast<std::size_t>(from.channels) * dst_plane);
  std::vector<double> tmp(static_cast<std::size_t>(from.height) * width);
  for (int c = 0; c < from.channels; ++c) {
    const double* plane = pixels.data() + c * src_plane;
    for (int y = 0; y < from.height; ++y) {
      for (int x = 0; x < width; ++x) {
        double v = 0.0;
        for (const Tap& t : col_taps[x]) v += t.weight * plane[static_cast<std::size_t>(y) * from.width + t.index];
        tmp[static_cast<std::size_t>(y) * width + x] = v;
      }
    }
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        double v = 0.0;
        for (const Tap& t : row_taps[y]) v += t.weight * tmp[static_cast<std::size_t>(t.index) * width + x];
        out[c * dst_plane + static_cast<std::size_t>(y) * width + x] = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return out;
}

}  // namespace artex
