#include "artex/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "artex/error.hpp"
#include "artex/image_io.hpp"

namespace artex {

namespace fs = std::filesystem;

void SyntheticClassParams::validate() const {
  auto bad = [&](const std::string& what) {
    throw Error(ErrorCode::ParamError, "synthetic class '" + name + "': " + what);
  };
  if (!(frequency_cycles_per_image > 0.0) || !std::isfinite(frequency_cycles_per_image))
    bad("frequency must be > 0");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) bad("noise_sigma must be >= 0");
  if (!(phase_jitter >= 0.0) || !std::isfinite(phase_jitter)) bad("phase_jitter must be >= 0");
  if (!(placement_rotation_jitter_degrees >= 0.0) || !std::isfinite(placement_rotation_jitter_degrees))
    bad("rotation jitter must be >= 0");
  if (!std::isfinite(orientation_degrees)) bad("orientation must be finite");
}

TextureImage render_synthetic(const SyntheticClassParams& params, const ImageShape& shape, Rng& rng) {
  // Draw order is part of the determinism contract: rotation, phase, noise.
  const double rot = params.placement_rotation_jitter_degrees > 0.0
                         ? rng.uniform(-params.placement_rotation_jitter_degrees,
                                       params.placement_rotation_jitter_degrees)
                         : 0.0;
  const double phase = params.phase_jitter > 0.0 ? rng.uniform(-params.phase_jitter, params.phase_jitter) : 0.0;
  const double theta = (params.orientation_degrees + rot) * std::numbers::pi / 180.0;
  const double kx = std::cos(theta);
  const double ky = std::sin(theta);
  const double omega = 2.0 * std::numbers::pi * params.frequency_cycles_per_image;

  TextureImage img;
  img.shape = shape;
  img.fabric_id = params.name;
  img.pixels.resize(shape.pixel_count());
  const std::size_t plane = static_cast<std::size_t>(shape.height) * shape.width;
  for (int y = 0; y < shape.height; ++y) {
    const double v = (y + 0.5) / shape.height - 0.5;
    for (int x = 0; x < shape.width; ++x) {
      const double u = (x + 0.5) / shape.width - 0.5;
      const double base = 0.5 + 0.4 * std::sin(omega * (u * kx + v * ky) + phase);
      for (int c = 0; c < shape.channels; ++c) {
        const double noise = params.noise_sigma > 0.0 ? params.noise_sigma * rng.normal() : 0.0;
        img.pixels[c * plane + static_cast<std::size_t>(y) * shape.width + x] = std::clamp(base + noise, 0.0, 1.0);
      }
    }
  }
  return img;
}

Dataset::Dataset(std::vector<Fabric> fabrics, ImageShape shape, std::string origin)
    : fabrics_(std::move(fabrics)), shape_(shape), origin_(std::move(origin)) {
  if (fabrics_.empty()) throw Error(ErrorCode::DatasetEmpty, "dataset has no fabrics");
  for (const Fabric& f : fabrics_) {
    if (f.images.empty() && !f.synthetic) throw Error(ErrorCode::FabricEmpty, f.id);
    if (std::find(ids_.begin(), ids_.end(), f.id) != ids_.end())
      throw Error(ErrorCode::ParamError, "duplicate fabric id '" + f.id + "'");
    for (const TextureImage& img : f.images) {
      if (img.shape != shape_)
        throw Error(ErrorCode::ShapeError, "image '" + img.id + "' has shape " + to_string(img.shape) +
                                               ", dataset expects " + to_string(shape_));
      if (img.fabric_id != f.id)
        throw Error(ErrorCode::ParamError, "image '" + img.id + "' filed under the wrong fabric");
    }
    ids_.push_back(f.id);
  }
}

std::size_t Dataset::image_count() const {
  std::size_t n = 0;
  for (const Fabric& f : fabrics_) n += f.images.size();
  return n;
}

bool Dataset::contains(std::string_view fabric_id) const {
  return std::find(ids_.begin(), ids_.end(), fabric_id) != ids_.end();
}

const Dataset::Fabric& Dataset::fabric(std::string_view fabric_id) const {
  for (const Fabric& f : fabrics_)
    if (f.id == fabric_id) return f;
  throw Error(ErrorCode::UnknownFabric, std::string(fabric_id));
}

Dataset load_dataset(const fs::path& root, const LoadOptions& options) {
  if (options.channels != 1 && options.channels != 3)
    throw Error(ErrorCode::ParamError, "channels must be 1 or 3");
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error(ErrorCode::DatasetEmpty, root.string() + " is not a directory");

  std::vector<fs::path> fabric_dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) fabric_dirs.push_back(entry.path());
  std::sort(fabric_dirs.begin(), fabric_dirs.end());
  if (fabric_dirs.empty()) throw Error(ErrorCode::DatasetEmpty, root.string() + " has no fabric directories");

  std::optional<int> height = options.height;
  std::optional<int> width = options.width;
  std::vector<Dataset::Fabric> fabrics;
  for (const fs::path& dir : fabric_dirs) {
    Dataset::Fabric fabric;
    fabric.id = dir.filename().string();
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && io::has_raster_extension(entry.path())) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(ErrorCode::FabricEmpty, fabric.id);
    for (const fs::path& file : files) {
      const io::Raster raster = io::read_raster(file);
      if (!height) height = raster.height;
      if (!width) width = raster.width;
      TextureImage img = io::to_texture(raster, options.channels);
      img.pixels = resize_image(img.pixels, img.shape, *height, *width);
      img.shape = {*height, *width, options.channels};
      img.id = fabric.id + "/" + file.filename().string();
      img.fabric_id = fabric.id;
      img.source = FileSource{file.string()};
      fabric.images.push_back(std::move(img));
    }
    fabrics.push_back(std::move(fabric));
  }
  return Dataset(std::move(fabrics), {*height, *width, options.channels}, "directory:" + root.string());
}

void save_dataset(const Dataset& dataset, const fs::path& root) {
  fs::create_directories(root);
  for (const auto& fabric : dataset.fabrics()) {
    const fs::path dir = root / fabric.id;
    fs::create_directories(dir);
    int index = 0;
    for (const TextureImage& img : fabric.images) {
      char name[32];
      std::snprintf(name, sizeof(name), "%05d.png", index++);
      io::write_png(dir / name, io::to_raster(img));
    }
  }
}

Dataset generate_synthetic(std::span<const SyntheticClassParams> classes, int n_per_class, ImageShape shape,
                           std::uint64_t seed) {
  if (n_per_class < 1) throw Error(ErrorCode::ParamError, "n_per_class must be >= 1");
  if (classes.empty()) throw Error(ErrorCode::ParamError, "at least one synthetic class is required");
  if (shape.height < 1 || shape.width < 1 || (shape.channels != 1 && shape.channels != 3))
    throw Error(ErrorCode::ParamError, "invalid image shape " + to_string(shape));
  std::vector<Dataset::Fabric> fabrics;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const SyntheticClassParams& params = classes[c];
    params.validate();
    if (params.name.empty()) throw Error(ErrorCode::ParamError, "synthetic class needs a name");
    Dataset::Fabric fabric{params.name, {}, params};
    for (int n = 0; n < n_per_class; ++n) {
      Rng rng(derive_seed(seed, {c, static_cast<std::uint64_t>(n)}));
      TextureImage img = render_synthetic(params, shape, rng);
      img.id = params.name + "#" + std::to_string(n);
      img.source = SyntheticSource{static_cast<int>(c), static_cast<std::uint64_t>(n)};
      fabric.images.push_back(std::move(img));
    }
    fabrics.push_back(std::move(fabric));
  }
  return Dataset(std::move(fabrics), shape, "synthetic:seed=" + std::to_string(seed));
}

std::vector<TextureImage> augment_rotations(const TextureImage& image, int copies, Rng& rng) {
  if (copies < 1) throw Error(ErrorCode::ParamError, "copies must be >= 1");
  std::vector<TextureImage> out;
  out.reserve(copies);
  for (int i = 0; i < copies; ++i) out.push_back(rotate_image(image, rng.uniform(0.0, 360.0)));
  return out;
}

Touch TouchSampler::sample(std::string_view fabric_id, Rng& rng) {
  const Dataset::Fabric& fabric = dataset_->fabric(fabric_id);
  if (fabric.synthetic) {
    auto& count = draws_[fabric.id];
    Rng draw_rng(rng.next_u64());
    TextureImage img = render_synthetic(*fabric.synthetic, dataset_->shape(), draw_rng);
    const auto& ids = dataset_->fabric_ids();
    const auto class_index = static_cast<int>(std::find(ids.begin(), ids.end(), fabric.id) - ids.begin());
    img.id = fabric.id + "#touch" + std::to_string(count);
    img.fabric_id = fabric.id;
    img.source = SyntheticSource{class_index, count};
    ++count;
    return {std::move(img), false};
  }

  auto it = remaining_.find(fabric_id);
  if (it == remaining_.end()) {
    std::vector<std::size_t> all(fabric.images.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    it = remaining_.emplace(fabric.id, std::move(all)).first;
  }
  std::vector<std::size_t>& pool = it->second;
  if (pool.empty()) return {fabric.images[rng.below(fabric.images.size())], true};
  const std::size_t pick = rng.below(pool.size());
  const std::size_t index = pool[pick];
  pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  return {fabric.images[index], false};
}

}  // namespace artex
