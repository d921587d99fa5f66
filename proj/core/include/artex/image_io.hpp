#pragma once

#include <filesystem>
#include <vector>

#include "artex/image.hpp"

namespace artex::io {

/// Decoded raster, interleaved (H, W, C) with intensities in [0, 1].
struct Raster {
  int height = 0;
  int width = 0;
  int channels = 0;  // 1 (gray), 3 (RGB)
  std::vector<double> data;
};

/// Decodes .png, .pgm (P2/P5, 8 or 16 bit) and uncompressed .bmp
/// (8/24/32 bit). Alpha channels are dropped. Throws DecodeError(path).
Raster read_raster(const std::filesystem::path& path);

/// Writes a 16-bit PNG (gray or RGB).
void write_png(const std::filesystem::path& path, const Raster& raster);

/// Writes an 8-bit binary PGM; requires a single channel.
void write_pgm(const std::filesystem::path& path, const Raster& raster);

bool has_raster_extension(const std::filesystem::path& path);

/// Converts between the interleaved raster layout and a TextureImage
/// (channel-major). Gray to RGB replicates; RGB to gray uses Rec. 601 luma.
TextureImage to_texture(const Raster& raster, int channels);
Raster to_raster(const TextureImage& image);

}  // namespace artex::io
