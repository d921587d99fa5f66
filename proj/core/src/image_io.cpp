#include "artex/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "artex/error.hpp"

namespace artex::io {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void decode_fail(const fs::path& path, const std::string& why) {
  throw Error(ErrorCode::DecodeError, path.string() + ": " + why);
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) decode_fail(path, "cannot open");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------- PNG

struct PngReadState {
  std::FILE* file = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadState() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (file) std::fclose(file);
  }
};

// Returns false on a libpng error; rows are written into `bytes`.
bool png_decode(PngReadState& st, std::vector<unsigned char>& bytes, int& width, int& height, int& channels,
                int& bit_depth) {
  if (setjmp(png_jmpbuf(st.png))) return false;
  png_init_io(st.png, st.file);
  png_read_info(st.png, st.info);
  const png_byte color = png_get_color_type(st.png, st.info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(st.png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(st.png, st.info) < 8)
    png_set_expand_gray_1_2_4_to_8(st.png);
  if (png_get_valid(st.png, st.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(st.png);
  if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(st.png, st.info, PNG_INFO_tRNS))
    png_set_strip_alpha(st.png);
  png_set_swap(st.png);  // 16-bit samples little endian in memory
  png_read_update_info(st.png, st.info);

  width = static_cast<int>(png_get_image_width(st.png, st.info));
  height = static_cast<int>(png_get_image_height(st.png, st.info));
  channels = png_get_channels(st.png, st.info);
  bit_depth = png_get_bit_depth(st.png, st.info);
  const std::size_t rowbytes = png_get_rowbytes(st.png, st.info);
  bytes.resize(rowbytes * static_cast<std::size_t>(height));
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) rows[y] = bytes.data() + rowbytes * y;
  png_read_image(st.png, rows.data());
  png_read_end(st.png, nullptr);
  return true;
}

Raster read_png(const fs::path& path) {
  PngReadState st;
  st.file = std::fopen(path.c_str(), "rb");
  if (!st.file) decode_fail(path, "cannot open");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, st.file) != 8 || png_sig_cmp(sig, 0, 8) != 0) decode_fail(path, "not a PNG file");
  st.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                  [](png_structp, png_const_charp) {});
  if (!st.png) decode_fail(path, "libpng initialisation failed");
  st.info = png_create_info_struct(st.png);
  if (!st.info) decode_fail(path, "libpng initialisation failed");
  png_set_sig_bytes(st.png, 8);

  std::vector<unsigned char> bytes;
  int width = 0, height = 0, channels = 0, depth = 0;
  if (!png_decode(st, bytes, width, height, channels, depth)) decode_fail(path, "corrupt PNG data");
  if (channels != 1 && channels != 3) decode_fail(path, "unsupported channel layout");

  Raster r{height, width, channels, {}};
  const std::size_t n = static_cast<std::size_t>(width) * height * channels;
  r.data.resize(n);
  if (depth == 16) {
    for (std::size_t i = 0; i < n; ++i)
      r.data[i] = (bytes[2 * i] | (bytes[2 * i + 1] << 8)) / 65535.0;
  } else {
    for (std::size_t i = 0; i < n; ++i) r.data[i] = bytes[i] / 255.0;
  }
  return r;
}

// ---------------------------------------------------------------- PGM

Raster read_pgm(const fs::path& path) {
  const auto bytes = read_bytes(path);
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space();
    long v = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      any = true;
      if (v > 1'000'000) decode_fail(path, "header value out of range");
    }
    if (!any) decode_fail(path, "malformed PGM header");
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
    decode_fail(path, "not a PGM file");
  const bool binary = bytes[1] == '5';
  pos = 2;
  const long width = read_int();
  const long height = read_int();
  const long maxval = read_int();
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) decode_fail(path, "bad PGM dimensions");
  Raster r{static_cast<int>(height), static_cast<int>(width), 1, {}};
  const std::size_t n = static_cast<std::size_t>(width) * height;
  r.data.resize(n);
  if (binary) {
    ++pos;  // single whitespace after maxval
    const std::size_t bps = maxval > 255 ? 2 : 1;
    if (bytes.size() < pos + n * bps) decode_fail(path, "truncated PGM data");
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned v = bps == 2 ? (bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1] : bytes[pos + i];
      if (v > static_cast<unsigned>(maxval)) decode_fail(path, "sample exceeds maxval");
      r.data[i] = static_cast<double>(v) / maxval;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const long v = read_int();
      if (v > maxval) decode_fail(path, "sample exceeds maxval");
      r.data[i] = static_cast<double>(v) / maxval;
    }
  }
  return r;
}

// ---------------------------------------------------------------- BMP

std::uint32_t le32(const std::vector<unsigned char>& b, std::size_t at) {
  return b[at] | (b[at + 1] << 8) | (b[at + 2] << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}
std::uint16_t le16(const std::vector<unsigned char>& b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

Raster read_bmp(const fs::path& path) {
  const auto b = read_bytes(path);
  if (b.size() < 54 || b[0] != 'B' || b[1] != 'M') decode_fail(path, "not a BMP file");
  const std::uint32_t data_offset = le32(b, 10);
  const std::uint32_t header_size = le32(b, 14);
  if (header_size < 40) decode_fail(path, "unsupported BMP header");
  const auto width = static_cast<std::int32_t>(le32(b, 18));
  const auto raw_height = static_cast<std::int32_t>(le32(b, 22));
  const std::uint16_t bpp = le16(b, 28);
  const std::uint32_t compression = le32(b, 30);
  if (compression != 0 && !(compression == 3 && bpp == 32)) decode_fail(path, "compressed BMP not supported");
  if (bpp != 8 && bpp != 24 && bpp != 32) decode_fail(path, "unsupported BMP bit depth");
  if (width <= 0 || raw_height == 0 || width > 100000 || std::abs(raw_height) > 100000)
    decode_fail(path, "bad BMP dimensions");
  const bool bottom_up = raw_height > 0;
  const int height = std::abs(raw_height);
  const std::size_t row_stride = ((static_cast<std::size_t>(width) * bpp + 31) / 32) * 4;
  if (b.size() < data_offset + row_stride * height) decode_fail(path, "truncated BMP data");

  std::vector<std::array<double, 3>> palette;
  bool gray_palette = true;
  if (bpp == 8) {
    std::uint32_t colors = le32(b, 46);
    if (colors == 0) colors = 256;
    const std::size_t pal_at = 14 + header_size;
    if (b.size() < pal_at + colors * 4) decode_fail(path, "truncated BMP palette");
    for (std::uint32_t i = 0; i < colors; ++i) {
      const double bl = b[pal_at + 4 * i] / 255.0, g = b[pal_at + 4 * i + 1] / 255.0,
                   rd = b[pal_at + 4 * i + 2] / 255.0;
      palette.push_back({rd, g, bl});
      gray_palette = gray_palette && rd == g && g == bl;
    }
  }
  const int channels = (bpp == 8 && gray_palette) ? 1 : 3;
  Raster r{height, width, channels, std::vector<double>(static_cast<std::size_t>(width) * height * channels)};
  for (int y = 0; y < height; ++y) {
    const std::size_t src_row = data_offset + row_stride * (bottom_up ? height - 1 - y : y);
    for (int x = 0; x < width; ++x) {
      double* dst = &r.data[(static_cast<std::size_t>(y) * width + x) * channels];
      if (bpp == 8) {
        const unsigned idx = b[src_row + x];
        if (idx >= palette.size()) decode_fail(path, "palette index out of range");
        for (int c = 0; c < channels; ++c) dst[c] = palette[idx][c];
      } else {
        const std::size_t at = src_row + static_cast<std::size_t>(x) * (bpp / 8);
        dst[0] = b[at + 2] / 255.0;
        dst[1] = b[at + 1] / 255.0;
        dst[2] = b[at] / 255.0;
      }
    }
  }
  return r;
}

}  // namespace

bool has_raster_extension(const fs::path& path) {
  const std::string ext = lower_extension(path);
  return ext == ".png" || ext == ".pgm" || ext == ".bmp";
}

Raster read_raster(const fs::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".bmp") return read_bmp(path);
  decode_fail(path, "unsupported file extension");
}

void write_png(const fs::path& path, const Raster& raster) {
  if (raster.channels != 1 && raster.channels != 3)
    throw Error(ErrorCode::IoError, path.string() + ": PNG writer supports 1 or 3 channels");
  // Classic API: the simplified writer would treat 16-bit data as linear light.
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw Error(ErrorCode::IoError, "cannot create " + path.string());
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> file(f, &std::fclose);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoError, "libpng initialisation failed");
  }
  const std::size_t row_samples = static_cast<std::size_t>(raster.width) * raster.channels;
  std::vector<unsigned char> bytes(row_samples * 2 * raster.height);
  for (std::size_t i = 0; i < raster.data.size(); ++i) {
    const auto v = static_cast<unsigned>(std::lround(std::clamp(raster.data[i], 0.0, 1.0) * 65535.0));
    bytes[2 * i] = static_cast<unsigned char>(v >> 8);
    bytes[2 * i + 1] = static_cast<unsigned char>(v & 0xff);
  }
  std::vector<png_bytep> rows(raster.height);
  for (int y = 0; y < raster.height; ++y) rows[y] = bytes.data() + row_samples * 2 * y;
  volatile bool ok = false;
  if (!setjmp(png_jmpbuf(png))) {
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(raster.width), static_cast<png_uint_32>(raster.height), 16,
                 raster.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    ok = true;
  }
  png_destroy_write_struct(&png, &info);
  if (!ok) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

void write_pgm(const fs::path& path, const Raster& raster) {
  if (raster.channels != 1) throw Error(ErrorCode::IoError, path.string() + ": PGM requires one channel");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot create " + path.string());
  out << "P5\n" << raster.width << " " << raster.height << "\n255\n";
  for (double v : raster.data) out.put(static_cast<char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
}

TextureImage to_texture(const Raster& raster, int channels) {
  TextureImage img;
  img.shape = {raster.height, raster.width, channels};
  const std::size_t plane = static_cast<std::size_t>(raster.height) * raster.width;
  img.pixels.resize(plane * channels);
  for (std::size_t p = 0; p < plane; ++p) {
    const double* src = &raster.data[p * raster.channels];
    if (channels == 1) {
      img.pixels[p] = raster.channels == 1 ? src[0] : 0.299 * src[0] + 0.587 * src[1] + 0.114 * src[2];
    } else {
      for (int c = 0; c < 3; ++c) img.pixels[c * plane + p] = raster.channels == 1 ? src[0] : src[c];
    }
  }
  for (double& v : img.pixels) v = std::clamp(v, 0.0, 1.0);
  return img;
}

Raster to_raster(const TextureImage& image) {
  Raster r{image.shape.height, image.shape.width, image.shape.channels, {}};
  const std::size_t plane = static_cast<std::size_t>(r.height) * r.width;
  r.data.resize(plane * r.channels);
  for (std::size_t p = 0; p < plane; ++p)
    for (int c = 0; c < r.channels; ++c) r.data[p * r.channels + c] = image.pixels[c * plane + p];
  return r;
}

}  // namespace artex::io
