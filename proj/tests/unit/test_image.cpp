#include <cmath>
#include <fstream>

#include "artex/image_io.hpp"
#include "helpers.hpp"

namespace artex {
namespace {

using test::scratch_dir;

TextureImage smooth_image(int h, int w, int channels = 1) {
  TextureImage img;
  img.id = "smooth";
  img.fabric_id = "f";
  img.shape = {h, w, channels};
  img.pixels.resize(img.shape.pixel_count());
  for (int c = 0; c < channels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        img.at(c, y, x) = 0.5 + 0.3 * std::sin(0.35 * x + 0.2 * c) * std::cos(0.25 * y);
  return img;
}

TextureImage random_image(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  TextureImage img;
  img.id = "noise";
  img.shape = {h, w, 1};
  img.pixels.resize(img.shape.pixel_count());
  for (double& p : img.pixels) p = rng.uniform();
  return img;
}

TEST(RotateImage, ZeroAngleIsIdentity) {
  const TextureImage img = random_image(12, 12, 1);
  const TextureImage out = rotate_image(img, 0.0);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) EXPECT_NEAR(out.pixels[i], img.pixels[i], 1e-12);
}

TEST(RotateImage, QuarterTurnPermutesPixels) {
  const int n = 10;
  const TextureImage img = random_image(n, n, 2);
  const TextureImage out = rotate_image(img, 90.0);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) EXPECT_NEAR(out.at(0, y, x), img.at(0, n - 1 - x, y), 1e-9);
}

TEST(RotateImage, OutOfFrameTakesMeanIntensity) {
  const TextureImage img = random_image(16, 16, 3);
  const TextureImage out = rotate_image(img, 45.0);
  EXPECT_DOUBLE_EQ(out.at(0, 0, 0), img.mean_intensity());
  EXPECT_DOUBLE_EQ(out.at(0, 15, 15), img.mean_intensity());
}

TEST(RotateImage, ConstantImageStaysConstant) {
  TextureImage img = random_image(9, 9, 4);
  for (double& p : img.pixels) p = 0.37;
  for (double a : {13.0, 77.5, 181.0, 300.0}) {
    const TextureImage out = rotate_image(img, a);
    for (double p : out.pixels) EXPECT_NEAR(p, 0.37, 1e-14);
  }
}

TEST(RotateImage, RoundTripOnSmoothInput) {
  const TextureImage img = smooth_image(32, 32, 3);
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const double a = rng.uniform(0.0, 360.0);
    const TextureImage back = rotate_image(rotate_image(img, a), -a);
    // Compare inside the inscribed disc, which stays in frame under any angle.
    double err = 0;
    int n = 0;
    const double c = 15.5, r = 14.5;
    for (int ch = 0; ch < 3; ++ch)
      for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
          if (std::hypot(y - c, x - c) <= r) {
            err += std::abs(back.at(ch, y, x) - img.at(ch, y, x));
            ++n;
          }
    EXPECT_LT(err / n, 0.05) << "angle " << a;
  }
}

TEST(RotateImage, RecordsProvenanceAndRange) {
  const TextureImage img = random_image(8, 8, 6);
  const TextureImage out = rotate_image(img, 33.0);
  const auto* src = std::get_if<AugmentedSource>(&out.source);
  ASSERT_NE(src, nullptr);
  EXPECT_EQ(src->parent_id, "noise");
  EXPECT_DOUBLE_EQ(src->angle_degrees, 33.0);
  EXPECT_NE(out.id, img.id);
  EXPECT_NO_THROW(out.validate());
}

TEST(TextureImage, ValidateRejectsBadPixels) {
  TextureImage img = random_image(4, 4, 7);
  img.pixels[3] = 1.5;
  EXPECT_ARTEX_ERROR(img.validate(), ErrorCode::ShapeError);
  img.pixels.pop_back();
  EXPECT_ARTEX_ERROR(img.validate(), ErrorCode::ShapeError);
}

TEST(ResizeImage, PreservesConstantAndMean) {
  const ImageShape from{20, 30, 1};
  std::vector<double> flat(from.pixel_count(), 0.25);
  const auto up = resize_image(flat, from, 40, 45);
  ASSERT_EQ(up.size(), 40u * 45u);
  for (double v : up) EXPECT_NEAR(v, 0.25, 1e-12);

  const TextureImage img = random_image(32, 32, 8);
  const auto down = resize_image(img.pixels, img.shape, 16, 8);
  double m = 0;
  for (double v : down) m += v;
  EXPECT_NEAR(m / down.size(), img.mean_intensity(), 1e-12);
}

TEST(ImageIo, PngRoundTripIs16BitExact) {
  const auto dir = scratch_dir("png");
  const TextureImage img = smooth_image(7, 9, 3);
  const io::Raster raster = io::to_raster(img);
  io::write_png(dir / "x.png", raster);
  const io::Raster back = io::read_raster(dir / "x.png");
  ASSERT_EQ(back.height, 7);
  ASSERT_EQ(back.width, 9);
  ASSERT_EQ(back.channels, 3);
  for (std::size_t i = 0; i < raster.data.size(); ++i) EXPECT_NEAR(back.data[i], raster.data[i], 0.5 / 65535 + 1e-12);
}

TEST(ImageIo, PgmRoundTripIs8BitExact) {
  const auto dir = scratch_dir("pgm");
  const io::Raster raster = io::to_raster(random_image(5, 6, 9));
  io::write_pgm(dir / "x.pgm", raster);
  const io::Raster back = io::read_raster(dir / "x.pgm");
  ASSERT_EQ(back.channels, 1);
  for (std::size_t i = 0; i < raster.data.size(); ++i) EXPECT_NEAR(back.data[i], raster.data[i], 0.5 / 255 + 1e-12);
}

TEST(ImageIo, ReadsUncompressed24BitBmp) {
  const auto dir = scratch_dir("bmp");
  // 2x2, bottom-up rows padded to 4 bytes; pixel (0,0) is pure red.
  const unsigned char bytes[] = {
      'B', 'M', 70, 0, 0, 0, 0, 0, 0, 0, 54, 0, 0, 0,                       // file header
      40, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 1, 0, 24, 0, 0, 0, 0, 0, 16, 0,  // info header
      0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
      0, 0, 0, 255, 255, 255, 0, 0,    // bottom row: black, white
      0, 0, 255, 0, 255, 0, 0, 0};     // top row: red, green
  std::ofstream(dir / "x.bmp", std::ios::binary).write(reinterpret_cast<const char*>(bytes), sizeof(bytes));
  const io::Raster r = io::read_raster(dir / "x.bmp");
  ASSERT_EQ(r.height, 2);
  ASSERT_EQ(r.width, 2);
  ASSERT_EQ(r.channels, 3);
  EXPECT_DOUBLE_EQ(r.data[0], 1.0);  // top-left red
  EXPECT_DOUBLE_EQ(r.data[1], 0.0);
  EXPECT_DOUBLE_EQ(r.data[4], 1.0);  // top-right green
  EXPECT_DOUBLE_EQ(r.data[9], 1.0);  // bottom-right white
}

TEST(ImageIo, CorruptFilesRaiseDecodeError) {
  const auto dir = scratch_dir("bad");
  std::ofstream(dir / "bad.png") << "not a png";
  std::ofstream(dir / "bad.pgm") << "P5\n4 4\n255\nab";
  std::ofstream(dir / "bad.bmp") << "BMxx";
  EXPECT_ARTEX_ERROR(io::read_raster(dir / "bad.png"), ErrorCode::DecodeError);
  EXPECT_ARTEX_ERROR(io::read_raster(dir / "bad.pgm"), ErrorCode::DecodeError);
  EXPECT_ARTEX_ERROR(io::read_raster(dir / "bad.bmp"), ErrorCode::DecodeError);
  EXPECT_ARTEX_ERROR(io::read_raster(dir / "missing.png"), ErrorCode::DecodeError);
}

TEST(ImageIo, ChannelConversion) {
  io::Raster rgb{1, 1, 3, {1.0, 0.0, 0.0}};
  const TextureImage gray = io::to_texture(rgb, 1);
  EXPECT_NEAR(gray.pixels[0], 0.299, 1e-12);
  io::Raster g{1, 2, 1, {0.2, 0.8}};
  const TextureImage three = io::to_texture(g, 3);
  ASSERT_EQ(three.pixels.size(), 6u);
  EXPECT_DOUBLE_EQ(three.at(2, 0, 1), 0.8);
}

}  // namespace
}  // namespace artex
