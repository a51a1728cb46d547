#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "softprobe/denoise.hpp"
#include "softprobe/inpaint.hpp"
#include "softprobe/mask_schedule.hpp"
#include "softprobe/recovery.hpp"
#include "test_support.hpp"

using namespace softprobe;
using Catch::Approx;

TEST_CASE("median radius 0 is the identity") {
  const Image img = testing::random_image(9, 9, 1);
  const MedianDenoiser denoiser(0);
  REQUIRE(max_abs_difference(denoiser.denoise(img), img) == 0.0);
}

TEST_CASE("median removes sparse salt-and-pepper exactly away from borders") {
  Image img = testing::constant_image(16, 16, 0.5f);
  // ~1% density, well separated impulses
  img.at(0, 4, 4) = 1.0f;
  img.at(1, 9, 10) = 0.0f;
  img.at(2, 12, 5) = 1.0f;

  const MedianDenoiser denoiser(1);
  const Image out = denoiser.denoise(img);
  for (int c = 0; c < kChannels; ++c) {
    for (int y = 1; y < 15; ++y) {
      for (int x = 1; x < 15; ++x) {
        REQUIRE(out.at(c, y, x) == Approx(0.5f));
      }
    }
  }
}

TEST_CASE("gaussian denoising reduces the distance to the clean image") {
  const Image clean = testing::constant_image(20, 20, 0.5f);
  Image noisy = clean;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<float> noise(-0.1f, 0.1f);
  for (float& v : noisy.data()) v += noise(rng);
  noisy.clamp01();

  const GaussianDenoiser denoiser(1.0);
  const Image out = denoiser.denoise(noisy);
  REQUIRE(lp_distance(out, clean, 2.0) < lp_distance(noisy, clean, 2.0));
}

TEST_CASE("nlm denoising reduces the distance to the clean image") {
  const Image clean = testing::random_image(12, 12, 3);
  Image smooth = GaussianDenoiser(2.0).denoise(clean);  // smooth ground truth
  Image noisy = smooth;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<float> noise(-0.12f, 0.12f);
  for (float& v : noisy.data()) v += noise(rng);
  noisy.clamp01();

  const NlmDenoiser denoiser;
  const Image out = denoiser.denoise(noisy);
  REQUIRE(lp_distance(out, smooth, 2.0) < lp_distance(noisy, smooth, 2.0));
}

TEST_CASE("harmonic inpainting fills a constant image constantly") {
  const Image img = testing::constant_image(12, 12, 0.37f);
  BinaryMask mask(12, 12, 1);
  for (int y = 4; y < 7; ++y) {
    for (int x = 5; x < 8; ++x) mask.set(y, x, 0);
  }
  const HarmonicInpainter inpainter;
  const Image out = inpainter.inpaint(apply_mask(img, mask), mask);
  REQUIRE(max_abs_difference(out, img) < 1e-5);
}

TEST_CASE("harmonic inpainting reproduces a linear ramp within tolerance") {
  Image ramp(16, 16, 0.0f);
  for (int c = 0; c < kChannels; ++c) {
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) {
        ramp.at(c, y, x) = (0.2f + 0.6f * x / 15.0f + 0.15f * y / 15.0f) / 2.0f;
      }
    }
  }
  ChessPatternConfig cfg;
  cfg.square_size = 2;
  cfg.squares_per_side = 2;
  cfg.spacing = 2;
  cfg.stride = 2;
  cfg.rows = cfg.cols = 16;
  const MaskSchedule schedule = build_schedule(cfg);
  const HarmonicInpainter inpainter;
  const Image out = recover_inpaint(ramp, schedule, inpainter);
  REQUIRE(max_abs_difference(out, ramp) < 0.05);
}

TEST_CASE("harmonic inpainting leaves surviving pixels untouched") {
  std::mt19937_64 rng(17);
  const HarmonicInpainter inpainter;
  for (int trial = 0; trial < 10; ++trial) {
    const Image img = testing::random_image(10, 10, rng());
    BinaryMask mask(10, 10, 1);
    for (int y = 0; y < 10; ++y) {
      for (int x = 0; x < 10; ++x) {
        if (rng() % 4 == 0) mask.set(y, x, 0);
      }
    }
    const Image masked = apply_mask(img, mask);
    const Image filled = inpainter.inpaint(masked, mask);
    for (int c = 0; c < kChannels; ++c) {
      for (int y = 0; y < 10; ++y) {
        for (int x = 0; x < 10; ++x) {
          if (mask.at(y, x)) {
            REQUIRE(std::abs(filled.at(c, y, x) - img.at(c, y, x)) <= 1e-6);
          }
        }
      }
    }
  }
}

TEST_CASE("deterministic backends produce identical outputs on repeated calls") {
  const Image img = testing::random_image(14, 14, 23);
  const NlmDenoiser nlm;
  REQUIRE(max_abs_difference(nlm.denoise(img), nlm.denoise(img)) == 0.0);

  BinaryMask mask(14, 14, 1);
  for (int y = 5; y < 8; ++y) {
    for (int x = 5; x < 8; ++x) mask.set(y, x, 0);
  }
  const HarmonicInpainter inpainter;
  const Image masked = apply_mask(img, mask);
  REQUIRE(max_abs_difference(inpainter.inpaint(masked, mask),
                             inpainter.inpaint(masked, mask)) == 0.0);
}
