#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <memory>
#include <random>

#include "softprobe/denoise.hpp"
#include "softprobe/face_parse.hpp"
#include "softprobe/inpaint.hpp"
#include "softprobe/recovery.hpp"
#include "softprobe/super_resolve.hpp"
#include "test_support.hpp"

using namespace softprobe;
using Catch::Approx;

TEST_CASE("oracle inpainter recovers the original exactly") {
  ChessPatternConfig cfg;
  cfg.square_size = 2;
  cfg.squares_per_side = 2;
  cfg.spacing = 2;
  cfg.stride = 2;
  cfg.rows = cfg.cols = 12;
  const MaskSchedule schedule = build_schedule(cfg);
  const Image original = testing::random_image(12, 12, 55);
  const testing::OracleInpainter oracle(original);
  const Image recovered = recover_inpaint(original, schedule, oracle);
  REQUIRE(max_abs_difference(recovered, original) < 1e-9);
  REQUIRE(recovered.provenance() == Provenance::kRecovered);
}

TEST_CASE("contract-violating inpainter is a hard error") {
  // Violates the inpainter contract by perturbing surviving pixels.
  class Sloppy final : public InpaintBackend {
   public:
    const std::string& id() const override { return id_; }
    Image inpaint(const Image& masked, const BinaryMask&) const override {
      Image out = masked;
      for (float& v : out.data()) v = std::min(1.0f, v + 0.01f);
      return out;
    }
    std::string id_ = "sloppy";
  };

  ChessPatternConfig cfg;
  cfg.square_size = 2;
  cfg.squares_per_side = 2;
  cfg.spacing = 2;
  cfg.stride = 2;
  cfg.rows = cfg.cols = 8;
  const MaskSchedule schedule = build_schedule(cfg);
  const Image img = testing::random_image(8, 8, 3);
  REQUIRE_THROWS_AS(recover_inpaint(img, schedule, Sloppy()), ContractViolationError);
}

TEST_CASE("background removal with oracle parsers") {
  const Image img = testing::random_image(10, 10, 7);

  const Image all = recover_background_removal(img, testing::AllFaceParser());
  REQUIRE(max_abs_difference(all, img) == 0.0);

  const Image half = recover_background_removal(img, testing::LeftBackgroundParser());
  for (int c = 0; c < kChannels; ++c) {
    for (int y = 0; y < 10; ++y) {
      for (int x = 0; x < 10; ++x) {
        if (x < 5) {
          REQUIRE(half.at(c, y, x) == 0.0f);
        } else {
          REQUIRE(half.at(c, y, x) == img.at(c, y, x));
        }
      }
    }
  }

  REQUIRE_THROWS_AS(recover_background_removal(img, testing::NoFaceParser()), EmptyFaceError);
}

TEST_CASE("plane-fit parser isolates a disc on a synthetic scene") {
  Image img(24, 24, 0.0f);
  const double cx = 12.2, cy = 11.7, radius = 6.0;
  for (int c = 0; c < kChannels; ++c) {
    for (int y = 0; y < 24; ++y) {
      for (int x = 0; x < 24; ++x) {
        const double bg = 0.2 + 0.01 * x + 0.005 * y;
        const bool inside = (x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius;
        img.at(c, y, x) = static_cast<float>(inside ? 0.85 : bg);
      }
    }
  }
  const PlaneFitFaceParser parser(0.25, 0);
  const Image out = recover_background_removal(img, parser);
  int mismatches = 0;
  for (int y = 0; y < 24; ++y) {
    for (int x = 0; x < 24; ++x) {
      const bool inside = (x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius;
      const bool kept = out.at(0, y, x) != 0.0f;
      if (inside != kept) ++mismatches;
    }
  }
  // allow a thin band of boundary pixels to disagree
  REQUIRE(mismatches <= 8);
}

TEST_CASE("super-resolution identity limit and size validation") {
  const Image img = testing::random_image(24, 24, 9);
  const BicubicSuperResolver upscaler;

  const Image same = recover_super_resolve(img, 1.0, upscaler);
  REQUIRE(max_abs_difference(same, img) == 0.0);

  const Image forced = recover_super_resolve(img, 3.6, upscaler, {{12, 12}});
  REQUIRE(forced.height() == 24);
  REQUIRE(forced.width() == 24);

  REQUIRE_THROWS_AS(recover_super_resolve(img, 4.0, upscaler), ConfigError);  // floor(24/4)=6 < 8
  REQUIRE_THROWS_AS(recover_super_resolve(img, 0.5, upscaler), ConfigError);
}

TEST_CASE("super-resolution default low-res size is floor(dim/factor)") {
  const Image img = testing::random_image(64, 64, 10);
  // factor 3.6 -> floor(64/3.6) = 17 -> valid; checks the pass-through shape
  const BicubicSuperResolver upscaler;
  const Image out = recover_super_resolve(img, 3.6, upscaler);
  REQUIRE(out.height() == 64);
  REQUIRE(out.width() == 64);
}

namespace {

// Plain DFT energy above a frequency cut, one channel. O(n^2) oracle.
double high_frequency_energy(const Image& img, int channel, double cutoff_cycles) {
  const int n = img.height();
  double energy = 0.0;
  for (int ky = 0; ky < n; ++ky) {
    for (int kx = 0; kx < n; ++kx) {
      const double fy = std::min(ky, n - ky);
      const double fx = std::min(kx, n - kx);
      if (std::sqrt(fy * fy + fx * fx) <= cutoff_cycles) continue;
      std::complex<double> acc(0.0, 0.0);
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
          const double phase = -2.0 * M_PI * (static_cast<double>(ky) * y + static_cast<double>(kx) * x) / n;
          acc += static_cast<double>(img.at(channel, y, x)) *
                 std::complex<double>(std::cos(phase), std::sin(phase));
        }
      }
      energy += std::norm(acc);
    }
  }
  return energy;
}

}  // namespace

TEST_CASE("super-resolution removes energy above the low-res Nyquist") {
  Image checkerboard(32, 32, 0.0f);
  for (int c = 0; c < kChannels; ++c) {
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        checkerboard.at(c, y, x) = ((x + y) % 2) ? 0.9f : 0.1f;
      }
    }
  }
  const BicubicSuperResolver upscaler;
  const Image out = recover_super_resolve(checkerboard, 2.0, upscaler);  // 32 -> 16 -> 32
  // Nyquist of the 16px grid is 8 cycles; the full-rate checker lives at 16.
  const double before = high_frequency_energy(checkerboard, 0, 8.0);
  const double after = high_frequency_energy(out, 0, 8.0);
  REQUIRE(after < 0.2 * before);
}

TEST_CASE("pipeline composition matches running stages separately") {
  auto denoiser = std::make_shared<GaussianDenoiser>(1.0);
  auto inpainter = std::make_shared<HarmonicInpainter>();
  ChessPatternConfig cfg;
  cfg.square_size = 2;
  cfg.squares_per_side = 2;
  cfg.spacing = 2;
  cfg.stride = 2;
  cfg.rows = cfg.cols = 12;
  auto schedule = std::make_shared<MaskSchedule>(build_schedule(cfg));

  const Image img = testing::random_image(12, 12, 44);

  const RecoveryPipeline combined{
      "PP-DI", {RecoveryTransform::denoise(denoiser),
                RecoveryTransform::inpaint(inpainter, schedule)}};
  const RecoveryPipeline first{"d", {RecoveryTransform::denoise(denoiser)}};
  const RecoveryPipeline second{"in", {RecoveryTransform::inpaint(inpainter, schedule)}};

  const Image once = combined.run(img);
  const Image staged = second.run(first.run(img));
  REQUIRE(max_abs_difference(once, staged) == 0.0);
}

TEST_CASE("standard registry has exactly the nine reserved variants") {
  RecoveryBackends backends;
  backends.denoiser = std::make_shared<GaussianDenoiser>(1.0);
  backends.inpainter = std::make_shared<HarmonicInpainter>();
  ChessPatternConfig cfg;
  cfg.square_size = 2;
  cfg.squares_per_side = 2;
  cfg.spacing = 2;
  cfg.stride = 2;
  cfg.rows = cfg.cols = 12;
  backends.schedule = std::make_shared<MaskSchedule>(build_schedule(cfg));
  backends.autoencoder = nullptr;  // not touched by the structural checks below
  backends.parser = std::make_shared<testing::AllFaceParser>();
  const auto pipelines = standard_pipelines(backends);

  REQUIRE(pipelines.size() == 9);
  for (const char* name :
       {"PP-D", "PP-I", "PP-A", "PP-B", "PP-DI", "PP-DA", "PP-DB", "PP-IB", "PP-AB"}) {
    REQUIRE(pipelines.count(name) == 1);
  }
  REQUIRE(pipelines.at("PP-D").stages.size() == 1);
  REQUIRE(pipelines.at("PP-D").stages[0].kind() == TransformKind::kDenoise);
  REQUIRE(pipelines.at("PP-DI").stages[0].kind() == TransformKind::kDenoise);
  REQUIRE(pipelines.at("PP-DI").stages[1].kind() == TransformKind::kInpaint);
  REQUIRE(pipelines.at("PP-AB").stages[0].kind() == TransformKind::kAutoencode);
  REQUIRE(pipelines.at("PP-AB").stages[1].kind() == TransformKind::kBackgroundRemove);

  // PP-D on an image equals the one-transform recovery, and the result of a
  // PP-DI run equals denoise-then-inpaint.
  const Image img = testing::random_image(12, 12, 4);
  REQUIRE(max_abs_difference(pipelines.at("PP-D").run(img),
                             recover_denoise(img, *backends.denoiser)) == 0.0);
  REQUIRE(max_abs_difference(
              pipelines.at("PP-DI").run(img),
              recover_inpaint(recover_denoise(img, *backends.denoiser), *backends.schedule,
                              *backends.inpainter)) == 0.0);
}

TEST_CASE("transforms preserve dimensions and range on random inputs") {
  std::mt19937_64 rng(2);
  auto check = [](const Image& out, const Image& in) {
    REQUIRE(out.same_dims(in));
    for (float v : out.data()) {
      REQUIRE(v >= 0.0f);
      REQUIRE(v <= 1.0f);
    }
  };
  for (int trial = 0; trial < 5; ++trial) {
    const Image img = testing::random_image(12, 12, rng());
    check(recover_denoise(img, MedianDenoiser(1)), img);
    check(recover_denoise(img, GaussianDenoiser(1.2)), img);
    check(recover_denoise(img, NlmDenoiser()), img);
    check(recover_background_removal(img, testing::AllFaceParser()), img);
    check(recover_super_resolve(img, 1.4, BicubicSuperResolver()), img);
  }
}

TEST_CASE("pipeline errors carry the stage index") {
  RecoveryPipeline pipeline{"PP-X", {RecoveryTransform::background_remove(
                                        std::make_shared<testing::NoFaceParser>())}};
  const Image img = testing::random_image(8, 8, 5);
  REQUIRE_THROWS_AS(pipeline.run(img), EmptyFaceError);

  RecoveryPipeline empty{"PP-E", {}};
  REQUIRE_THROWS_AS(empty.run(img), ConfigError);
}
