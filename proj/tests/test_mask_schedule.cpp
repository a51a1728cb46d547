#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "softprobe/mask_schedule.hpp"
#include "test_support.hpp"

using namespace softprobe;
using Catch::Approx;

TEST_CASE("default 224 configuration reproduces the published mask count") {
  const MaskSchedule schedule = build_schedule(ChessPatternConfig::default_224());
  REQUIRE(schedule.size() == 1156);  // 34^2 single-pixel offsets
  const int min_cov = *std::min_element(schedule.coverage.begin(), schedule.coverage.end());
  REQUIRE(min_cov >= 1);
}

TEST_CASE("full-period traversal of the same geometry yields 1225 masks") {
  ChessPatternConfig cfg = ChessPatternConfig::default_224();
  cfg.traversal = cfg.period();  // 35
  REQUIRE(build_schedule(cfg).size() == 1225);
}

TEST_CASE("degenerate single-pixel pattern masks everything once") {
  ChessPatternConfig cfg;
  cfg.square_size = 1;
  cfg.squares_per_side = 1;
  cfg.spacing = 0;
  cfg.stride = 1;
  cfg.rows = cfg.cols = 12;
  const MaskSchedule schedule = build_schedule(cfg);
  REQUIRE(schedule.size() == 1);
  REQUIRE(schedule.masks[0].count_zeros() == 144);
  for (int count : schedule.coverage) REQUIRE(count == 1);
}

TEST_CASE("8x8 d=2 spacing=2 stride=2 matches brute-force coverage") {
  ChessPatternConfig cfg;
  cfg.square_size = 2;
  cfg.squares_per_side = 2;
  cfg.spacing = 2;
  cfg.stride = 2;
  cfg.rows = cfg.cols = 8;
  const MaskSchedule schedule = build_schedule(cfg);
  REQUIRE(schedule.size() == 4);

  // Independent enumeration of the periodic pattern at each offset.
  for (size_t i = 0; i < schedule.size(); ++i) {
    const int off_r = static_cast<int>(i / 2) * 2;
    const int off_c = static_cast<int>(i % 2) * 2;
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) {
        const bool zero = ((y - off_r) % 4 + 4) % 4 < 2 && ((x - off_c) % 4 + 4) % 4 < 2;
        REQUIRE(schedule.masks[i].at(y, x) == (zero ? 0 : 1));
      }
    }
  }
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      int count = 0;
      for (const BinaryMask& mask : schedule.masks) count += mask.at(y, x) ? 0 : 1;
      REQUIRE(schedule.coverage_at(y, x) == count);
      REQUIRE(count >= 1);
    }
  }
}

TEST_CASE("configurations that leave uncovered pixels are rejected") {
  ChessPatternConfig cfg;
  cfg.square_size = 2;
  cfg.squares_per_side = 2;
  cfg.spacing = 6;
  cfg.stride = 4;
  cfg.rows = cfg.cols = 16;
  cfg.traversal = 4;  // offsets 0 only with stride 4 -> most pixels never masked
  REQUIRE_THROWS_AS(build_schedule(cfg), ConfigError);
}

TEST_CASE("invalid geometry is rejected") {
  ChessPatternConfig cfg;
  cfg.square_size = 0;
  REQUIRE_THROWS_AS(build_schedule(cfg), ConfigError);

  cfg = ChessPatternConfig();
  cfg.rows = cfg.cols = 16;  // default d=5 needs min dim >= 20
  REQUIRE_THROWS_AS(build_schedule(cfg), ConfigError);

  cfg = ChessPatternConfig();
  cfg.rows = cfg.cols = 64;  // nominal 6x6 block of period 35 cannot fit
  REQUIRE_THROWS_AS(build_schedule(cfg), ConfigError);
}

namespace {

MaskSchedule small_schedule() {
  ChessPatternConfig cfg;
  cfg.square_size = 2;
  cfg.squares_per_side = 2;
  cfg.spacing = 2;
  cfg.stride = 2;
  cfg.rows = cfg.cols = 8;
  return build_schedule(cfg);
}

}  // namespace

TEST_CASE("aggregation of identical partials returns that image") {
  const MaskSchedule schedule = small_schedule();
  const Image reference = testing::random_image(8, 8, 77);
  const std::vector<Image> partials(schedule.size(), reference);
  const Image out = aggregate_inpainted(partials, schedule);
  REQUIRE(max_abs_difference(out, reference) < 1e-9);
}

TEST_CASE("pixel covered by two masks averages the two partial values") {
  MaskSchedule schedule;
  schedule.rows = schedule.cols = 2;
  schedule.masks.push_back(BinaryMask(2, 2, 0));  // zeros everything
  BinaryMask second(2, 2, 1);
  second.set(0, 0, 0);
  schedule.masks.push_back(second);
  schedule.coverage = {2, 1, 1, 1};

  const std::vector<Image> partials = {testing::constant_image(2, 2, 0.2f),
                                       testing::constant_image(2, 2, 0.6f)};
  const Image out = aggregate_inpainted(partials, schedule);
  REQUIRE(out.at(0, 0, 0) == Approx(0.4f));
  REQUIRE(out.at(0, 0, 1) == Approx(0.2f));
  REQUIRE(out.at(0, 1, 1) == Approx(0.2f));
}

TEST_CASE("aggregation equals the brute-force per-pixel oracle") {
  const MaskSchedule schedule = small_schedule();
  std::mt19937_64 rng(123);
  std::vector<Image> partials;
  for (size_t i = 0; i < schedule.size(); ++i) {
    partials.push_back(testing::random_image(8, 8, rng()));
  }
  const Image out = aggregate_inpainted(partials, schedule);
  const Image expected = testing::aggregate_oracle(partials, schedule);
  REQUIRE(max_abs_difference(out, expected) < 1e-6);
}

TEST_CASE("aggregation is permutation invariant") {
  const MaskSchedule schedule = small_schedule();
  std::mt19937_64 rng(5);
  std::vector<Image> partials;
  for (size_t i = 0; i < schedule.size(); ++i) {
    partials.push_back(testing::random_image(8, 8, rng()));
  }
  const Image base = aggregate_inpainted(partials, schedule);

  std::vector<size_t> perm(schedule.size());
  std::iota(perm.begin(), perm.end(), size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  MaskSchedule shuffled = schedule;
  std::vector<Image> shuffled_partials;
  for (size_t i = 0; i < perm.size(); ++i) {
    shuffled.masks[i] = schedule.masks[perm[i]];
    shuffled_partials.push_back(partials[perm[i]]);
  }
  const Image out = aggregate_inpainted(shuffled_partials, shuffled);
  REQUIRE(max_abs_difference(out, base) < 1e-6);
}

TEST_CASE("aggregation validates inputs") {
  const MaskSchedule schedule = small_schedule();
  std::vector<Image> partials(schedule.size() - 1, testing::random_image(8, 8, 1));
  REQUIRE_THROWS_AS(aggregate_inpainted(partials, schedule), ContractViolationError);

  std::vector<Image> wrong(schedule.size(), testing::random_image(8, 9, 1));
  REQUIRE_THROWS_AS(aggregate_inpainted(wrong, schedule), ContractViolationError);
}

TEST_CASE("union of zero regions covers the full grid") {
  for (auto cfg : {ChessPatternConfig::default_224(), [] {
                     ChessPatternConfig c;
                     c.square_size = 3;
                     c.squares_per_side = 2;
                     c.spacing = 5;
                     c.stride = 2;
                     c.rows = 40;
                     c.cols = 56;
                     return c;
                   }()}) {
    const MaskSchedule schedule = build_schedule(cfg);
    for (int count : schedule.coverage) REQUIRE(count >= 1);
  }
}
