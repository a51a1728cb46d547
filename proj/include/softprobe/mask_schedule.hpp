#pragma once

#include <optional>
#include <string>
#include <vector>

#include "softprobe/error.hpp"
#include "softprobe/image.hpp"

namespace softprobe {

// Geometry of the sliding chess-like masking pattern.
//
// The pattern is a periodic grid of square_size x square_size zero squares
// whose anchors repeat every (square_size + spacing) pixels in both axes.
// It is rendered across the whole image with plain clipping at the borders
// (squares crossing an edge are truncated) and translated over all offsets
// {0, stride, 2*stride, ...} < traversal in each axis, giving
// N = ceil(traversal / stride)^2 masks.
//
// squares_per_side describes the nominal pattern block (the block must fit
// inside the image); the rendered pattern tiles beyond the block so that the
// translated family covers every pixel.
//
// traversal defaults to the pattern period. The shipped 224x224 default
// (square_size 5, spacing 30 -> period 35) sets traversal = 34, which yields
// exactly 34^2 = 1,156 masks; the same geometry traversed over the full
// period yields 35^2 = 1,225. Both are valid configurations.
struct ChessPatternConfig {
  int square_size = 5;       // d
  int squares_per_side = 6;  // nominal block, validated against image dims
  int spacing = 30;          // gap between squares, in px
  int stride = 1;            // offset step, in px
  int rows = 224;
  int cols = 224;
  std::optional<int> traversal;  // offsets per axis; default: period

  int period() const { return square_size + spacing; }
  int traversal_extent() const { return traversal.value_or(period()); }

  static ChessPatternConfig default_224() {
    ChessPatternConfig cfg;
    cfg.traversal = 34;
    return cfg;
  }
};

// The ordered mask family plus per-pixel counts of how many masks zero
// (and therefore inpaint) each pixel.
struct MaskSchedule {
  std::vector<BinaryMask> masks;
  std::vector<int> coverage;  // rows*cols counts, >= 1 everywhere
  int rows = 0;
  int cols = 0;

  int coverage_at(int y, int x) const { return coverage[static_cast<size_t>(y) * cols + x]; }
  size_t size() const { return masks.size(); }
};

inline MaskSchedule build_schedule(const ChessPatternConfig& cfg) {
  if (cfg.square_size < 1 || cfg.spacing < 0 || cfg.stride < 1) {
    throw ConfigError("chess pattern: square_size >= 1, spacing >= 0, stride >= 1 required");
  }
  if (cfg.rows <= 0 || cfg.cols <= 0) {
    throw ConfigError("chess pattern: image dimensions must be positive");
  }
  const int min_dim = std::min(cfg.rows, cfg.cols);
  // d=1 is the degenerate full-mask case; larger squares must stay small
  // relative to the image so enough context survives for inpainting.
  if (cfg.square_size > 1 && cfg.square_size > min_dim / 4) {
    throw ConfigError("chess pattern: square_size must be <= min(h, w) / 4");
  }
  if (cfg.squares_per_side < 1) {
    throw ConfigError("chess pattern: squares_per_side must be >= 1");
  }
  const int block_extent =
      cfg.squares_per_side * cfg.square_size + (cfg.squares_per_side - 1) * cfg.spacing;
  if (block_extent > min_dim) {
    throw ConfigError("chess pattern: nominal block (" + std::to_string(block_extent) +
                      " px) does not fit inside the image");
  }
  const int traversal = cfg.traversal_extent();
  if (traversal < 1 || traversal > cfg.period()) {
    throw ConfigError("chess pattern: traversal must lie in [1, period]");
  }

  const int p = cfg.period();
  const int d = cfg.square_size;

  std::vector<int> offsets;
  for (int o = 0; o < traversal; o += cfg.stride) offsets.push_back(o);

  MaskSchedule schedule;
  schedule.rows = cfg.rows;
  schedule.cols = cfg.cols;
  schedule.coverage.assign(static_cast<size_t>(cfg.rows) * cfg.cols, 0);
  schedule.masks.reserve(offsets.size() * offsets.size());

  // Residue of v - o modulo the period, kept nonnegative.
  auto in_square = [p, d](int v, int o) { return ((v - o) % p + p) % p < d; };

  for (int off_r : offsets) {
    // Row membership depends on y only; hoist it out of the column loop.
    std::vector<uint8_t> row_hit(cfg.rows);
    for (int y = 0; y < cfg.rows; ++y) row_hit[y] = in_square(y, off_r) ? 1 : 0;
    for (int off_c : offsets) {
      BinaryMask mask(cfg.rows, cfg.cols, 1);
      for (int y = 0; y < cfg.rows; ++y) {
        if (!row_hit[y]) continue;
        for (int x = 0; x < cfg.cols; ++x) {
          if (in_square(x, off_c)) {
            mask.set(y, x, 0);
            ++schedule.coverage[static_cast<size_t>(y) * cfg.cols + x];
          }
        }
      }
      schedule.masks.push_back(std::move(mask));
    }
  }

  for (int count : schedule.coverage) {
    if (count == 0) {
      throw ConfigError(
          "chess pattern: configuration leaves pixels that are never masked; "
          "increase traversal or decrease stride");
    }
  }
  return schedule;
}

// Rebuilds the full image from the inpainted regions only: pixel (y, x) is
// the mean of partials[i](y, x) over exactly the masks i that zeroed it.
// Coverage counts (not pixel values) decide membership, so legitimately
// black pixels are handled correctly.
inline Image aggregate_inpainted(const std::vector<Image>& partials,
                                 const MaskSchedule& schedule) {
  if (partials.size() != schedule.masks.size()) {
    throw ContractViolationError("aggregate_inpainted: expected " +
                                 std::to_string(schedule.masks.size()) + " partials, got " +
                                 std::to_string(partials.size()));
  }
  for (const Image& partial : partials) {
    if (partial.height() != schedule.rows || partial.width() != schedule.cols) {
      throw ContractViolationError("aggregate_inpainted: partial dimension mismatch");
    }
  }
  for (int count : schedule.coverage) {
    if (count == 0) {
      throw ContractViolationError("aggregate_inpainted: pixel with zero coverage");
    }
  }

  std::vector<double> acc(static_cast<size_t>(kChannels) * schedule.rows * schedule.cols, 0.0);
  for (size_t i = 0; i < partials.size(); ++i) {
    const BinaryMask& mask = schedule.masks[i];
    const Image& partial = partials[i];
    for (int c = 0; c < kChannels; ++c) {
      for (int y = 0; y < schedule.rows; ++y) {
        for (int x = 0; x < schedule.cols; ++x) {
          if (!mask.at(y, x)) {
            acc[(static_cast<size_t>(c) * schedule.rows + y) * schedule.cols + x] +=
                partial.at(c, y, x);
          }
        }
      }
    }
  }

  Image out(schedule.rows, schedule.cols, 0.0f, Provenance::kRecovered,
            partials.front().source_id());
  for (int c = 0; c < kChannels; ++c) {
    for (int y = 0; y < schedule.rows; ++y) {
      for (int x = 0; x < schedule.cols; ++x) {
        const size_t idx = (static_cast<size_t>(c) * schedule.rows + y) * schedule.cols + x;
        out.at(c, y, x) = static_cast<float>(
            acc[idx] / schedule.coverage[static_cast<size_t>(y) * schedule.cols + x]);
      }
    }
  }
  return out.clamp01();
}

}  // namespace softprobe
