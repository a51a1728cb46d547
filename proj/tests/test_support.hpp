#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles here
// deliberately avoid the library's own computation paths.

#include <random>
#include <vector>

#include "softprobe/backends.hpp"
#include "softprobe/image.hpp"
#include "softprobe/mask_schedule.hpp"

namespace softprobe::testing {

inline Image random_image(int h, int w, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> uni(0.0f, 1.0f);
  Image img(h, w, 0.0f, Provenance::kOriginal, "rand" + std::to_string(seed));
  for (float& v : img.data()) v = uni(rng);
  return img;
}

inline Image constant_image(int h, int w, float value) {
  return Image(h, w, value, Provenance::kOriginal, "const");
}

// Inpainting oracle: always returns a fixed reference image on the zeroed
// pixels (and the masked input's surviving pixels elsewhere, which equal the
// reference by construction in the identity experiments).
class OracleInpainter final : public InpaintBackend {
 public:
  explicit OracleInpainter(Image reference) : reference_(std::move(reference)) {}
  const std::string& id() const override { return id_; }
  Image inpaint(const Image& masked, const BinaryMask& mask) const override {
    Image out = masked;
    for (int c = 0; c < kChannels; ++c) {
      for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
          if (!mask.at(y, x)) out.at(c, y, x) = reference_.at(c, y, x);
        }
      }
    }
    return out;
  }

 private:
  Image reference_;
  std::string id_ = "oracle-inpainter";
};

// Parser oracle labelling every pixel as face.
class AllFaceParser final : public FaceParseBackend {
 public:
  const std::string& id() const override { return id_; }
  ParseLabelMap parse(const Image& image) const override {
    ParseLabelMap map;
    map.height = image.height();
    map.width = image.width();
    map.labels.assign(static_cast<size_t>(map.height) * map.width, 1);
    return map;
  }

 private:
  std::string id_ = "oracle-all-face";
};

// Parser oracle labelling the left half background, right half face.
class LeftBackgroundParser final : public FaceParseBackend {
 public:
  const std::string& id() const override { return id_; }
  ParseLabelMap parse(const Image& image) const override {
    ParseLabelMap map;
    map.height = image.height();
    map.width = image.width();
    map.labels.assign(static_cast<size_t>(map.height) * map.width, 0);
    for (int y = 0; y < map.height; ++y) {
      for (int x = map.width / 2; x < map.width; ++x) {
        map.labels[static_cast<size_t>(y) * map.width + x] = 1;
      }
    }
    return map;
  }

 private:
  std::string id_ = "oracle-left-bg";
};

// Parser oracle that never finds a face.
class NoFaceParser final : public FaceParseBackend {
 public:
  const std::string& id() const override { return id_; }
  ParseLabelMap parse(const Image& image) const override {
    ParseLabelMap map;
    map.height = image.height();
    map.width = image.width();
    map.labels.assign(static_cast<size_t>(map.height) * map.width, 0);
    return map;
  }

 private:
  std::string id_ = "oracle-no-face";
};

// Brute-force per-pixel aggregation oracle for mask schedules.
inline Image aggregate_oracle(const std::vector<Image>& partials, const MaskSchedule& schedule) {
  Image out(schedule.rows, schedule.cols, 0.0f);
  for (int c = 0; c < kChannels; ++c) {
    for (int y = 0; y < schedule.rows; ++y) {
      for (int x = 0; x < schedule.cols; ++x) {
        double acc = 0.0;
        int count = 0;
        for (size_t i = 0; i < schedule.masks.size(); ++i) {
          if (!schedule.masks[i].at(y, x)) {
            acc += partials[i].at(c, y, x);
            ++count;
          }
        }
        out.at(c, y, x) = count ? static_cast<float>(acc / count) : 0.0f;
      }
    }
  }
  return out;
}

}  // namespace softprobe::testing
