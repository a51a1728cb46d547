#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "softprobe/error.hpp"

namespace softprobe {

inline constexpr int kChannels = 3;

enum class Provenance { kOriginal, kEnhanced, kRecovered };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::kOriginal:
      return "original";
    case Provenance::kEnhanced:
      return "enhanced";
    case Provenance::kRecovered:
      return "recovered";
  }
  return "?";
}

// Planar RGB raster with values in [0, 1]. Grayscale sources are replicated
// to three channels on ingestion; every operation clamps its output back
// into [0, 1]. Immutable by convention once constructed.
class Image {
 public:
  Image() = default;

  Image(int height, int width, float fill = 0.0f,
        Provenance provenance = Provenance::kOriginal, std::string source_id = {})
      : height_(height),
        width_(width),
        data_(static_cast<size_t>(kChannels) * check_dims(height, width), fill),
        provenance_(provenance),
        source_id_(std::move(source_id)) {}

  Image(int height, int width, std::vector<float> data,
        Provenance provenance = Provenance::kOriginal, std::string source_id = {})
      : height_(height),
        width_(width),
        data_(std::move(data)),
        provenance_(provenance),
        source_id_(std::move(source_id)) {
    check_dims(height, width);
    if (data_.size() != static_cast<size_t>(kChannels) * height_ * width_) {
      throw ContractViolationError("image buffer size does not match dimensions");
    }
  }

  int height() const { return height_; }
  int width() const { return width_; }
  size_t size() const { return data_.size(); }

  Provenance provenance() const { return provenance_; }
  const std::string& source_id() const { return source_id_; }

  float at(int c, int y, int x) const {
    return data_[(static_cast<size_t>(c) * height_ + y) * width_ + x];
  }
  float& at(int c, int y, int x) {
    return data_[(static_cast<size_t>(c) * height_ + y) * width_ + x];
  }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

  bool same_dims(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  Image with_provenance(Provenance p) const {
    Image out = *this;
    out.provenance_ = p;
    return out;
  }

  Image with_source_id(std::string id) const {
    Image out = *this;
    out.source_id_ = std::move(id);
    return out;
  }

  // Clamps every pixel into [0, 1]; applied at operation boundaries.
  Image& clamp01() {
    for (float& v : data_) v = std::min(1.0f, std::max(0.0f, v));
    return *this;
  }

 private:
  static int check_dims(int height, int width) {
    if (height <= 0 || width <= 0) {
      throw ContractViolationError("image dimensions must be positive");
    }
    return static_cast<size_t>(height) * width;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
  Provenance provenance_ = Provenance::kOriginal;
  std::string source_id_;
};

// h-by-w grid over {0, 1}; 1 keeps a pixel, 0 marks it for removal/inpainting.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width, uint8_t fill = 1)
      : height_(height), width_(width) {
    if (height <= 0 || width <= 0) {
      throw ContractViolationError("mask dimensions must be positive");
    }
    data_.assign(static_cast<size_t>(height) * width, fill ? 1 : 0);
  }

  int height() const { return height_; }
  int width() const { return width_; }

  uint8_t at(int y, int x) const { return data_[static_cast<size_t>(y) * width_ + x]; }
  void set(int y, int x, uint8_t v) { data_[static_cast<size_t>(y) * width_ + x] = v ? 1 : 0; }

  const std::vector<uint8_t>& data() const { return data_; }

  size_t count_zeros() const {
    return static_cast<size_t>(std::count(data_.begin(), data_.end(), uint8_t{0}));
  }

  // Involution: invert(invert(m)) == m.
  BinaryMask inverted() const {
    BinaryMask out = *this;
    for (uint8_t& v : out.data_) v = v ? 0 : 1;
    return out;
  }

  bool operator==(const BinaryMask& other) const {
    return height_ == other.height_ && width_ == other.width_ && data_ == other.data_;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<uint8_t> data_;
};

// Probability vector over the attribute classes; entries sum to 1 within 1e-6.
class Posterior {
 public:
  Posterior() = default;
  explicit Posterior(std::vector<double> probs) : p_(std::move(probs)) {
    validate();
  }

  static Posterior uniform(int n) {
    return Posterior(std::vector<double>(n, 1.0 / n));
  }

  int size() const { return static_cast<int>(p_.size()); }
  double operator[](int k) const { return p_[k]; }
  const std::vector<double>& probs() const { return p_; }

  int argmax() const {
    return static_cast<int>(std::max_element(p_.begin(), p_.end()) - p_.begin());
  }

  double entropy() const {
    double h = 0.0;
    for (double v : p_) {
      if (v > 0.0) h -= v * std::log(v);
    }
    return h;
  }

 private:
  void validate() const {
    if (p_.empty()) throw ContractViolationError("posterior must be non-empty");
    double sum = 0.0;
    for (double v : p_) {
      if (v < -1e-9 || v > 1.0 + 1e-9) {
        throw ContractViolationError("posterior entry outside [0, 1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw ContractViolationError("posterior entries must sum to 1 (got " +
                                   std::to_string(sum) + ")");
    }
  }

  std::vector<double> p_;
};

// Hadamard product of the image with the mask, applied to all channels.
// Provenance and source id are preserved.
inline Image apply_mask(const Image& image, const BinaryMask& mask) {
  if (image.height() != mask.height() || image.width() != mask.width()) {
    throw ContractViolationError("apply_mask: image/mask dimension mismatch");
  }
  Image out = image;
  for (int c = 0; c < kChannels; ++c) {
    for (int y = 0; y < image.height(); ++y) {
      for (int x = 0; x < image.width(); ++x) {
        if (!mask.at(y, x)) out.at(c, y, x) = 0.0f;
      }
    }
  }
  return out;
}

// L_p norm of the pixel-wise difference, p > 0.
inline double lp_distance(const Image& a, const Image& b, double p) {
  if (!a.same_dims(b)) {
    throw ContractViolationError("lp_distance: dimension mismatch");
  }
  if (!(p > 0.0)) throw ContractViolationError("lp_distance: p must be positive");
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    acc += std::pow(std::abs(static_cast<double>(a.data()[i]) - b.data()[i]), p);
  }
  return std::pow(acc, 1.0 / p);
}

inline double max_abs_difference(const Image& a, const Image& b) {
  if (!a.same_dims(b)) {
    throw ContractViolationError("max_abs_difference: dimension mismatch");
  }
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(a.data()[i]) - b.data()[i]));
  }
  return m;
}

inline double mean_abs_difference(const Image& a, const Image& b) {
  if (!a.same_dims(b)) {
    throw ContractViolationError("mean_abs_difference: dimension mismatch");
  }
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    acc += std::abs(static_cast<double>(a.data()[i]) - b.data()[i]);
  }
  return acc / static_cast<double>(a.size());
}

}  // namespace softprobe
