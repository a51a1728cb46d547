#pragma once

#include <memory>
#include <string>
#include <vector>

#include "softprobe/error.hpp"
#include "softprobe/image.hpp"

namespace softprobe {

enum class BackendRole { kDenoiser, kInpainter, kAutoencoder, kFaceParser, kSuperResolver };

inline const char* to_string(BackendRole role) {
  switch (role) {
    case BackendRole::kDenoiser:
      return "denoiser";
    case BackendRole::kInpainter:
      return "inpainter";
    case BackendRole::kAutoencoder:
      return "autoencoder";
    case BackendRole::kFaceParser:
      return "face_parser";
    case BackendRole::kSuperResolver:
      return "super_resolver";
  }
  return "?";
}

// Common backend metadata. A backend declares whether repeated calls with
// identical inputs are bit-identical and whether concurrent calls are safe;
// the pipeline runner serializes calls to non-concurrent backends.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual const std::string& id() const = 0;
  virtual BackendRole role() const = 0;
  virtual bool deterministic() const { return true; }
  virtual bool concurrent_safe() const { return true; }
};

class DenoiseBackend : public Backend {
 public:
  BackendRole role() const final { return BackendRole::kDenoiser; }
  virtual Image denoise(const Image& image) const = 0;
};

// Contract: the returned image equals the input on mask=1 pixels (within
// 1e-6) and fills the mask=0 pixels. Violations are hard errors upstream.
class InpaintBackend : public Backend {
 public:
  BackendRole role() const final { return BackendRole::kInpainter; }
  virtual Image inpaint(const Image& masked, const BinaryMask& mask) const = 0;
};

class AutoencodeBackend : public Backend {
 public:
  BackendRole role() const final { return BackendRole::kAutoencoder; }
  virtual bool ready() const = 0;
  virtual Image reconstruct(const Image& image) const = 0;
};

// Per-pixel label map; 0 is background, positive values are facial parts.
struct ParseLabelMap {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> labels;

  uint8_t at(int y, int x) const { return labels[static_cast<size_t>(y) * width + x]; }
};

inline BinaryMask face_mask(const ParseLabelMap& map) {
  BinaryMask mask(map.height, map.width, 0);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      if (map.at(y, x) > 0) mask.set(y, x, 1);
    }
  }
  return mask;
}

class FaceParseBackend : public Backend {
 public:
  BackendRole role() const final { return BackendRole::kFaceParser; }
  virtual ParseLabelMap parse(const Image& image) const = 0;
};

class SuperResolveBackend : public Backend {
 public:
  BackendRole role() const final { return BackendRole::kSuperResolver; }
  virtual Image upscale(const Image& low, int target_height, int target_width) const = 0;
};

}  // namespace softprobe
