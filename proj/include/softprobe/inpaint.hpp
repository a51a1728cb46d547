#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "softprobe/backends.hpp"
#include "softprobe/image.hpp"

namespace softprobe {

// Diffusion (harmonic) inpainting: zeroed pixels are filled by solving the
// discrete Laplace equation with the surviving pixels as Dirichlet boundary
// (Gauss-Seidel, 4-neighbour stencil; image borders use the available
// neighbours only). Constant surroundings fill constantly and linear ramps
// are reproduced up to discretization, which makes the backend a usable
// reference oracle as well as a real recovery backend.
class HarmonicInpainter final : public InpaintBackend {
 public:
  explicit HarmonicInpainter(double tolerance = 1e-7, int max_iterations = 4000,
                             std::string id = "ref-harmonic")
      : tolerance_(tolerance), max_iterations_(max_iterations), id_(std::move(id)) {}

  const std::string& id() const override { return id_; }

  Image inpaint(const Image& masked, const BinaryMask& mask) const override {
    if (masked.height() != mask.height() || masked.width() != mask.width()) {
      throw ContractViolationError("inpaint: image/mask dimension mismatch");
    }
    const int h = masked.height(), w = masked.width();

    std::vector<std::pair<int, int>> unknown;
    unknown.reserve(mask.count_zeros());
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!mask.at(y, x)) unknown.emplace_back(y, x);
      }
    }
    if (unknown.empty()) return masked;
    if (unknown.size() == static_cast<size_t>(h) * w) {
      // Nothing survives to diffuse from; fill mid-gray.
      Image out = masked;
      for (float& v : out.data()) v = 0.5f;
      return out;
    }

    Image out = masked;
    // Seed unknowns with the mean of the known pixels so Gauss-Seidel starts
    // near the right scale.
    for (int c = 0; c < kChannels; ++c) {
      double known_sum = 0.0;
      size_t known_count = 0;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (mask.at(y, x)) {
            known_sum += masked.at(c, y, x);
            ++known_count;
          }
        }
      }
      const float seed = static_cast<float>(known_sum / known_count);
      for (auto [y, x] : unknown) out.at(c, y, x) = seed;
    }

    for (int c = 0; c < kChannels; ++c) {
      for (int iter = 0; iter < max_iterations_; ++iter) {
        float max_delta = 0.0f;
        for (auto [y, x] : unknown) {
          float acc = 0.0f;
          int n = 0;
          if (y > 0) acc += out.at(c, y - 1, x), ++n;
          if (y + 1 < h) acc += out.at(c, y + 1, x), ++n;
          if (x > 0) acc += out.at(c, y, x - 1), ++n;
          if (x + 1 < w) acc += out.at(c, y, x + 1), ++n;
          const float next = acc / n;
          max_delta = std::max(max_delta, std::abs(next - out.at(c, y, x)));
          out.at(c, y, x) = next;
        }
        if (max_delta < tolerance_) break;
      }
    }
    return out.clamp01();
  }

 private:
  double tolerance_;
  int max_iterations_;
  std::string id_;
};

}  // namespace softprobe
