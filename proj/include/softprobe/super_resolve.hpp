#pragma once

#include <cmath>
#include <string>

#include "softprobe/backends.hpp"
#include "softprobe/image.hpp"

namespace softprobe {

// Bilinear resampling with half-pixel-centre alignment.
inline Image bilinear_resize(const Image& image, int target_h, int target_w) {
  if (target_h <= 0 || target_w <= 0) {
    throw ContractViolationError("bilinear_resize: target dims must be positive");
  }
  Image out(target_h, target_w, 0.0f, image.provenance(), image.source_id());
  const double sy = static_cast<double>(image.height()) / target_h;
  const double sx = static_cast<double>(image.width()) / target_w;
  for (int c = 0; c < kChannels; ++c) {
    for (int y = 0; y < target_h; ++y) {
      const double fy = std::min(std::max((y + 0.5) * sy - 0.5, 0.0),
                                 static_cast<double>(image.height() - 1));
      const int y0 = static_cast<int>(fy);
      const int y1 = std::min(y0 + 1, image.height() - 1);
      const double wy = fy - y0;
      for (int x = 0; x < target_w; ++x) {
        const double fx = std::min(std::max((x + 0.5) * sx - 0.5, 0.0),
                                   static_cast<double>(image.width() - 1));
        const int x0 = static_cast<int>(fx);
        const int x1 = std::min(x0 + 1, image.width() - 1);
        const double wx = fx - x0;
        const double top = (1.0 - wx) * image.at(c, y0, x0) + wx * image.at(c, y0, x1);
        const double bot = (1.0 - wx) * image.at(c, y1, x0) + wx * image.at(c, y1, x1);
        out.at(c, y, x) = static_cast<float>((1.0 - wy) * top + wy * bot);
      }
    }
  }
  return out.clamp01();
}

// Catmull-Rom bicubic upscaler.
class BicubicSuperResolver final : public SuperResolveBackend {
 public:
  explicit BicubicSuperResolver(std::string id = "ref-bicubic") : id_(std::move(id)) {}

  const std::string& id() const override { return id_; }

  Image upscale(const Image& low, int target_h, int target_w) const override {
    if (target_h <= 0 || target_w <= 0) {
      throw ContractViolationError("upscale: target dims must be positive");
    }
    Image out(target_h, target_w, 0.0f, low.provenance(), low.source_id());
    const double sy = static_cast<double>(low.height()) / target_h;
    const double sx = static_cast<double>(low.width()) / target_w;
    auto clampi = [](int v, int hi) { return std::min(std::max(v, 0), hi - 1); };
    for (int c = 0; c < kChannels; ++c) {
      for (int y = 0; y < target_h; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        const int y1 = static_cast<int>(std::floor(fy));
        const double ty = fy - y1;
        for (int x = 0; x < target_w; ++x) {
          const double fx = (x + 0.5) * sx - 0.5;
          const int x1 = static_cast<int>(std::floor(fx));
          const double tx = fx - x1;
          double rows[4];
          for (int i = 0; i < 4; ++i) {
            const int yy = clampi(y1 - 1 + i, low.height());
            double p[4];
            for (int j = 0; j < 4; ++j) {
              p[j] = low.at(c, yy, clampi(x1 - 1 + j, low.width()));
            }
            rows[i] = catmull_rom(p[0], p[1], p[2], p[3], tx);
          }
          out.at(c, y, x) =
              static_cast<float>(catmull_rom(rows[0], rows[1], rows[2], rows[3], ty));
        }
      }
    }
    return out.clamp01();
  }

 private:
  static double catmull_rom(double p0, double p1, double p2, double p3, double t) {
    return p1 + 0.5 * t * (p2 - p0 +
                           t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                t * (3.0 * (p1 - p2) + p3 - p0)));
  }

  std::string id_;
};

}  // namespace softprobe
