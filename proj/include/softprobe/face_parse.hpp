#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "softprobe/backends.hpp"
#include "softprobe/denoise.hpp"
#include "softprobe/image.hpp"

namespace softprobe {

// Reference parser for synthetic data: fits a per-channel linear plane
// a + b*x + c*y to the image border ring (assumed background), then labels a
// pixel as face where its colour deviates from the plane by more than the
// threshold. Parsing runs on a median-smoothed copy so pixel noise does not
// flip labels. Real face parsers (segmentation networks) plug in behind the
// same interface.
class PlaneFitFaceParser final : public FaceParseBackend {
 public:
  explicit PlaneFitFaceParser(double threshold = 0.25, int smooth_radius = 1,
                              std::string id = "ref-parser")
      : threshold_(threshold), smooth_radius_(smooth_radius), id_(std::move(id)) {
    if (threshold <= 0.0) throw ConfigError("parser threshold must be positive");
  }

  const std::string& id() const override { return id_; }

  ParseLabelMap parse(const Image& image) const override {
    const Image smoothed =
        smooth_radius_ > 0 ? MedianDenoiser(smooth_radius_, id_ + "-smooth").denoise(image)
                           : image;
    const int h = image.height(), w = image.width();

    std::array<std::array<double, 3>, kChannels> plane{};
    for (int c = 0; c < kChannels; ++c) plane[c] = fit_border_plane(smoothed, c);

    ParseLabelMap map;
    map.height = h;
    map.width = w;
    map.labels.assign(static_cast<size_t>(h) * w, 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double deviation = 0.0;
        for (int c = 0; c < kChannels; ++c) {
          const double predicted = plane[c][0] + plane[c][1] * x + plane[c][2] * y;
          deviation += std::abs(smoothed.at(c, y, x) - predicted);
        }
        if (deviation > threshold_) {
          map.labels[static_cast<size_t>(y) * w + x] = 1;
        }
      }
    }
    return map;
  }

 private:
  // Least-squares fit of v ~ a + b*x + c*y over the 1-px border ring,
  // via the 3x3 normal equations.
  static std::array<double, 3> fit_border_plane(const Image& image, int channel) {
    const int h = image.height(), w = image.width();
    double sxx[3][3] = {{0}};
    double sxy[3] = {0, 0, 0};
    auto accumulate = [&](int y, int x) {
      const double basis[3] = {1.0, static_cast<double>(x), static_cast<double>(y)};
      const double v = image.at(channel, y, x);
      for (int i = 0; i < 3; ++i) {
        sxy[i] += basis[i] * v;
        for (int j = 0; j < 3; ++j) sxx[i][j] += basis[i] * basis[j];
      }
    };
    for (int x = 0; x < w; ++x) {
      accumulate(0, x);
      if (h > 1) accumulate(h - 1, x);
    }
    for (int y = 1; y + 1 < h; ++y) {
      accumulate(y, 0);
      if (w > 1) accumulate(y, w - 1);
    }

    // Solve sxx * coef = sxy by Gaussian elimination with partial pivoting.
    double a[3][4];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) a[i][j] = sxx[i][j];
      a[i][3] = sxy[i];
    }
    for (int col = 0; col < 3; ++col) {
      int pivot = col;
      for (int r = col + 1; r < 3; ++r) {
        if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
      }
      std::swap(a[col], a[pivot]);
      if (std::abs(a[col][col]) < 1e-12) continue;  // degenerate; keep zeros
      for (int r = 0; r < 3; ++r) {
        if (r == col) continue;
        const double f = a[r][col] / a[col][col];
        for (int j = col; j < 4; ++j) a[r][j] -= f * a[col][j];
      }
    }
    std::array<double, 3> coef{};
    for (int i = 0; i < 3; ++i) {
      coef[i] = std::abs(a[i][i]) < 1e-12 ? 0.0 : a[i][3] / a[i][i];
    }
    return coef;
  }

  double threshold_;
  int smooth_radius_;
  std::string id_;
};

}  // namespace softprobe
