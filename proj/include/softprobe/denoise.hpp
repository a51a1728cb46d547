#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "softprobe/backends.hpp"
#include "softprobe/image.hpp"

namespace softprobe {

namespace detail {

inline int clamp_index(int v, int hi) { return std::min(std::max(v, 0), hi - 1); }

}  // namespace detail

// Per-channel median over a (2r+1)^2 window, window clipped at borders.
// radius 0 is the identity.
class MedianDenoiser final : public DenoiseBackend {
 public:
  explicit MedianDenoiser(int radius = 1, std::string id = "ref-median")
      : radius_(radius), id_(std::move(id)) {
    if (radius < 0) throw ConfigError("median radius must be >= 0");
  }

  const std::string& id() const override { return id_; }

  Image denoise(const Image& image) const override {
    if (radius_ == 0) return image;
    Image out = image;
    std::vector<float> window;
    window.reserve((2 * radius_ + 1) * (2 * radius_ + 1));
    for (int c = 0; c < kChannels; ++c) {
      for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
          window.clear();
          for (int dy = -radius_; dy <= radius_; ++dy) {
            const int yy = y + dy;
            if (yy < 0 || yy >= image.height()) continue;
            for (int dx = -radius_; dx <= radius_; ++dx) {
              const int xx = x + dx;
              if (xx < 0 || xx >= image.width()) continue;
              window.push_back(image.at(c, yy, xx));
            }
          }
          auto mid = window.begin() + window.size() / 2;
          std::nth_element(window.begin(), mid, window.end());
          float med = *mid;
          if (window.size() % 2 == 0) {
            float lo = *std::max_element(window.begin(), mid);
            med = 0.5f * (med + lo);
          }
          out.at(c, y, x) = med;
        }
      }
    }
    return out.clamp01();
  }

 private:
  int radius_;
  std::string id_;
};

// Separable Gaussian blur with replicated borders; sigma 0 is the identity.
class GaussianDenoiser final : public DenoiseBackend {
 public:
  explicit GaussianDenoiser(double sigma = 1.0, std::string id = "ref-gaussian")
      : sigma_(sigma), id_(std::move(id)) {
    if (sigma < 0.0) throw ConfigError("gaussian sigma must be >= 0");
  }

  const std::string& id() const override { return id_; }

  Image denoise(const Image& image) const override {
    if (sigma_ == 0.0) return image;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_)));
    std::vector<float> kernel(2 * radius + 1);
    float sum = 0.0f;
    for (int i = -radius; i <= radius; ++i) {
      kernel[i + radius] = std::exp(-0.5f * (i * i) / static_cast<float>(sigma_ * sigma_));
      sum += kernel[i + radius];
    }
    for (float& k : kernel) k /= sum;

    const int h = image.height(), w = image.width();
    Image tmp = image;
    Image out = image;
    for (int c = 0; c < kChannels; ++c) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          float acc = 0.0f;
          for (int i = -radius; i <= radius; ++i) {
            acc += kernel[i + radius] * image.at(c, y, detail::clamp_index(x + i, w));
          }
          tmp.at(c, y, x) = acc;
        }
      }
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          float acc = 0.0f;
          for (int i = -radius; i <= radius; ++i) {
            acc += kernel[i + radius] * tmp.at(c, detail::clamp_index(y + i, h), x);
          }
          out.at(c, y, x) = acc;
        }
      }
    }
    return out.clamp01();
  }

 private:
  double sigma_;
  std::string id_;
};

// Non-local means: each pixel is a similarity-weighted average of pixels in
// a search window, with patch-distance weights exp(-d^2 / h^2).
class NlmDenoiser final : public DenoiseBackend {
 public:
  NlmDenoiser(int patch_radius = 1, int search_radius = 4, double strength = 0.35,
              std::string id = "ref-nlm")
      : patch_radius_(patch_radius),
        search_radius_(search_radius),
        strength_(strength),
        id_(std::move(id)) {
    if (patch_radius < 0 || search_radius < 1 || strength <= 0.0) {
      throw ConfigError("invalid non-local-means parameters");
    }
  }

  const std::string& id() const override { return id_; }

  Image denoise(const Image& image) const override {
    const int h = image.height(), w = image.width();
    Image out = image;
    const double inv_h2 = 1.0 / (strength_ * strength_);
    const int patch_size = (2 * patch_radius_ + 1) * (2 * patch_radius_ + 1) * kChannels;

    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double wsum = 0.0;
        double acc[kChannels] = {0.0, 0.0, 0.0};
        for (int sy = std::max(0, y - search_radius_);
             sy <= std::min(h - 1, y + search_radius_); ++sy) {
          for (int sx = std::max(0, x - search_radius_);
               sx <= std::min(w - 1, x + search_radius_); ++sx) {
            double dist2 = 0.0;
            for (int c = 0; c < kChannels; ++c) {
              for (int py = -patch_radius_; py <= patch_radius_; ++py) {
                for (int px = -patch_radius_; px <= patch_radius_; ++px) {
                  const float a = image.at(c, detail::clamp_index(y + py, h),
                                           detail::clamp_index(x + px, w));
                  const float b = image.at(c, detail::clamp_index(sy + py, h),
                                           detail::clamp_index(sx + px, w));
                  dist2 += static_cast<double>(a - b) * (a - b);
                }
              }
            }
            const double weight = std::exp(-(dist2 / patch_size) * inv_h2);
            wsum += weight;
            for (int c = 0; c < kChannels; ++c) acc[c] += weight * image.at(c, sy, sx);
          }
        }
        for (int c = 0; c < kChannels; ++c) {
          out.at(c, y, x) = static_cast<float>(acc[c] / wsum);
        }
      }
    }
    return out.clamp01();
  }

 private:
  int patch_radius_;
  int search_radius_;
  double strength_;
  std::string id_;
};

}  // namespace softprobe
