#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "softprobe/image.hpp"
#include "softprobe/manifest.hpp"
#include "softprobe/png_io.hpp"

namespace softprobe {

// Deterministic synthetic face-proxy dataset. Each subject is a parametric
// scene: a background colour gradient, a disc ("face") with a subject
// texture, and an attribute-encoding tint of the disc (warm vs cool channel
// balance). Identity lives in the gradient, disc geometry and texture;
// images of a subject vary by small jitter and illumination. No face data
// or licensing involved; experiments stay reproducible from the seed alone.
//
// The attribute is carried by two cues on purpose: the low-frequency disc
// tint (robust, survives smoothing) and a faint signed pixel checker
// (brittle, removed by any denoiser or inpainting). Classifiers trained on
// the raw pixels pick up both, which gives gradient attacks the same
// high-frequency escape hatch they exploit against large networks, and
// gives recovery transforms something real to strip.
struct ToyDataConfig {
  int image_size = 32;
  int subjects_per_class = 28;
  int images_per_subject = 8;
  uint64_t seed = 1234;
  double tint_strength = 0.8;     // robust attribute cue: disc colour separation
  double checker_strength = 0.03; // brittle attribute cue: signed 1-px checker
};

struct ToyRecord {
  std::string subject_id;
  int label = 0;
};

struct ToyDataset {
  std::vector<Image> images;
  std::vector<ToyRecord> records;
  std::vector<std::string> class_names = {"warm", "cool"};
};

namespace detail {

inline uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b) {
  uint64_t h = seed ^ 0x9e3779b97f4a7c15ull;
  h ^= a + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  h ^= b + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

}  // namespace detail

inline ToyDataset generate_toy_dataset(const ToyDataConfig& cfg) {
  if (cfg.image_size < 16) throw ConfigError("toy dataset: image_size must be >= 16");
  if (cfg.subjects_per_class < 1 || cfg.images_per_subject < 1) {
    throw ConfigError("toy dataset: counts must be positive");
  }

  ToyDataset dataset;
  const int s = cfg.image_size;
  const double centre = s / 2.0;

  for (int label = 0; label < 2; ++label) {
    for (int subj = 0; subj < cfg.subjects_per_class; ++subj) {
      std::mt19937_64 rng(detail::mix_seed(cfg.seed, label, subj));
      std::uniform_real_distribution<double> uni(0.0, 1.0);

      // Subject parameters.
      double bg0[kChannels], bg1[kChannels];
      for (int c = 0; c < kChannels; ++c) {
        bg0[c] = 0.15 + 0.5 * uni(rng);
        bg1[c] = 0.15 + 0.5 * uni(rng);
      }
      const double grad_angle = 2.0 * M_PI * uni(rng);
      const double gx = std::cos(grad_angle), gy = std::sin(grad_angle);
      const double disc_cx = centre + (uni(rng) - 0.5) * 0.25 * s;
      const double disc_cy = centre + (uni(rng) - 0.5) * 0.25 * s;
      const double radius = (0.22 + 0.08 * uni(rng)) * s;
      const double tex_freq = 0.5 + 0.9 * uni(rng);
      const double tex_angle = 2.0 * M_PI * uni(rng);
      const double tex_phase = 2.0 * M_PI * uni(rng);
      const double tx = std::cos(tex_angle), ty = std::sin(tex_angle);

      // Attribute tint: warm discs push red, cool discs push green.
      const double half = 0.5 * cfg.tint_strength;
      double disc_base[kChannels];
      disc_base[0] = 0.5 + (label == 0 ? half : -half);
      disc_base[1] = 0.5 + (label == 0 ? -half : half);
      disc_base[2] = 0.45 + 0.1 * uni(rng);

      const std::string subject_id =
          dataset.class_names[label] + "_s" + std::to_string(subj);

      for (int img_idx = 0; img_idx < cfg.images_per_subject; ++img_idx) {
        std::mt19937_64 img_rng(detail::mix_seed(rng(), label * 1000 + subj, img_idx));
        std::uniform_real_distribution<double> juni(0.0, 1.0);
        const double jx = (juni(img_rng) - 0.5) * 3.0;
        const double jy = (juni(img_rng) - 0.5) * 3.0;
        const double illumination = 0.92 + 0.16 * juni(img_rng);

        Image image(s, s, 0.0f, Provenance::kOriginal,
                    subject_id + "_i" + std::to_string(img_idx));
        for (int y = 0; y < s; ++y) {
          for (int x = 0; x < s; ++x) {
            const double t = 0.5 + 0.5 * ((x - centre) * gx + (y - centre) * gy) / centre;
            const double tc = std::min(1.0, std::max(0.0, t));
            const double dx = x - (disc_cx + jx);
            const double dy = y - (disc_cy + jy);
            const double dist = std::sqrt(dx * dx + dy * dy);
            // Soft disc edge over ~1.2 px.
            const double alpha =
                std::min(1.0, std::max(0.0, (radius - dist) / 1.2 + 0.5));
            const double texture =
                0.06 * std::sin(tex_freq * (tx * x + ty * y) + tex_phase);
            const double checker = ((x + y) % 2 ? 1.0 : -1.0) *
                                   (label == 0 ? 1.0 : -1.0) * cfg.checker_strength;
            for (int c = 0; c < kChannels; ++c) {
              const double bg = bg0[c] + tc * (bg1[c] - bg0[c]);
              const double fg = disc_base[c] + texture;
              image.at(c, y, x) = static_cast<float>(
                  illumination * ((1.0 - alpha) * bg + alpha * fg) + checker);
            }
          }
        }
        image.clamp01();
        dataset.images.push_back(std::move(image));
        dataset.records.push_back({subject_id, label});
      }
    }
  }
  return dataset;
}

// Writes the dataset as PNGs plus a manifest CSV; returns the manifest.
inline DatasetManifest write_toy_dataset(const ToyDataset& dataset, const std::string& dir,
                                         const std::string& name = "toy") {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  DatasetManifest manifest;
  manifest.name = name;
  for (size_t i = 0; i < dataset.images.size(); ++i) {
    const std::string filename = dataset.images[i].source_id() + ".png";
    save_png(dataset.images[i], (fs::path(dir) / filename).string());
    // Paths are stored relative to the manifest's own directory.
    manifest.records.push_back({filename, dataset.records[i].subject_id,
                                dataset.class_names[dataset.records[i].label], std::nullopt});
  }
  save_manifest(manifest, (fs::path(dir) / "manifest.csv").string());
  return manifest;
}

}  // namespace softprobe
