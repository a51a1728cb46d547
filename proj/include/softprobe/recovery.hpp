#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "softprobe/backends.hpp"
#include "softprobe/error.hpp"
#include "softprobe/image.hpp"
#include "softprobe/mask_schedule.hpp"
#include "softprobe/super_resolve.hpp"

namespace softprobe {

// Raised when a face parser finds no face pixels; the image should be
// flagged rather than silently zeroed.
class EmptyFaceError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kInpainterContractTolerance = 1e-6;

// chi_d: treat the enhancement as high-frequency noise and remove it.
inline Image recover_denoise(const Image& image, const DenoiseBackend& backend) {
  Image out;
  try {
    out = backend.denoise(image);
  } catch (const Error& e) {
    throw ContractViolationError("denoiser '" + backend.id() + "' failed: " + e.what());
  }
  if (!out.same_dims(image)) {
    throw ContractViolationError("denoiser '" + backend.id() + "' changed image dimensions");
  }
  return out.clamp01().with_provenance(Provenance::kRecovered);
}

// chi_in: mask the image with every schedule mask, have the backend fill
// the zeroed pixels, and rebuild the output from inpainted regions only.
// Partial results are aggregated incrementally (the default schedule has
// over a thousand masks; keeping all partials alive would be wasteful).
// A backend that modifies surviving pixels violates its contract --
// aggregation correctness depends on it -- and aborts the recovery.
inline Image recover_inpaint(const Image& image, const MaskSchedule& schedule,
                             const InpaintBackend& backend) {
  if (image.height() != schedule.rows || image.width() != schedule.cols) {
    throw ContractViolationError("inpaint: schedule built for different dimensions");
  }
  for (int count : schedule.coverage) {
    if (count == 0) throw ContractViolationError("inpaint: schedule has uncovered pixels");
  }

  std::vector<double> acc(image.size(), 0.0);
  for (size_t i = 0; i < schedule.masks.size(); ++i) {
    const BinaryMask& mask = schedule.masks[i];
    const Image masked = apply_mask(image, mask);
    Image filled;
    try {
      filled = backend.inpaint(masked, mask);
    } catch (const Error& e) {
      throw ContractViolationError("inpainter '" + backend.id() + "' failed on mask " +
                                   std::to_string(i) + ": " + e.what());
    }
    if (!filled.same_dims(image)) {
      throw ContractViolationError("inpainter '" + backend.id() + "' changed image dimensions");
    }
    for (int c = 0; c < kChannels; ++c) {
      for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
          if (mask.at(y, x)) {
            if (std::abs(filled.at(c, y, x) - image.at(c, y, x)) > kInpainterContractTolerance) {
              throw ContractViolationError("inpainter '" + backend.id() +
                                           "' modified surviving pixels (mask " +
                                           std::to_string(i) + ")");
            }
          } else {
            acc[(static_cast<size_t>(c) * image.height() + y) * image.width() + x] +=
                filled.at(c, y, x);
          }
        }
      }
    }
  }

  Image out(image.height(), image.width(), 0.0f, Provenance::kRecovered, image.source_id());
  for (int c = 0; c < kChannels; ++c) {
    for (int y = 0; y < image.height(); ++y) {
      for (int x = 0; x < image.width(); ++x) {
        const size_t idx = (static_cast<size_t>(c) * image.height() + y) * image.width() + x;
        out.at(c, y, x) = static_cast<float>(acc[idx] / schedule.coverage_at(y, x));
      }
    }
  }
  return out.clamp01();
}

// chi_a: reconstruct through an autoencoder trained on clean images.
inline Image recover_autoencode(const Image& image, const AutoencodeBackend& backend) {
  if (!backend.ready()) {
    throw NotReadyError("autoencoder '" + backend.id() + "' is not trained");
  }
  Image out;
  try {
    out = backend.reconstruct(image);
  } catch (const Error& e) {
    throw ContractViolationError("autoencoder '" + backend.id() + "' failed: " + e.what());
  }
  if (!out.same_dims(image)) {
    throw ContractViolationError("autoencoder '" + backend.id() + "' changed image dimensions");
  }
  return out.clamp01().with_provenance(Provenance::kRecovered);
}

// chi_br: keep the facial region (all facial-part labels), zero the rest.
inline Image recover_background_removal(const Image& image, const FaceParseBackend& backend) {
  ParseLabelMap labels;
  try {
    labels = backend.parse(image);
  } catch (const Error& e) {
    throw ContractViolationError("face parser '" + backend.id() + "' failed: " + e.what());
  }
  if (labels.height != image.height() || labels.width != image.width()) {
    throw ContractViolationError("face parser '" + backend.id() + "' returned wrong-size map");
  }
  const BinaryMask mask = face_mask(labels);
  if (mask.count_zeros() == mask.data().size()) {
    throw EmptyFaceError("face parser '" + backend.id() + "' found no face pixels in '" +
                         image.source_id() + "'");
  }
  return apply_mask(image, mask).with_provenance(Provenance::kRecovered);
}

// chi_sr: downscale (bilinear) and let the backend upscale back. The low-res
// size is the primary knob when given; otherwise floor(dim / factor).
inline Image recover_super_resolve(const Image& image, double factor,
                                   const SuperResolveBackend& backend,
                                   std::optional<std::pair<int, int>> lowres_dims = {}) {
  if (!(factor >= 1.0)) throw ConfigError("super-resolve factor must be >= 1");
  int low_h, low_w;
  if (lowres_dims) {
    low_h = lowres_dims->first;
    low_w = lowres_dims->second;
  } else {
    low_h = static_cast<int>(image.height() / factor);
    low_w = static_cast<int>(image.width() / factor);
  }
  if (low_h == image.height() && low_w == image.width()) {
    return image.with_provenance(Provenance::kRecovered);
  }
  if (low_h < 8 || low_w < 8) {
    throw ConfigError("super-resolve: low-res size " + std::to_string(low_h) + "x" +
                      std::to_string(low_w) + " is below the 8 px minimum");
  }
  const Image low = bilinear_resize(image, low_h, low_w);
  Image out;
  try {
    out = backend.upscale(low, image.height(), image.width());
  } catch (const Error& e) {
    throw ContractViolationError("super-resolver '" + backend.id() + "' failed: " + e.what());
  }
  if (!out.same_dims(image)) {
    throw ContractViolationError("super-resolver '" + backend.id() +
                                 "' returned wrong dimensions");
  }
  return out.clamp01().with_provenance(Provenance::kRecovered);
}

enum class TransformKind { kDenoise, kInpaint, kAutoencode, kBackgroundRemove, kSuperResolve };

inline const char* to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::kDenoise:
      return "denoise";
    case TransformKind::kInpaint:
      return "inpaint";
    case TransformKind::kAutoencode:
      return "autoencode";
    case TransformKind::kBackgroundRemove:
      return "background_remove";
    case TransformKind::kSuperResolve:
      return "super_resolve";
  }
  return "?";
}

// One recovery stage: a transform kind bound to its backend and parameters.
// Every transform maps an image to an image of identical dimensions.
class RecoveryTransform {
 public:
  static RecoveryTransform denoise(std::shared_ptr<const DenoiseBackend> backend) {
    RecoveryTransform t(TransformKind::kDenoise);
    t.denoiser_ = std::move(backend);
    return t;
  }
  static RecoveryTransform inpaint(std::shared_ptr<const InpaintBackend> backend,
                                   std::shared_ptr<const MaskSchedule> schedule) {
    RecoveryTransform t(TransformKind::kInpaint);
    t.inpainter_ = std::move(backend);
    t.schedule_ = std::move(schedule);
    return t;
  }
  static RecoveryTransform autoencode(std::shared_ptr<const AutoencodeBackend> backend) {
    RecoveryTransform t(TransformKind::kAutoencode);
    t.autoencoder_ = std::move(backend);
    return t;
  }
  static RecoveryTransform background_remove(std::shared_ptr<const FaceParseBackend> backend) {
    RecoveryTransform t(TransformKind::kBackgroundRemove);
    t.parser_ = std::move(backend);
    return t;
  }
  static RecoveryTransform super_resolve(std::shared_ptr<const SuperResolveBackend> backend,
                                         double factor,
                                         std::optional<std::pair<int, int>> lowres = {}) {
    RecoveryTransform t(TransformKind::kSuperResolve);
    t.super_resolver_ = std::move(backend);
    t.sr_factor_ = factor;
    t.sr_lowres_ = lowres;
    return t;
  }

  TransformKind kind() const { return kind_; }

  const std::string& backend_id() const {
    switch (kind_) {
      case TransformKind::kDenoise:
        return denoiser_->id();
      case TransformKind::kInpaint:
        return inpainter_->id();
      case TransformKind::kAutoencode:
        return autoencoder_->id();
      case TransformKind::kBackgroundRemove:
        return parser_->id();
      case TransformKind::kSuperResolve:
        return super_resolver_->id();
    }
    throw ConfigError("invalid transform kind");
  }

  Image run(const Image& image) const {
    switch (kind_) {
      case TransformKind::kDenoise:
        return recover_denoise(image, *denoiser_);
      case TransformKind::kInpaint:
        return recover_inpaint(image, *schedule_, *inpainter_);
      case TransformKind::kAutoencode:
        return recover_autoencode(image, *autoencoder_);
      case TransformKind::kBackgroundRemove:
        return recover_background_removal(image, *parser_);
      case TransformKind::kSuperResolve:
        return recover_super_resolve(image, sr_factor_, *super_resolver_, sr_lowres_);
    }
    throw ConfigError("invalid transform kind");
  }

 private:
  explicit RecoveryTransform(TransformKind kind) : kind_(kind) {}

  TransformKind kind_;
  std::shared_ptr<const DenoiseBackend> denoiser_;
  std::shared_ptr<const InpaintBackend> inpainter_;
  std::shared_ptr<const MaskSchedule> schedule_;
  std::shared_ptr<const AutoencodeBackend> autoencoder_;
  std::shared_ptr<const FaceParseBackend> parser_;
  std::shared_ptr<const SuperResolveBackend> super_resolver_;
  double sr_factor_ = 3.6;
  std::optional<std::pair<int, int>> sr_lowres_;
};

// A named composition of recovery transforms; stages run left to right.
struct RecoveryPipeline {
  std::string name;
  std::vector<RecoveryTransform> stages;

  Image run(const Image& image) const {
    if (stages.empty()) {
      throw ConfigError("recovery pipeline '" + name + "' has no stages");
    }
    Image current = image;
    for (size_t i = 0; i < stages.size(); ++i) {
      try {
        current = stages[i].run(current);
      } catch (const EmptyFaceError&) {
        throw;
      } catch (const Error& e) {
        throw ContractViolationError("pipeline '" + name + "' stage " + std::to_string(i) +
                                     " (" + to_string(stages[i].kind()) + "): " + e.what());
      }
    }
    return current;
  }
};

// Backends behind the standard pipeline variants.
struct RecoveryBackends {
  std::shared_ptr<const DenoiseBackend> denoiser;
  std::shared_ptr<const InpaintBackend> inpainter;
  std::shared_ptr<const MaskSchedule> schedule;
  std::shared_ptr<const AutoencodeBackend> autoencoder;
  std::shared_ptr<const FaceParseBackend> parser;
};

// The nine reserved pipeline variants: four one-stage transforms plus the
// five standard two-stage compositions.
inline std::map<std::string, RecoveryPipeline> standard_pipelines(
    const RecoveryBackends& backends) {
  const auto d = [&] { return RecoveryTransform::denoise(backends.denoiser); };
  const auto in = [&] {
    return RecoveryTransform::inpaint(backends.inpainter, backends.schedule);
  };
  const auto a = [&] { return RecoveryTransform::autoencode(backends.autoencoder); };
  const auto b = [&] { return RecoveryTransform::background_remove(backends.parser); };

  std::map<std::string, RecoveryPipeline> pipelines;
  pipelines["PP-D"] = {"PP-D", {d()}};
  pipelines["PP-I"] = {"PP-I", {in()}};
  pipelines["PP-A"] = {"PP-A", {a()}};
  pipelines["PP-B"] = {"PP-B", {b()}};
  pipelines["PP-DI"] = {"PP-DI", {d(), in()}};
  pipelines["PP-DA"] = {"PP-DA", {d(), a()}};
  pipelines["PP-DB"] = {"PP-DB", {d(), b()}};
  pipelines["PP-IB"] = {"PP-IB", {in(), b()}};
  pipelines["PP-AB"] = {"PP-AB", {a(), b()}};
  return pipelines;
}

inline Image run_pipeline(const Image& image, const RecoveryPipeline& pipeline) {
  return pipeline.run(image);
}

}  // namespace softprobe
