#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "softprobe/autoencoder.hpp"
#include "softprobe/classifier.hpp"
#include "softprobe/error.hpp"
#include "softprobe/image.hpp"
#include "softprobe/png_io.hpp"

namespace softprobe {

enum class PrivacyModelKind { kAdversarialMisclassify, kSynthesisEqualize, kExternal };

// A privacy-enhancing technique psi under evaluation. Enhancement preserves
// image dimensions and the [0, 1] range.
class PrivacyModel {
 public:
  virtual ~PrivacyModel() = default;
  virtual const std::string& name() const = 0;
  virtual PrivacyModelKind kind() const = 0;
  virtual Image enhance(const Image& image) const = 0;
};

// No-op enhancement; the evaluation-control model.
class IdentityPrivacyModel final : public PrivacyModel {
 public:
  explicit IdentityPrivacyModel(std::string name = "identity") : name_(std::move(name)) {}
  const std::string& name() const override { return name_; }
  PrivacyModelKind kind() const override { return PrivacyModelKind::kExternal; }
  Image enhance(const Image& image) const override {
    return image.with_provenance(Provenance::kEnhanced);
  }

 private:
  std::string name_;
};

namespace detail {

inline Image sign_step(const Image& image, const Image& gradient, double epsilon) {
  Image out = image;
  for (size_t i = 0; i < out.data().size(); ++i) {
    const float g = gradient.data()[i];
    const float s = g > 0.0f ? 1.0f : (g < 0.0f ? -1.0f : 0.0f);
    out.data()[i] += static_cast<float>(epsilon) * s;
  }
  return out.clamp01();
}

}  // namespace detail

// Single sign-gradient step against the classifier's current prediction:
// x + epsilon * sign(d CE / d x). With a search range the epsilon is swept
// downward across [hi, lo] in epoch_budget steps, stopping at the first
// value that flips the prediction; the last candidate is returned if none
// does. epsilon 0 returns the image unchanged.
inline Image enhance_fgsm(const Image& image, const AttributeClassifier& classifier,
                          double epsilon, int epoch_budget = 200,
                          std::optional<std::pair<double, double>> epsilon_search_range = {}) {
  if (!classifier.gradient_capable()) {
    throw CapabilityError("FGSM requires a gradient-capable classifier");
  }
  if (epsilon < 0.0) throw ConfigError("FGSM epsilon must be >= 0");
  const int base_label = classifier.predict(image).argmax();
  const Image gradient = classifier.ce_input_gradient(image, classifier.one_hot(base_label));

  if (!epsilon_search_range) {
    return detail::sign_step(image, gradient, epsilon)
        .with_provenance(Provenance::kEnhanced);
  }

  const double hi = epsilon_search_range->first;
  const double lo = epsilon_search_range->second;
  if (!(hi >= lo) || lo < 0.0 || epoch_budget < 1) {
    throw ConfigError("FGSM search range must satisfy hi >= lo >= 0 with budget >= 1");
  }
  Image candidate = image;
  for (int k = 0; k < epoch_budget; ++k) {
    const double eps_k =
        epoch_budget == 1 ? hi : hi - k * (hi - lo) / static_cast<double>(epoch_budget - 1);
    candidate = detail::sign_step(image, gradient, eps_k);
    if (classifier.predict(candidate).argmax() != base_label) break;
  }
  return candidate.with_provenance(Provenance::kEnhanced);
}

struct CwOptions {
  int max_iter = 20;
  double learning_rate = 0.01;
  double init_const = 1000.0;
};

struct CwResult {
  Image image;
  bool success = false;
  int iterations = 0;
  double l2 = 0.0;  // perturbation norm of the returned image
};

// Carlini-Wagner L2 (untargeted): minimize ||x' - x||^2 + c * f(x') with
// f = max(logit_true - max_other_logit, 0), optimizing in tanh space so the
// box constraint holds by construction. Tracks the successful candidate with
// the smallest L2 norm; when no candidate flips the prediction the input is
// returned unchanged with success = false (a valid outcome, recorded in the
// result metadata).
inline CwResult enhance_cw_detail(const Image& image, const AttributeClassifier& classifier,
                                  const CwOptions& opts = {}) {
  if (!classifier.gradient_capable()) {
    throw CapabilityError("Carlini-Wagner requires a gradient-capable classifier");
  }
  const int base_label = classifier.predict(image).argmax();
  const size_t n = image.size();

  // w parametrization: x' = (tanh(w) + 1) / 2
  constexpr float kBoxEps = 1e-5f;
  std::vector<float> w(n);
  for (size_t i = 0; i < n; ++i) {
    const float clipped = std::min(1.0f - kBoxEps, std::max(kBoxEps, image.data()[i]));
    w[i] = std::atanh(2.0f * clipped - 1.0f);
  }

  nn::Adam adam;
  std::vector<float> grad_w(n, 0.0f);
  CwResult best{image.with_provenance(Provenance::kEnhanced), false, 0, 0.0};
  double best_l2 = std::numeric_limits<double>::infinity();

  Image candidate = image;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    for (size_t i = 0; i < n; ++i) {
      candidate.data()[i] = 0.5f * (std::tanh(w[i]) + 1.0f);
    }

    const Posterior p = classifier.predict(candidate);
    const int runner_up = [&] {
      int best_other = base_label == 0 ? 1 : 0;
      for (int k = 0; k < p.size(); ++k) {
        if (k != base_label && p[k] > p[best_other]) best_other = k;
      }
      return best_other;
    }();
    const bool adversarial = p.argmax() != base_label;
    if (adversarial) {
      const double l2 = lp_distance(candidate, image, 2.0);
      if (l2 < best_l2) {
        best_l2 = l2;
        best = {candidate.with_provenance(Provenance::kEnhanced), true, iter, l2};
      }
    }

    // dL/dx' = 2 (x' - x) + c * d f / dx' (zero once the margin is negative)
    Image grad_x(image.height(), image.width(), 0.0f);
    const double margin = std::log(std::max(p[base_label], 1e-300)) -
                          std::log(std::max(p[runner_up], 1e-300));
    if (margin > 0.0) {
      grad_x = classifier.logit_diff_input_gradient(candidate, base_label, runner_up);
      for (float& g : grad_x.data()) g *= static_cast<float>(opts.init_const);
    }
    for (size_t i = 0; i < n; ++i) {
      const float dist_term = 2.0f * (candidate.data()[i] - image.data()[i]);
      const float t = std::tanh(w[i]);
      const float dxdw = 0.5f * (1.0f - t * t);
      grad_w[i] = (dist_term + grad_x.data()[i]) * dxdw;
    }
    adam.step(w, grad_w, static_cast<float>(opts.learning_rate));
  }
  return best;
}

inline Image enhance_cw(const Image& image, const AttributeClassifier& classifier,
                        const CwOptions& opts = {}) {
  return enhance_cw_detail(image, classifier, opts).image;
}

struct FgsmOptions {
  double epsilon = 0.5;  // fixed-epsilon mode default
  std::optional<std::pair<double, double>> search_range;
  int epoch_budget = 200;
};

// FGSM-based privacy model.
class FgsmModel final : public PrivacyModel {
 public:
  using Options = FgsmOptions;

  FgsmModel(const AttributeClassifier* classifier, Options opts = Options(),
            std::string name = "fgsm")
      : classifier_(classifier), opts_(opts), name_(std::move(name)) {}

  const std::string& name() const override { return name_; }
  PrivacyModelKind kind() const override { return PrivacyModelKind::kAdversarialMisclassify; }

  Image enhance(const Image& image) const override {
    return enhance_fgsm(image, *classifier_, opts_.epsilon, opts_.epoch_budget,
                        opts_.search_range);
  }

 private:
  const AttributeClassifier* classifier_;
  Options opts_;
  std::string name_;
};

// Carlini-Wagner-based privacy model (the k-attribute strategy restricted to
// single-attribute suppression).
class CwModel final : public PrivacyModel {
 public:
  CwModel(const AttributeClassifier* classifier, CwOptions opts = {}, std::string name = "cw")
      : classifier_(classifier), opts_(opts), name_(std::move(name)) {}

  const std::string& name() const override { return name_; }
  PrivacyModelKind kind() const override { return PrivacyModelKind::kAdversarialMisclassify; }

  Image enhance(const Image& image) const override {
    return enhance_cw(image, *classifier_, opts_);
  }

 private:
  const AttributeClassifier* classifier_;
  CwOptions opts_;
  std::string name_;
};

// Synthesis-based model: an autoencoder with a reconstruction head (identity
// similarity) and an adversarial head that pushes a frozen attribute
// discriminator toward uniform posteriors. Output blends toward the decoded
// image by `strength`; strength 0 is the exact identity.
struct SynthesisOptions {
  int channels = 16;
  double strength = 1.0;
  uint64_t seed = 21;
};

struct SynthesisTrainOptions {
  int epochs = 40;
  float learning_rate = 1e-3f;
  float recon_weight = 1.0f;
  float adv_weight = 0.5f;
};

class SynthesisModel final : public PrivacyModel {
 public:
  using Options = SynthesisOptions;
  using AdversarialTrainOptions = SynthesisTrainOptions;

  explicit SynthesisModel(Options opts = Options(), std::string name = "san-lite")
      : ae_(opts.channels, opts.seed, name + "-ae"), opts_(opts), name_(std::move(name)) {}

  const std::string& name() const override { return name_; }
  PrivacyModelKind kind() const override { return PrivacyModelKind::kSynthesisEqualize; }

  // Reconstruction-only pretraining; afterwards the model acts close to the
  // identity (up to autoencoder fidelity).
  void warm_start(const std::vector<Image>& images, int epochs = 40, float lr = 2e-3f) {
    ConvAutoencoder::TrainOptions topts;
    topts.epochs = epochs;
    topts.learning_rate = lr;
    topts.shuffle_seed = opts_.seed ^ 0xabcded123ull;
    ae_.train_reconstruction(images, topts);
    warm_started_ = true;
  }

  // Joint phase: reconstruction MSE plus cross-entropy of the discriminator
  // posteriors against the uniform target, backpropagated through the
  // decoder output.
  void train_adversarial(const std::vector<Image>& images,
                         const AttributeClassifier& discriminator,
                         const AdversarialTrainOptions& opts = AdversarialTrainOptions()) {
    if (!discriminator.gradient_capable()) {
      throw CapabilityError("synthesis training needs a gradient-capable discriminator");
    }
    if (!warm_started_) {
      throw NotReadyError("synthesis model '" + name_ + "' must be warm-started first");
    }
    const Posterior uniform = Posterior::uniform(discriminator.num_classes());
    std::mt19937_64 shuffle_rng(opts_.seed ^ 0x5bd1e995u);
    std::vector<size_t> order(images.size());
    std::iota(order.begin(), order.end(), size_t{0});
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      for (size_t idx : order) {
        const Image& img = images[idx];
        nn::Tensor x = ae_.padded_input(img);
        nn::Tensor y = ae_.forward(x);
        Image decoded(img.height(), img.width(), 0.0f, Provenance::kEnhanced, img.source_id());
        for (int c = 0; c < kChannels; ++c) {
          for (int yy = 0; yy < img.height(); ++yy) {
            for (int xx = 0; xx < img.width(); ++xx) {
              decoded.at(c, yy, xx) = y.at(c, yy, xx);
            }
          }
        }
        const Image adv_grad = discriminator.ce_input_gradient(decoded, uniform);

        nn::Tensor grad(y.c, y.h, y.w);
        const float inv_n = 1.0f / static_cast<float>(y.size());
        for (int c = 0; c < kChannels; ++c) {
          for (int yy = 0; yy < y.h; ++yy) {
            for (int xx = 0; xx < y.w; ++xx) {
              float g = opts.recon_weight * 2.0f * (y.at(c, yy, xx) - x.at(c, yy, xx)) * inv_n;
              if (yy < img.height() && xx < img.width()) {
                g += opts.adv_weight * adv_grad.at(c, yy, xx);
              }
              grad.at(c, yy, xx) = g;
            }
          }
        }
        ae_.backward_and_step(grad, opts.learning_rate);
      }
    }
    adversarially_trained_ = true;
  }

  bool ready() const { return warm_started_ || adversarially_trained_; }
  bool adversarially_trained() const { return adversarially_trained_; }

  Image enhance(const Image& image) const override {
    if (!ready()) {
      throw NotReadyError("synthesis model '" + name_ + "' has not been trained");
    }
    const Image decoded = ae_.reconstruct(image);
    Image out = image;
    const float s = static_cast<float>(opts_.strength);
    for (size_t i = 0; i < out.data().size(); ++i) {
      out.data()[i] += s * (decoded.data()[i] - out.data()[i]);
    }
    return out.clamp01().with_provenance(Provenance::kEnhanced);
  }

  void save(const std::string& path, const std::string& training_hash = {}) const {
    ae_.save(path, training_hash);
  }

  void load_autoencoder(const std::string& path) {
    ae_ = ConvAutoencoder::load(path, name_ + "-ae");
    warm_started_ = ae_.ready();
    adversarially_trained_ = ae_.ready();
  }

 private:
  mutable ConvAutoencoder ae_;  // forward caches; single-threaded use
  Options opts_;
  std::string name_;
  bool warm_started_ = false;
  bool adversarially_trained_ = false;
};

// ---------------------------------------------------------------------------
// External enhancement ingestion

struct ExternalBatchItem {
  std::string filename;
  bool ok = false;
  std::string message;
};

struct ExternalBatchResult {
  std::vector<ExternalBatchItem> items;
  int ok_count = 0;
  int error_count = 0;
};

// Adapter to an out-of-process privacy model. Directory-pairing convention:
// every input file must appear under the same name in the output directory
// after produce() runs.
class ExternalAdapter {
 public:
  virtual ~ExternalAdapter() = default;
  virtual const std::string& name() const = 0;
  virtual void produce(const std::string& dir_in, const std::string& dir_out) const = 0;
};

class CopyAdapter final : public ExternalAdapter {
 public:
  explicit CopyAdapter(std::string name = "copy") : name_(std::move(name)) {}
  const std::string& name() const override { return name_; }
  void produce(const std::string& dir_in, const std::string& dir_out) const override {
    namespace fs = std::filesystem;
    fs::create_directories(dir_out);
    for (const auto& entry : fs::directory_iterator(dir_in)) {
      if (entry.path().extension() == ".png") {
        fs::copy_file(entry.path(), fs::path(dir_out) / entry.path().filename(),
                      fs::copy_options::overwrite_existing);
      }
    }
  }

 private:
  std::string name_;
};

// Runs the adapter, then validates every produced image against its source
// (presence and dimensions). Problems are reported per file, never thrown.
inline ExternalBatchResult enhance_external(const std::string& dir_in,
                                            const std::string& dir_out,
                                            const ExternalAdapter& adapter) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir_in)) throw IoError("input directory not found: " + dir_in);
  adapter.produce(dir_in, dir_out);

  std::vector<fs::path> inputs;
  for (const auto& entry : fs::directory_iterator(dir_in)) {
    if (entry.path().extension() == ".png") inputs.push_back(entry.path());
  }
  std::sort(inputs.begin(), inputs.end());

  ExternalBatchResult result;
  for (const fs::path& in_path : inputs) {
    ExternalBatchItem item;
    item.filename = in_path.filename().string();
    const fs::path out_path = fs::path(dir_out) / in_path.filename();
    if (!fs::exists(out_path)) {
      item.message = "missing output image";
    } else {
      try {
        const Image original = load_png(in_path.string());
        const Image enhanced = load_png(out_path.string());
        if (!original.same_dims(enhanced)) {
          item.message = "dimension mismatch: " + std::to_string(enhanced.height()) + "x" +
                         std::to_string(enhanced.width()) + " vs " +
                         std::to_string(original.height()) + "x" +
                         std::to_string(original.width());
        } else {
          item.ok = true;
        }
      } catch (const Error& e) {
        item.message = e.what();
      }
    }
    (item.ok ? result.ok_count : result.error_count) += 1;
    result.items.push_back(std::move(item));
  }
  return result;
}

}  // namespace softprobe
