#pragma once

#include <algorithm>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "softprobe/error.hpp"
#include "softprobe/image.hpp"
#include "softprobe/nn.hpp"
#include "softprobe/weights_io.hpp"

namespace softprobe {

// Attribute classifier xi_a. Predictions depend on pixels only (provenance
// metadata is ignored). Gradient-capable implementations expose input
// gradients for steering white-box attacks and adversarial training.
class AttributeClassifier {
 public:
  virtual ~AttributeClassifier() = default;

  virtual const std::string& id() const = 0;
  virtual const std::vector<std::string>& classes() const = 0;
  virtual bool trained() const = 0;
  virtual bool gradient_capable() const { return false; }

  virtual Posterior predict(const Image& image) const = 0;

  // d CE(softmax(logits), target) / d pixels, image-shaped.
  virtual Image ce_input_gradient(const Image&, const Posterior&) const {
    throw CapabilityError("classifier '" + id() + "' does not expose input gradients");
  }

  // d (logit_a - logit_b) / d pixels.
  virtual Image logit_diff_input_gradient(const Image&, int, int) const {
    throw CapabilityError("classifier '" + id() + "' does not expose input gradients");
  }

  int num_classes() const { return static_cast<int>(classes().size()); }

  Posterior one_hot(int label) const {
    std::vector<double> p(classes().size(), 0.0);
    p.at(label) = 1.0;
    return Posterior(p);
  }

 protected:
  void require_trained() const {
    if (!trained()) throw NotReadyError("classifier '" + id() + "' has not been trained");
  }
};

// Degenerate symmetric stub: uniform posterior for every input.
class UniformStubClassifier final : public AttributeClassifier {
 public:
  explicit UniformStubClassifier(std::vector<std::string> classes, std::string id = "stub-uniform")
      : classes_(std::move(classes)), id_(std::move(id)) {}

  const std::string& id() const override { return id_; }
  const std::vector<std::string>& classes() const override { return classes_; }
  bool trained() const override { return true; }

  Posterior predict(const Image&) const override {
    return Posterior::uniform(static_cast<int>(classes_.size()));
  }

 private:
  std::vector<std::string> classes_;
  std::string id_;
};

enum class Optimizer { kSgd, kAdam };

struct ClassifierTrainOptions {
  int epochs = 60;
  float learning_rate = 1e-3f;
  float l2 = 0.0f;
  // Initial weight scale. Plain SGD without decay leaves the random init's
  // off-manifold component untouched, so trained models keep a brittle
  // high-frequency gradient direction the way large networks do; this is
  // an explicit knob because the attack experiments depend on it.
  float init_sigma = 0.04f;
  Optimizer optimizer = Optimizer::kSgd;
  uint64_t seed = 7;
};

// Multinomial logistic regression on raw pixels. The logistic-regression
// baseline: fully gradient-capable, trains in seconds on the synthetic sets.
class LinearSoftmaxClassifier final : public AttributeClassifier {
 public:
  LinearSoftmaxClassifier(std::vector<std::string> classes, int height, int width,
                          const ClassifierTrainOptions& opts = {}, std::string id = "toy-linear")
      : classes_(std::move(classes)),
        height_(height),
        width_(width),
        opts_(opts),
        id_(std::move(id)) {
    if (classes_.size() < 2) throw ConfigError("classifier needs at least two classes");
    std::mt19937_64 rng(opts_.seed);
    layer_ = nn::Dense(input_dim(), static_cast<int>(classes_.size()), rng, opts_.init_sigma);
  }

  const std::string& id() const override { return id_; }
  const std::vector<std::string>& classes() const override { return classes_; }
  bool trained() const override { return trained_; }
  bool gradient_capable() const override { return true; }
  int height() const { return height_; }
  int width() const { return width_; }

  Posterior predict(const Image& image) const override {
    require_trained();
    return Posterior(nn::softmax(layer_.apply(flatten(image))));
  }

  Image ce_input_gradient(const Image& image, const Posterior& target) const override {
    require_trained();
    const std::vector<double> p = nn::softmax(layer_.apply(flatten(image)));
    std::vector<float> coeffs(p.size());
    for (size_t k = 0; k < p.size(); ++k) {
      coeffs[k] = static_cast<float>(p[k] - target[static_cast<int>(k)]);
    }
    return unflatten(layer_.input_gradient(coeffs), image);
  }

  Image logit_diff_input_gradient(const Image& image, int a, int b) const override {
    require_trained();
    std::vector<float> coeffs(classes_.size(), 0.0f);
    coeffs.at(a) += 1.0f;
    coeffs.at(b) -= 1.0f;
    return unflatten(layer_.input_gradient(coeffs), image);
  }

  void train(const std::vector<Image>& images, const std::vector<int>& labels) {
    check_training_set(images, labels, static_cast<int>(classes_.size()));
    std::mt19937_64 shuffle_rng(opts_.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<size_t> order(images.size());
    std::iota(order.begin(), order.end(), size_t{0});
    for (int epoch = 0; epoch < opts_.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      for (size_t idx : order) {
        const std::vector<float> x = flatten(images[idx]);
        const std::vector<double> p = nn::softmax(layer_.forward(x));
        std::vector<float> grad(p.size());
        for (size_t k = 0; k < p.size(); ++k) {
          grad[k] = static_cast<float>(p[k]) - (static_cast<int>(k) == labels[idx] ? 1.0f : 0.0f);
        }
        layer_.backward(grad);
        layer_.add_l2_to_grads(opts_.l2);
        if (opts_.optimizer == Optimizer::kAdam) {
          layer_.adam_step(opts_.learning_rate);
        } else {
          layer_.sgd_step(opts_.learning_rate);
        }
      }
    }
    trained_ = true;
  }

  void save(const std::string& path, const std::string& training_hash = {}) const {
    WeightFile file;
    file.header["kind"] = "linear_softmax";
    file.header["classes"] = classes_;
    file.header["height"] = height_;
    file.header["width"] = width_;
    file.header["seed"] = opts_.seed;
    file.header["trained"] = trained_;
    file.header["training_split_hash"] = training_hash;
    file.arrays["dense.w"] = layer_.weights();
    file.arrays["dense.b"] = layer_.bias();
    save_weights(file, path);
  }

  static std::unique_ptr<LinearSoftmaxClassifier> load(const std::string& path,
                                                       std::string id = "toy-linear") {
    WeightFile file = load_weights(path);
    if (file.header.at("kind") != "linear_softmax") {
      throw IoError(path + " does not contain a linear_softmax classifier");
    }
    ClassifierTrainOptions opts;
    opts.seed = file.header.at("seed").get<uint64_t>();
    auto model = std::make_unique<LinearSoftmaxClassifier>(
        file.header.at("classes").get<std::vector<std::string>>(),
        file.header.at("height").get<int>(), file.header.at("width").get<int>(), opts,
        std::move(id));
    model->layer_.weights() = file.arrays.at("dense.w");
    model->layer_.bias() = file.arrays.at("dense.b");
    model->trained_ = file.header.value("trained", false);
    return model;
  }

  static void check_training_set(const std::vector<Image>& images, const std::vector<int>& labels,
                                 int num_classes) {
    if (images.empty() || images.size() != labels.size()) {
      throw ContractViolationError("training set images/labels mismatch");
    }
    std::vector<int> counts(num_classes, 0);
    for (int l : labels) counts.at(l) += 1;
    for (int k = 0; k < num_classes; ++k) {
      if (counts[k] == 0) {
        throw ContractViolationError("training split is missing class " + std::to_string(k));
      }
    }
  }

 private:
  int input_dim() const { return kChannels * height_ * width_; }

  std::vector<float> flatten(const Image& image) const {
    if (image.height() != height_ || image.width() != width_) {
      throw ContractViolationError("classifier '" + id_ + "' expects " +
                                   std::to_string(height_) + "x" + std::to_string(width_) +
                                   " inputs");
    }
    return image.data();
  }

  Image unflatten(const std::vector<float>& grad, const Image& like) const {
    return Image(like.height(), like.width(), grad, like.provenance(), like.source_id());
  }

  std::vector<std::string> classes_;
  int height_, width_;
  ClassifierTrainOptions opts_;
  std::string id_;
  nn::Dense layer_;
  bool trained_ = false;
};

// Small convolutional classifier: conv -> tanh -> avgpool -> dense softmax.
// Stands in for the full-size CNN backbones at desk scale.
class SmallCnnClassifier final : public AttributeClassifier {
 public:
  SmallCnnClassifier(std::vector<std::string> classes, int height, int width, int filters = 6,
                     const ClassifierTrainOptions& opts = {}, std::string id = "toy-cnn")
      : classes_(std::move(classes)),
        height_(height),
        width_(width),
        filters_(filters),
        opts_(opts),
        id_(std::move(id)) {
    if (classes_.size() < 2) throw ConfigError("classifier needs at least two classes");
    if (height % 2 || width % 2) throw ConfigError("cnn classifier needs even input dims");
    std::mt19937_64 rng(opts_.seed);
    conv_ = nn::Conv2d(kChannels, filters_, 3, rng);
    dense_ = nn::Dense(filters_ * (height / 2) * (width / 2),
                       static_cast<int>(classes_.size()), rng, opts_.init_sigma);
  }

  const std::string& id() const override { return id_; }
  const std::vector<std::string>& classes() const override { return classes_; }
  bool trained() const override { return trained_; }
  bool gradient_capable() const override { return true; }

  Posterior predict(const Image& image) const override {
    require_trained();
    SmallCnnClassifier& self = const_cast<SmallCnnClassifier&>(*this);
    return Posterior(nn::softmax(self.forward_logits(image)));
  }

  Image ce_input_gradient(const Image& image, const Posterior& target) const override {
    require_trained();
    SmallCnnClassifier& self = const_cast<SmallCnnClassifier&>(*this);
    const std::vector<double> p = nn::softmax(self.forward_logits(image));
    std::vector<float> coeffs(p.size());
    for (size_t k = 0; k < p.size(); ++k) {
      coeffs[k] = static_cast<float>(p[k] - target[static_cast<int>(k)]);
    }
    return self.backward_to_input(coeffs, image);
  }

  Image logit_diff_input_gradient(const Image& image, int a, int b) const override {
    require_trained();
    SmallCnnClassifier& self = const_cast<SmallCnnClassifier&>(*this);
    self.forward_logits(image);  // refresh caches
    std::vector<float> coeffs(classes_.size(), 0.0f);
    coeffs.at(a) += 1.0f;
    coeffs.at(b) -= 1.0f;
    return self.backward_to_input(coeffs, image);
  }

  void train(const std::vector<Image>& images, const std::vector<int>& labels) {
    LinearSoftmaxClassifier::check_training_set(images, labels,
                                                static_cast<int>(classes_.size()));
    std::mt19937_64 shuffle_rng(opts_.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<size_t> order(images.size());
    std::iota(order.begin(), order.end(), size_t{0});
    for (int epoch = 0; epoch < opts_.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      for (size_t idx : order) {
        const std::vector<double> p = nn::softmax(forward_logits(images[idx]));
        std::vector<float> grad(p.size());
        for (size_t k = 0; k < p.size(); ++k) {
          grad[k] = static_cast<float>(p[k]) - (static_cast<int>(k) == labels[idx] ? 1.0f : 0.0f);
        }
        std::vector<float> gflat = dense_.backward(grad);
        dense_.add_l2_to_grads(opts_.l2);
        nn::Tensor gpool(filters_, height_ / 2, width_ / 2);
        gpool.v = std::move(gflat);
        conv_.backward(act_.backward(pool_.backward(gpool)));
        if (opts_.optimizer == Optimizer::kAdam) {
          dense_.adam_step(opts_.learning_rate);
          conv_.adam_step(opts_.learning_rate);
        } else {
          dense_.sgd_step(opts_.learning_rate);
          conv_.sgd_step(opts_.learning_rate);
        }
      }
    }
    trained_ = true;
  }

 private:
  std::vector<float> forward_logits(const Image& image) {
    if (image.height() != height_ || image.width() != width_) {
      throw ContractViolationError("classifier '" + id_ + "' expects " +
                                   std::to_string(height_) + "x" + std::to_string(width_) +
                                   " inputs");
    }
    nn::Tensor pooled = pool_.forward(act_.forward(conv_.forward(nn::image_to_tensor(image))));
    return dense_.forward(pooled.v);
  }

  Image backward_to_input(const std::vector<float>& logit_coeffs, const Image& like) {
    std::vector<float> gflat = dense_.input_gradient(logit_coeffs);
    nn::Tensor gpool(filters_, height_ / 2, width_ / 2);
    gpool.v = std::move(gflat);
    nn::Tensor gin = conv_.backward(act_.backward(pool_.backward(gpool)));
    return Image(like.height(), like.width(), gin.v, like.provenance(), like.source_id());
  }

  std::vector<std::string> classes_;
  int height_, width_, filters_;
  ClassifierTrainOptions opts_;
  std::string id_;
  nn::Conv2d conv_;
  nn::Tanh act_;
  nn::AvgPool2 pool_;
  nn::Dense dense_;
  bool trained_ = false;
};

enum class ToyArchitecture { kLinear, kSmallCnn };

// Trains a toy classifier on the given split. Errors when a class is absent.
inline std::unique_ptr<AttributeClassifier> train_toy_classifier(
    const std::vector<Image>& images, const std::vector<int>& labels,
    std::vector<std::string> classes, ToyArchitecture arch = ToyArchitecture::kLinear,
    const ClassifierTrainOptions& opts = {}, std::string id = "toy") {
  if (images.empty()) throw ContractViolationError("empty training split");
  const int h = images.front().height();
  const int w = images.front().width();
  if (arch == ToyArchitecture::kLinear) {
    auto model = std::make_unique<LinearSoftmaxClassifier>(std::move(classes), h, w, opts,
                                                           std::move(id));
    model->train(images, labels);
    return model;
  }
  auto model = std::make_unique<SmallCnnClassifier>(std::move(classes), h, w, 6, opts,
                                                    std::move(id));
  model->train(images, labels);
  return model;
}

}  // namespace softprobe
