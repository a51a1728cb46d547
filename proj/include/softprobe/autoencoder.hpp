#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "softprobe/backends.hpp"
#include "softprobe/image.hpp"
#include "softprobe/nn.hpp"
#include "softprobe/weights_io.hpp"

namespace softprobe {

// Small convolutional autoencoder trained on clean images only. The encoder
// compresses into a half-resolution latent; the decoder upsamples and
// re-convolves, so outputs are band-limited and high-frequency input content
// cannot pass through. Odd image dims are replicate-padded to even before
// encoding and cropped after decoding.
class ConvAutoencoder final : public AutoencodeBackend {
 public:
  explicit ConvAutoencoder(int channels = 16, uint64_t seed = 1, std::string id = "ref-ae")
      : channels_(channels), seed_(seed), id_(std::move(id)) {
    std::mt19937_64 rng(seed);
    enc_conv_ = nn::Conv2d(kChannels, channels_, 3, rng);
    dec_conv1_ = nn::Conv2d(channels_, channels_, 3, rng);
    dec_conv2_ = nn::Conv2d(channels_, kChannels, 3, rng);
  }

  const std::string& id() const override { return id_; }
  bool ready() const override { return trained_; }
  // Layer forward passes cache activations in place.
  bool concurrent_safe() const override { return false; }
  int channels() const { return channels_; }
  uint64_t seed() const { return seed_; }

  nn::Tensor encode(const nn::Tensor& in) {
    return pool_.forward(enc_act_.forward(enc_conv_.forward(in)));
  }

  nn::Tensor decode(const nn::Tensor& latent) {
    return dec_act2_.forward(
        dec_conv2_.forward(dec_act1_.forward(dec_conv1_.forward(up_.forward(latent)))));
  }

  nn::Tensor forward(const nn::Tensor& in) { return decode(encode(in)); }

  // Backprop from dL/d(output); applies one Adam step.
  void backward_and_step(const nn::Tensor& grad_out, float lr) {
    nn::Tensor g = dec_act2_.backward(grad_out);
    g = dec_conv2_.backward(g);
    g = dec_act1_.backward(g);
    g = dec_conv1_.backward(g);
    g = up_.backward(g);
    g = pool_.backward(g);
    g = enc_act_.backward(g);
    enc_conv_.backward(g);
    enc_conv_.adam_step(lr);
    dec_conv1_.adam_step(lr);
    dec_conv2_.adam_step(lr);
  }

  struct TrainOptions {
    int epochs = 60;
    float learning_rate = 2e-3f;
    uint64_t shuffle_seed = 99;
  };

  // Reconstruction training (MSE), full pass per epoch in seeded order.
  // Returns the final mean per-pixel squared error.
  double train_reconstruction(const std::vector<Image>& images, const TrainOptions& opts) {
    if (images.empty()) throw ContractViolationError("autoencoder: empty training set");
    std::mt19937_64 shuffle_rng(opts.shuffle_seed);
    std::vector<size_t> order(images.size());
    std::iota(order.begin(), order.end(), size_t{0});

    double last_loss = 0.0;
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      last_loss = 0.0;
      for (size_t idx : order) {
        nn::Tensor x = padded_input(images[idx]);
        nn::Tensor y = forward(x);
        nn::Tensor grad(y.c, y.h, y.w);
        const float inv_n = 1.0f / static_cast<float>(y.size());
        double loss = 0.0;
        for (size_t i = 0; i < y.size(); ++i) {
          const float diff = y.v[i] - x.v[i];
          grad.v[i] = 2.0f * diff * inv_n;
          loss += static_cast<double>(diff) * diff;
        }
        last_loss += loss / static_cast<double>(y.size());
        backward_and_step(grad, opts.learning_rate);
      }
      last_loss /= static_cast<double>(images.size());
    }
    trained_ = true;
    return last_loss;
  }

  Image reconstruct(const Image& image) const override {
    if (!trained_) throw NotReadyError("autoencoder '" + id_ + "' has not been trained");
    // Forward caches live in the layers; keep the public API const.
    ConvAutoencoder& self = const_cast<ConvAutoencoder&>(*this);
    nn::Tensor y = self.forward(padded_input(image));
    return crop_output(y, image).clamp01();
  }

  void mark_trained() { trained_ = true; }

  void save(const std::string& path, const std::string& training_hash = {}) const {
    WeightFile file;
    file.header["kind"] = "conv_autoencoder";
    file.header["channels"] = channels_;
    file.header["seed"] = seed_;
    file.header["trained"] = trained_;
    file.header["training_split_hash"] = training_hash;
    file.arrays["enc_conv.w"] = enc_conv_.weights();
    file.arrays["enc_conv.b"] = enc_conv_.bias();
    file.arrays["dec_conv1.w"] = dec_conv1_.weights();
    file.arrays["dec_conv1.b"] = dec_conv1_.bias();
    file.arrays["dec_conv2.w"] = dec_conv2_.weights();
    file.arrays["dec_conv2.b"] = dec_conv2_.bias();
    save_weights(file, path);
  }

  static ConvAutoencoder load(const std::string& path, std::string id = "ref-ae") {
    WeightFile file = load_weights(path);
    if (file.header.at("kind") != "conv_autoencoder") {
      throw IoError(path + " does not contain a conv_autoencoder");
    }
    ConvAutoencoder ae(file.header.at("channels").get<int>(),
                       file.header.at("seed").get<uint64_t>(), std::move(id));
    ae.enc_conv_.weights() = file.arrays.at("enc_conv.w");
    ae.enc_conv_.bias() = file.arrays.at("enc_conv.b");
    ae.dec_conv1_.weights() = file.arrays.at("dec_conv1.w");
    ae.dec_conv1_.bias() = file.arrays.at("dec_conv1.b");
    ae.dec_conv2_.weights() = file.arrays.at("dec_conv2.w");
    ae.dec_conv2_.bias() = file.arrays.at("dec_conv2.b");
    ae.trained_ = file.header.value("trained", false);
    return ae;
  }

  nn::Tensor padded_input(const Image& image) const {
    nn::Tensor t = nn::image_to_tensor(image);
    if (image.height() % 2 == 0 && image.width() % 2 == 0) return t;
    const int ph = image.height() + image.height() % 2;
    const int pw = image.width() + image.width() % 2;
    nn::Tensor padded(kChannels, ph, pw);
    for (int c = 0; c < kChannels; ++c) {
      for (int y = 0; y < ph; ++y) {
        for (int x = 0; x < pw; ++x) {
          padded.at(c, y, x) =
              t.at(c, std::min(y, image.height() - 1), std::min(x, image.width() - 1));
        }
      }
    }
    return padded;
  }

 private:
  static Image crop_output(const nn::Tensor& t, const Image& like) {
    Image out(like.height(), like.width(), 0.0f, Provenance::kRecovered, like.source_id());
    for (int c = 0; c < kChannels; ++c) {
      for (int y = 0; y < like.height(); ++y) {
        for (int x = 0; x < like.width(); ++x) {
          out.at(c, y, x) = t.at(c, y, x);
        }
      }
    }
    return out;
  }

  int channels_;
  uint64_t seed_;
  std::string id_;
  bool trained_ = false;

  nn::Conv2d enc_conv_;
  nn::Tanh enc_act_;
  nn::AvgPool2 pool_;
  nn::Upsample2 up_;
  nn::Conv2d dec_conv1_;
  nn::Tanh dec_act1_;
  nn::Conv2d dec_conv2_;
  nn::Sigmoid dec_act2_;
};

}  // namespace softprobe
