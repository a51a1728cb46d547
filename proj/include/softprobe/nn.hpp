#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "softprobe/error.hpp"
#include "softprobe/image.hpp"

// Minimal dense/conv layers with manual backprop. Desk-scale only: the
// toolkit's trainable backends (autoencoder, toy classifiers, synthesis
// model) run on small images where plain loops are fast enough.
namespace softprobe::nn {

struct Tensor {
  int c = 0, h = 0, w = 0;
  std::vector<float> v;

  Tensor() = default;
  Tensor(int c_, int h_, int w_, float fill = 0.0f)
      : c(c_), h(h_), w(w_), v(static_cast<size_t>(c_) * h_ * w_, fill) {}

  float at(int ci, int y, int x) const {
    return v[(static_cast<size_t>(ci) * h + y) * w + x];
  }
  float& at(int ci, int y, int x) {
    return v[(static_cast<size_t>(ci) * h + y) * w + x];
  }
  size_t size() const { return v.size(); }
};

inline Tensor image_to_tensor(const Image& img) {
  Tensor t(kChannels, img.height(), img.width());
  t.v = img.data();
  return t;
}

inline Image tensor_to_image(const Tensor& t, Provenance prov, const std::string& source_id) {
  if (t.c != kChannels) throw ContractViolationError("tensor is not 3-channel");
  return Image(t.h, t.w, t.v, prov, source_id);
}

// Adam state for one parameter buffer.
class Adam {
 public:
  void step(std::vector<float>& params, std::vector<float>& grads, float lr) {
    if (m_.size() != params.size()) {
      m_.assign(params.size(), 0.0f);
      v_.assign(params.size(), 0.0f);
      t_ = 0;
    }
    ++t_;
    const float b1 = 0.9f, b2 = 0.999f, eps = 1e-8f;
    const float corr1 = 1.0f - std::pow(b1, static_cast<float>(t_));
    const float corr2 = 1.0f - std::pow(b2, static_cast<float>(t_));
    for (size_t i = 0; i < params.size(); ++i) {
      m_[i] = b1 * m_[i] + (1.0f - b1) * grads[i];
      v_[i] = b2 * v_[i] + (1.0f - b2) * grads[i] * grads[i];
      params[i] -= lr * (m_[i] / corr1) / (std::sqrt(v_[i] / corr2) + eps);
      grads[i] = 0.0f;
    }
  }

 private:
  std::vector<float> m_, v_;
  int64_t t_ = 0;
};

// 3x3 (or kxk, odd k) same-padding convolution.
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(int in_c, int out_c, int k, std::mt19937_64& rng)
      : in_c_(in_c), out_c_(out_c), k_(k) {
    if (k % 2 == 0) throw ConfigError("Conv2d kernel size must be odd");
    const float scale = std::sqrt(2.0f / (in_c * k * k));
    std::normal_distribution<float> dist(0.0f, scale);
    w_.resize(static_cast<size_t>(out_c) * in_c * k * k);
    for (float& x : w_) x = dist(rng);
    b_.assign(out_c, 0.0f);
    dw_.assign(w_.size(), 0.0f);
    db_.assign(b_.size(), 0.0f);
  }

  Tensor forward(const Tensor& in) {
    in_cache_ = in;
    const int pad = k_ / 2;
    Tensor out(out_c_, in.h, in.w);
    for (int oc = 0; oc < out_c_; ++oc) {
      for (int y = 0; y < in.h; ++y) {
        for (int x = 0; x < in.w; ++x) {
          float acc = b_[oc];
          for (int ic = 0; ic < in_c_; ++ic) {
            for (int ky = 0; ky < k_; ++ky) {
              const int yy = y + ky - pad;
              if (yy < 0 || yy >= in.h) continue;
              for (int kx = 0; kx < k_; ++kx) {
                const int xx = x + kx - pad;
                if (xx < 0 || xx >= in.w) continue;
                acc += weight(oc, ic, ky, kx) * in.at(ic, yy, xx);
              }
            }
          }
          out.at(oc, y, x) = acc;
        }
      }
    }
    return out;
  }

  Tensor backward(const Tensor& gout) {
    const Tensor& in = in_cache_;
    const int pad = k_ / 2;
    Tensor gin(in_c_, in.h, in.w);
    for (int oc = 0; oc < out_c_; ++oc) {
      for (int y = 0; y < in.h; ++y) {
        for (int x = 0; x < in.w; ++x) {
          const float g = gout.at(oc, y, x);
          db_[oc] += g;
          for (int ic = 0; ic < in_c_; ++ic) {
            for (int ky = 0; ky < k_; ++ky) {
              const int yy = y + ky - pad;
              if (yy < 0 || yy >= in.h) continue;
              for (int kx = 0; kx < k_; ++kx) {
                const int xx = x + kx - pad;
                if (xx < 0 || xx >= in.w) continue;
                grad_weight(oc, ic, ky, kx) += g * in.at(ic, yy, xx);
                gin.at(ic, yy, xx) += g * weight(oc, ic, ky, kx);
              }
            }
          }
        }
      }
    }
    return gin;
  }

  void adam_step(float lr) {
    opt_w_.step(w_, dw_, lr);
    opt_b_.step(b_, db_, lr);
  }

  void sgd_step(float lr) {
    for (size_t i = 0; i < w_.size(); ++i) {
      w_[i] -= lr * dw_[i];
      dw_[i] = 0.0f;
    }
    for (size_t i = 0; i < b_.size(); ++i) {
      b_[i] -= lr * db_[i];
      db_[i] = 0.0f;
    }
  }

  std::vector<float>& weights() { return w_; }
  std::vector<float>& bias() { return b_; }
  const std::vector<float>& weights() const { return w_; }
  const std::vector<float>& bias() const { return b_; }
  int in_channels() const { return in_c_; }
  int out_channels() const { return out_c_; }
  int kernel() const { return k_; }

 private:
  float& weight(int oc, int ic, int ky, int kx) {
    return w_[((static_cast<size_t>(oc) * in_c_ + ic) * k_ + ky) * k_ + kx];
  }
  float weight(int oc, int ic, int ky, int kx) const {
    return w_[((static_cast<size_t>(oc) * in_c_ + ic) * k_ + ky) * k_ + kx];
  }
  float& grad_weight(int oc, int ic, int ky, int kx) {
    return dw_[((static_cast<size_t>(oc) * in_c_ + ic) * k_ + ky) * k_ + kx];
  }

  int in_c_ = 0, out_c_ = 0, k_ = 3;
  std::vector<float> w_, b_, dw_, db_;
  Adam opt_w_, opt_b_;
  Tensor in_cache_;
};

class Tanh {
 public:
  Tensor forward(const Tensor& in) {
    out_ = in;
    for (float& x : out_.v) x = std::tanh(x);
    return out_;
  }
  Tensor backward(const Tensor& gout) {
    Tensor gin = gout;
    for (size_t i = 0; i < gin.v.size(); ++i) {
      gin.v[i] *= 1.0f - out_.v[i] * out_.v[i];
    }
    return gin;
  }

 private:
  Tensor out_;
};

class Sigmoid {
 public:
  Tensor forward(const Tensor& in) {
    out_ = in;
    for (float& x : out_.v) x = 1.0f / (1.0f + std::exp(-x));
    return out_;
  }
  Tensor backward(const Tensor& gout) {
    Tensor gin = gout;
    for (size_t i = 0; i < gin.v.size(); ++i) {
      gin.v[i] *= out_.v[i] * (1.0f - out_.v[i]);
    }
    return gin;
  }

 private:
  Tensor out_;
};

// 2x2 average pooling, stride 2. Requires even input dims.
class AvgPool2 {
 public:
  Tensor forward(const Tensor& in) {
    if (in.h % 2 || in.w % 2) throw ContractViolationError("AvgPool2 needs even dims");
    in_h_ = in.h;
    in_w_ = in.w;
    Tensor out(in.c, in.h / 2, in.w / 2);
    for (int c = 0; c < in.c; ++c) {
      for (int y = 0; y < out.h; ++y) {
        for (int x = 0; x < out.w; ++x) {
          out.at(c, y, x) = 0.25f * (in.at(c, 2 * y, 2 * x) + in.at(c, 2 * y, 2 * x + 1) +
                                     in.at(c, 2 * y + 1, 2 * x) + in.at(c, 2 * y + 1, 2 * x + 1));
        }
      }
    }
    return out;
  }
  Tensor backward(const Tensor& gout) {
    Tensor gin(gout.c, in_h_, in_w_);
    for (int c = 0; c < gout.c; ++c) {
      for (int y = 0; y < gout.h; ++y) {
        for (int x = 0; x < gout.w; ++x) {
          const float g = 0.25f * gout.at(c, y, x);
          gin.at(c, 2 * y, 2 * x) = g;
          gin.at(c, 2 * y, 2 * x + 1) = g;
          gin.at(c, 2 * y + 1, 2 * x) = g;
          gin.at(c, 2 * y + 1, 2 * x + 1) = g;
        }
      }
    }
    return gin;
  }

 private:
  int in_h_ = 0, in_w_ = 0;
};

// Nearest-neighbour 2x upsampling.
class Upsample2 {
 public:
  Tensor forward(const Tensor& in) {
    Tensor out(in.c, in.h * 2, in.w * 2);
    for (int c = 0; c < in.c; ++c) {
      for (int y = 0; y < out.h; ++y) {
        for (int x = 0; x < out.w; ++x) {
          out.at(c, y, x) = in.at(c, y / 2, x / 2);
        }
      }
    }
    return out;
  }
  Tensor backward(const Tensor& gout) {
    Tensor gin(gout.c, gout.h / 2, gout.w / 2);
    for (int c = 0; c < gout.c; ++c) {
      for (int y = 0; y < gout.h; ++y) {
        for (int x = 0; x < gout.w; ++x) {
          gin.at(c, y / 2, x / 2) += gout.at(c, y, x);
        }
      }
    }
    return gin;
  }
};

// Fully connected layer on flat vectors.
class Dense {
 public:
  Dense() = default;
  Dense(int in_dim, int out_dim, std::mt19937_64& rng, float init_sigma = -1.0f)
      : in_dim_(in_dim), out_dim_(out_dim) {
    const float scale = init_sigma > 0.0f ? init_sigma : std::sqrt(1.0f / in_dim);
    std::normal_distribution<float> dist(0.0f, scale);
    w_.resize(static_cast<size_t>(out_dim) * in_dim);
    for (float& x : w_) x = dist(rng);
    b_.assign(out_dim, 0.0f);
    dw_.assign(w_.size(), 0.0f);
    db_.assign(b_.size(), 0.0f);
  }

  // Stateless application; usable from const contexts and concurrent readers.
  std::vector<float> apply(const std::vector<float>& in) const {
    if (static_cast<int>(in.size()) != in_dim_) {
      throw ContractViolationError("Dense: input size mismatch");
    }
    std::vector<float> out(out_dim_);
    for (int o = 0; o < out_dim_; ++o) {
      float acc = b_[o];
      const float* row = w_.data() + static_cast<size_t>(o) * in_dim_;
      for (int i = 0; i < in_dim_; ++i) acc += row[i] * in[i];
      out[o] = acc;
    }
    return out;
  }

  std::vector<float> forward(const std::vector<float>& in) {
    in_cache_ = in;
    return apply(in);
  }

  std::vector<float> backward(const std::vector<float>& gout) {
    std::vector<float> gin(in_dim_, 0.0f);
    for (int o = 0; o < out_dim_; ++o) {
      const float g = gout[o];
      db_[o] += g;
      float* drow = dw_.data() + static_cast<size_t>(o) * in_dim_;
      const float* row = w_.data() + static_cast<size_t>(o) * in_dim_;
      for (int i = 0; i < in_dim_; ++i) {
        drow[i] += g * in_cache_[i];
        gin[i] += g * row[i];
      }
    }
    return gin;
  }

  // Gradient of a fixed linear combination of outputs w.r.t. the input,
  // independent of any cached activation.
  std::vector<float> input_gradient(const std::vector<float>& out_coeffs) const {
    std::vector<float> gin(in_dim_, 0.0f);
    for (int o = 0; o < out_dim_; ++o) {
      const float g = out_coeffs[o];
      if (g == 0.0f) continue;
      const float* row = w_.data() + static_cast<size_t>(o) * in_dim_;
      for (int i = 0; i < in_dim_; ++i) gin[i] += g * row[i];
    }
    return gin;
  }

  void add_l2_to_grads(float l2) {
    if (l2 <= 0.0f) return;
    for (size_t i = 0; i < w_.size(); ++i) dw_[i] += l2 * w_[i];
  }

  void adam_step(float lr) {
    opt_w_.step(w_, dw_, lr);
    opt_b_.step(b_, db_, lr);
  }

  void sgd_step(float lr) {
    for (size_t i = 0; i < w_.size(); ++i) {
      w_[i] -= lr * dw_[i];
      dw_[i] = 0.0f;
    }
    for (size_t i = 0; i < b_.size(); ++i) {
      b_[i] -= lr * db_[i];
      db_[i] = 0.0f;
    }
  }

  std::vector<float>& weights() { return w_; }
  std::vector<float>& bias() { return b_; }
  const std::vector<float>& weights() const { return w_; }
  const std::vector<float>& bias() const { return b_; }
  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }

 private:
  int in_dim_ = 0, out_dim_ = 0;
  std::vector<float> w_, b_, dw_, db_;
  Adam opt_w_, opt_b_;
  std::vector<float> in_cache_;
};

inline std::vector<double> softmax(const std::vector<float>& logits) {
  double mx = logits.empty() ? 0.0 : logits[0];
  for (float z : logits) mx = std::max(mx, static_cast<double>(z));
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(static_cast<double>(logits[i]) - mx);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

}  // namespace softprobe::nn
