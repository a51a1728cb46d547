#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "softprobe/error.hpp"
#include "softprobe/image.hpp"

namespace softprobe {

// Face verifier: embeds an image, compares embeddings with cosine similarity.
class IdentityVerifier {
 public:
  virtual ~IdentityVerifier() = default;
  virtual const std::string& id() const = 0;
  virtual int embedding_dim() const = 0;
  virtual std::vector<double> embed(const Image& image) const = 0;
};

// Cosine similarity of the two embeddings in [-1, 1].
// Zero embeddings make the similarity undefined.
inline double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw ContractViolationError("cosine_similarity: embedding dimension mismatch");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na <= 0.0 || nb <= 0.0) {
    throw UndefinedMetricError("cosine similarity undefined for zero embedding");
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double verify(const IdentityVerifier& verifier, const Image& a, const Image& b) {
  return cosine_similarity(verifier.embed(a), verifier.embed(b));
}

// Desk-scale verifier: per-channel means over a grid of cells, centred by
// the global mean so the cosine spread is informative. Stands in for the
// penultimate-layer embeddings of a face recognition network.
class PoolVerifier final : public IdentityVerifier {
 public:
  explicit PoolVerifier(int grid = 4, std::string id = "toy-pool-verifier")
      : grid_(grid), id_(std::move(id)) {
    if (grid < 1) throw ConfigError("verifier grid must be >= 1");
  }

  const std::string& id() const override { return id_; }
  int embedding_dim() const override { return kChannels * grid_ * grid_; }

  std::vector<double> embed(const Image& image) const override {
    std::vector<double> emb(embedding_dim(), 0.0);
    std::vector<int> counts(embedding_dim(), 0);
    for (int c = 0; c < kChannels; ++c) {
      for (int y = 0; y < image.height(); ++y) {
        const int gy = std::min(y * grid_ / image.height(), grid_ - 1);
        for (int x = 0; x < image.width(); ++x) {
          const int gx = std::min(x * grid_ / image.width(), grid_ - 1);
          const int cell = (c * grid_ + gy) * grid_ + gx;
          emb[cell] += image.at(c, y, x);
          counts[cell] += 1;
        }
      }
    }
    double mean = 0.0;
    for (size_t i = 0; i < emb.size(); ++i) {
      emb[i] /= std::max(counts[i], 1);
      mean += emb[i];
    }
    mean /= static_cast<double>(emb.size());
    for (double& v : emb) v -= mean;
    return emb;
  }

 private:
  int grid_;
  std::string id_;
};

}  // namespace softprobe
