#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <utility>
#include <string>
#include <vector>

#include "softprobe/classifier.hpp"
#include "softprobe/error.hpp"
#include "softprobe/image.hpp"
#include "softprobe/metrics.hpp"
#include "softprobe/recovery.hpp"

namespace softprobe {

// Differential distribution scoring: chi-square distance between two
// posteriors, sum_k (p_k - q_k)^2 / (p_k + q_k), skipping empty bins.
// Bounded by 2 for probability vectors.
inline double dds_chi_square(const Posterior& p, const Posterior& q) {
  if (p.size() != q.size()) {
    throw ContractViolationError("dds_chi_square: posterior length mismatch");
  }
  double d = 0.0;
  for (int k = 0; k < p.size(); ++k) {
    const double denom = p[k] + q[k];
    if (denom == 0.0) continue;
    const double diff = p[k] - q[k];
    d += diff * diff / denom;
  }
  return d;
}

// Training-free privacy-enhancement detector: n distinct probers, their
// evidence weights, and the clean-data attribute classifier whose posterior
// shifts are scored.
struct DetectorConfig {
  std::vector<RecoveryPipeline> probers;
  std::vector<double> weights;  // empty -> uniform 1/n
  const AttributeClassifier* classifier = nullptr;

  void validate() const {
    if (probers.empty()) throw ConfigError("detector needs at least one prober");
    if (classifier == nullptr) throw ConfigError("detector needs a classifier");
    for (size_t i = 0; i < probers.size(); ++i) {
      for (size_t j = i + 1; j < probers.size(); ++j) {
        if (probers[i].name == probers[j].name) {
          throw ConfigError("detector probers must be distinct (duplicate '" +
                            probers[i].name + "')");
        }
      }
    }
    if (!weights.empty()) {
      if (weights.size() != probers.size()) {
        throw ConfigError("detector weights/probers size mismatch");
      }
      double max_w = 0.0;
      for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
          throw ConfigError("detector weights must be finite and nonnegative");
        }
        max_w = std::max(max_w, w);
      }
      if (max_w == 0.0) throw ConfigError("at least one detector weight must be positive");
    }
  }

  std::vector<double> effective_weights() const {
    if (!weights.empty()) return weights;
    return std::vector<double>(probers.size(), 1.0 / static_cast<double>(probers.size()));
  }
};

struct DetectionScore {
  std::vector<double> per_prober;  // d_i; meaningless where failed[i]
  std::vector<bool> failed;
  double d_fin = 0.0;

  bool decision_at(double threshold) const { return d_fin >= threshold; }
};

// Steps 1-3 of the detector: recover with each prober, score the posterior
// shift with DDS, aggregate with the weighted linear combination. A failing
// prober is flagged and excluded; the remaining weights are rescaled to the
// original total so scores stay comparable across images.
inline DetectionScore apend_score(
    const Image& image, const DetectorConfig& cfg,
    const std::function<void(const std::string&)>& log_event = {}) {
  cfg.validate();
  const std::vector<double> weights = cfg.effective_weights();
  const Posterior base = cfg.classifier->predict(image);

  DetectionScore score;
  score.per_prober.assign(cfg.probers.size(), 0.0);
  score.failed.assign(cfg.probers.size(), false);

  double total_weight = 0.0, available_weight = 0.0;
  for (double w : weights) total_weight += w;

  for (size_t i = 0; i < cfg.probers.size(); ++i) {
    try {
      const Image recovered = cfg.probers[i].run(image);
      score.per_prober[i] = dds_chi_square(base, cfg.classifier->predict(recovered));
      available_weight += weights[i];
    } catch (const Error& e) {
      score.failed[i] = true;
      if (log_event) {
        log_event("prober '" + cfg.probers[i].name + "' failed on '" + image.source_id() +
                  "': " + e.what());
      }
    }
  }
  if (available_weight <= 0.0) {
    throw ContractViolationError("all detector probers failed for '" + image.source_id() + "'");
  }

  const double rescale = total_weight / available_weight;
  double d_fin = 0.0;
  for (size_t i = 0; i < cfg.probers.size(); ++i) {
    if (!score.failed[i]) d_fin += weights[i] * rescale * score.per_prober[i];
  }
  score.d_fin = d_fin;
  return score;
}

// Weighted product fusion with an external (supervised) detector score:
// apend^alpha * external^(1-alpha). Zero scores are shifted by 1e-9 since
// the product rule is undefined at zero; negative scores are rejected.
inline double fuse_with_supervised(double apend, double external, double alpha = 0.5) {
  if (apend < 0.0 || external < 0.0) {
    throw ContractViolationError("fusion scores must be nonnegative");
  }
  if (alpha < 0.0 || alpha > 1.0) throw ConfigError("fusion alpha must lie in [0, 1]");
  constexpr double kZeroShift = 1e-9;
  if (apend == 0.0) apend = kZeroShift;
  if (external == 0.0) external = kZeroShift;
  return std::pow(apend, alpha) * std::pow(external, 1.0 - alpha);
}

struct DetectorEval {
  double auc = 0.0;
  double eer_threshold = 0.0;
  double eer = 0.0;
};

// Detection AUC plus the equal-error operating point (FPR = FNR), linearly
// interpolated between adjacent score thresholds. Tampered scores are the
// positive class; the decision flags an image when its score >= threshold.
inline DetectorEval evaluate_detector(const std::vector<double>& scores_tampered,
                                      const std::vector<double>& scores_clean) {
  if (scores_tampered.empty() || scores_clean.empty()) {
    throw UndefinedMetricError("evaluate_detector: both score sets must be non-empty");
  }

  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(scores_tampered.size() + scores_clean.size());
  for (double s : scores_tampered) {
    scores.push_back(s);
    labels.push_back(1);
  }
  for (double s : scores_clean) {
    scores.push_back(s);
    labels.push_back(0);
  }

  DetectorEval eval;
  eval.auc = auc(scores, labels);

  // Candidate thresholds from high to low; FPR rises from 0, FNR falls to 0.
  std::vector<double> thresholds = scores;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<double>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const double n_t = static_cast<double>(scores_tampered.size());
  const double n_c = static_cast<double>(scores_clean.size());
  auto rates_at = [&](double t) {
    double fp = 0.0, fn = 0.0;
    for (double s : scores_clean) fp += s >= t ? 1.0 : 0.0;
    for (double s : scores_tampered) fn += s < t ? 1.0 : 0.0;
    return std::pair<double, double>{fp / n_c, fn / n_t};
  };

  double prev_t = thresholds.front() + 1.0;
  auto [prev_fpr, prev_fnr] = rates_at(prev_t);
  for (double t : thresholds) {
    auto [fpr, fnr] = rates_at(t);
    if (fpr >= fnr) {
      const double gap_prev = prev_fnr - prev_fpr;  // >= 0
      const double gap_here = fnr - fpr;            // <= 0
      const double span = gap_prev - gap_here;
      const double lambda = span > 0.0 ? gap_prev / span : 0.0;
      eval.eer_threshold = prev_t + lambda * (t - prev_t);
      const double fpr_i = prev_fpr + lambda * (fpr - prev_fpr);
      const double fnr_i = prev_fnr + lambda * (fnr - prev_fnr);
      eval.eer = 0.5 * (fpr_i + fnr_i);
      return eval;
    }
    prev_t = t;
    prev_fpr = fpr;
    prev_fnr = fnr;
  }
  // FPR never reached FNR even at the lowest threshold (everything flagged).
  eval.eer_threshold = thresholds.back();
  auto [fpr, fnr] = rates_at(thresholds.back());
  eval.eer = 0.5 * (fpr + fnr);
  return eval;
}

}  // namespace softprobe
