#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "softprobe/error.hpp"

namespace softprobe {

enum class Task { kGender, kVerification };
enum class Condition { kOriginal, kEnhanced, kRecovered };

inline const char* to_string(Condition c) {
  switch (c) {
    case Condition::kOriginal:
      return "o";
    case Condition::kEnhanced:
      return "p";
    case Condition::kRecovered:
      return "r";
  }
  return "?";
}

// Scores with binary ground truth for one task under one condition.
struct ScoredOutcomes {
  std::vector<double> scores;
  std::vector<int> labels;  // 0 / 1
  Task task = Task::kGender;
  Condition condition = Condition::kOriginal;

  void validate() const {
    if (scores.size() != labels.size()) {
      throw ContractViolationError("scores/labels length mismatch");
    }
    if (scores.size() < 2) {
      throw UndefinedMetricError("need at least two scored outcomes");
    }
    bool has0 = false, has1 = false;
    for (int l : labels) (l ? has1 : has0) = true;
    if (!has0 || !has1) {
      throw UndefinedMetricError("both classes must be present");
    }
  }
};

// Area under the ROC curve as the exact Mann-Whitney rank statistic:
// P(score_pos > score_neg) + 0.5 * P(score_pos == score_neg).
// Computed via midranks in O(n log n); ties contribute half.
inline double auc(const ScoredOutcomes& outcomes) {
  outcomes.validate();
  const size_t n = outcomes.scores.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return outcomes.scores[a] < outcomes.scores[b];
  });

  double pos_rank_sum = 0.0;
  size_t n_pos = 0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && outcomes.scores[order[j]] == outcomes.scores[order[i]]) ++j;
    // midrank of the tie group [i, j), 1-based ranks
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (size_t k = i; k < j; ++k) {
      if (outcomes.labels[order[k]]) {
        pos_rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const size_t n_neg = n - n_pos;
  return (pos_rank_sum - 0.5 * static_cast<double>(n_pos) * (n_pos + 1)) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

inline double auc(const std::vector<double>& scores, const std::vector<int>& labels,
                  Task task = Task::kGender, Condition cond = Condition::kOriginal) {
  return auc(ScoredOutcomes{scores, labels, task, cond});
}

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

// ROC curve sampled at every distinct score threshold (decision: score >= t),
// plus the two trivial endpoints. For curve export only; AUC uses the exact
// rank statistic above to avoid threshold-grid bias.
inline std::vector<RocPoint> roc_curve(const ScoredOutcomes& outcomes) {
  outcomes.validate();
  const size_t n = outcomes.scores.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return outcomes.scores[a] > outcomes.scores[b];
  });

  double n_pos = 0, n_neg = 0;
  for (int l : outcomes.labels) (l ? n_pos : n_neg) += 1;

  std::vector<RocPoint> curve;
  curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  double tp = 0, fp = 0;
  size_t i = 0;
  while (i < n) {
    const double t = outcomes.scores[order[i]];
    while (i < n && outcomes.scores[order[i]] == t) {
      (outcomes.labels[order[i]] ? tp : fp) += 1;
      ++i;
    }
    curve.push_back({t, fp / n_neg, tp / n_pos});
  }
  return curve;
}

namespace detail {

inline void require_positive_reference(double auc_ref, const char* name) {
  if (!(auc_ref > 0.0)) {
    throw UndefinedMetricError(std::string(name) + " must be positive");
  }
}

// Normalization of the post-enhancement AUC: the inverted regime keeps the
// full value (an inverted ROC still carries attribute information), the
// equalizing regime measures distance above chance.
inline double sr_normalizer(double auc_gp, bool inverted) {
  return inverted ? auc_gp : std::max(auc_gp - 0.5, 0.0);
}

}  // namespace detail

// Gender suppression rate: normalized AUC drop caused by the enhancement,
// in [0, 1] (1 = perfect suppression, 0 = no effect).
inline double suppression_rate(double auc_go, double auc_gp, bool inverted) {
  detail::require_positive_reference(auc_go, "auc_go");
  return std::max((auc_go - detail::sr_normalizer(auc_gp, inverted)) / auc_go, 0.0);
}

// Identity loss: normalized degradation of verification AUC, clamped at 0.
inline double identity_loss(double auc_vo, double auc_vp) {
  detail::require_positive_reference(auc_vo, "auc_vo");
  return std::max((auc_vo - auc_vp) / auc_vo, 0.0);
}

// Privacy-gain identity-loss coefficient. Preconditions sr, il in [0, 1].
inline double pic(double sr, double il) { return sr - il; }

struct ArrResult {
  double value = 0.0;   // clamped to [0, 1]
  bool clamped = false; // raw value exceeded 1 and was clamped
};

// Attribute-recovery robustness: residual AUC gap after recovery, scaled by
// the adjustment factor g (1 when auc_gp <= 0.5, i.e. the inverted-decision
// regime; 2 otherwise). Values above 1 are clamped and flagged; the
// `inverted` flag is carried for reporting and does not change the factor.
inline ArrResult arr_detail(double auc_go, double auc_gp, double auc_gr,
                            [[maybe_unused]] bool inverted = false) {
  detail::require_positive_reference(auc_go, "auc_go");
  const double g = auc_gp <= 0.5 ? 1.0 : 2.0;
  const double raw = g * std::abs(auc_go - auc_gr) / auc_go;
  if (raw > 1.0) return {1.0, true};
  return {raw, false};
}

inline double arr(double auc_go, double auc_gp, double auc_gr, bool inverted = false) {
  return arr_detail(auc_go, auc_gp, auc_gr, inverted).value;
}

struct SplitStats {
  double mean = 0.0;
  std::optional<double> stderr_mean;  // absent when n < 2
};

// Mean and standard error of the mean (sample std with n-1 normalization,
// divided by sqrt(n)) over the per-split values.
inline SplitStats split_statistics(const std::vector<double>& values) {
  if (values.empty()) throw UndefinedMetricError("split_statistics: empty input");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return {mean, std::nullopt};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sample_std = std::sqrt(ss / (n - 1.0));
  return {mean, sample_std / std::sqrt(n)};
}

}  // namespace softprobe
