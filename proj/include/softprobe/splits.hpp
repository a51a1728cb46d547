#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "softprobe/error.hpp"
#include "softprobe/manifest.hpp"

namespace softprobe {

struct SplitPolicy {
  double test_fraction = 0.5;        // fraction of (balanced) subjects held out for testing
  int k = 4;                         // number of test splits
  int min_images_per_subject = 2;    // required for mated pairs in test
  size_t max_nonmated_per_split = 50000;
  bool exhaustive_nonmated = false;  // ignore the cap
  uint64_t seed = 7;
};

struct VerificationPair {
  size_t a = 0;  // record indices into the manifest
  size_t b = 0;
  bool mated = false;
};

struct TestSplit {
  std::vector<size_t> records;
  std::vector<VerificationPair> pairs;
};

struct ExperimentSplits {
  std::vector<size_t> train_records;
  std::vector<TestSplit> test_splits;
  std::vector<std::string> train_subjects;
};

namespace detail {

struct SubjectGroup {
  std::string subject_id;
  int label = 0;
  std::vector<size_t> records;
};

}  // namespace detail

// Builds class-balanced, subject-disjoint train/test splits with the test
// subjects partitioned into k splits. Class balance is enforced at the
// subject level by randomly excluding subjects of the larger class. Mated
// pairs are all within-subject pairs inside a split; non-mated pairs are all
// cross-subject pairs, capped by seeded sampling unless exhaustive mode is
// requested. Deterministic for a fixed seed.
inline ExperimentSplits build_splits(const DatasetManifest& manifest,
                                     const std::vector<std::string>& classes,
                                     const SplitPolicy& policy) {
  if (classes.size() < 2) throw ConfigError("build_splits: need at least two classes");
  if (policy.k < 1) throw ConfigError("build_splits: k must be >= 1");

  std::map<std::string, int> class_index;
  for (size_t i = 0; i < classes.size(); ++i) class_index[classes[i]] = static_cast<int>(i);

  // Group records by subject; a subject must carry a single attribute.
  std::map<std::string, detail::SubjectGroup> by_subject;
  for (size_t i = 0; i < manifest.records.size(); ++i) {
    const ManifestRecord& r = manifest.records[i];
    auto label_it = class_index.find(r.attribute);
    if (label_it == class_index.end()) {
      throw ConfigError("record attribute '" + r.attribute + "' not in the configured classes");
    }
    auto [it, inserted] = by_subject.try_emplace(r.subject_id);
    if (inserted) {
      it->second.subject_id = r.subject_id;
      it->second.label = label_it->second;
    } else if (it->second.label != label_it->second) {
      throw ConfigError("subject '" + r.subject_id + "' has inconsistent attribute labels");
    }
    it->second.records.push_back(i);
  }

  std::vector<std::vector<detail::SubjectGroup>> per_class(classes.size());
  for (auto& [id, group] : by_subject) per_class[group.label].push_back(group);

  std::mt19937_64 rng(policy.seed);

  // Balance subject counts (+-0) by seeded exclusion from the larger class.
  size_t balanced = std::numeric_limits<size_t>::max();
  for (const auto& group : per_class) balanced = std::min(balanced, group.size());
  if (balanced < 2) {
    throw ConfigError("build_splits: need at least 2 subjects per class");
  }
  for (auto& group : per_class) {
    std::shuffle(group.begin(), group.end(), rng);
    group.resize(balanced);
    // Deterministic order for the subsequent test/train assignment.
    std::sort(group.begin(), group.end(),
              [](const auto& a, const auto& b) { return a.subject_id < b.subject_id; });
  }

  // Test subjects need enough images for mated pairs.
  ExperimentSplits splits;
  splits.test_splits.resize(policy.k);
  for (auto& group : per_class) {
    std::vector<detail::SubjectGroup> eligible, ineligible;
    for (auto& subject : group) {
      (static_cast<int>(subject.records.size()) >= policy.min_images_per_subject ? eligible
                                                                                 : ineligible)
          .push_back(subject);
    }
    size_t n_test = static_cast<size_t>(std::lround(balanced * policy.test_fraction));
    n_test = std::min(n_test, eligible.size());
    if (n_test < static_cast<size_t>(policy.k)) {
      throw ConfigError("build_splits: class '" + classes[&group - per_class.data()] +
                        "' has too few eligible test subjects (" + std::to_string(n_test) +
                        ") for " + std::to_string(policy.k) + " splits");
    }
    std::shuffle(eligible.begin(), eligible.end(), rng);
    for (size_t i = 0; i < eligible.size(); ++i) {
      if (i < n_test) {
        // Round-robin assignment keeps every split populated by both classes.
        TestSplit& split = splits.test_splits[i % policy.k];
        for (size_t rec : eligible[i].records) split.records.push_back(rec);
      } else {
        for (size_t rec : eligible[i].records) splits.train_records.push_back(rec);
        splits.train_subjects.push_back(eligible[i].subject_id);
      }
    }
    for (auto& subject : ineligible) {
      for (size_t rec : subject.records) splits.train_records.push_back(rec);
      splits.train_subjects.push_back(subject.subject_id);
    }
  }
  std::sort(splits.train_records.begin(), splits.train_records.end());
  std::sort(splits.train_subjects.begin(), splits.train_subjects.end());

  // Verification pairs per split.
  for (TestSplit& split : splits.test_splits) {
    std::sort(split.records.begin(), split.records.end());
    std::vector<VerificationPair> nonmated;
    for (size_t i = 0; i < split.records.size(); ++i) {
      for (size_t j = i + 1; j < split.records.size(); ++j) {
        const size_t a = split.records[i], b = split.records[j];
        const bool mated =
            manifest.records[a].subject_id == manifest.records[b].subject_id;
        if (mated) {
          split.pairs.push_back({a, b, true});
        } else {
          nonmated.push_back({a, b, false});
        }
      }
    }
    if (!policy.exhaustive_nonmated && nonmated.size() > policy.max_nonmated_per_split) {
      std::shuffle(nonmated.begin(), nonmated.end(), rng);
      nonmated.resize(policy.max_nonmated_per_split);
      std::sort(nonmated.begin(), nonmated.end(), [](const auto& x, const auto& y) {
        return x.a != y.a ? x.a < y.a : x.b < y.b;
      });
    }
    split.pairs.insert(split.pairs.end(), nonmated.begin(), nonmated.end());
  }

  // Invariant checks: subject disjointness and class coverage per split.
  std::set<std::string> train_set(splits.train_subjects.begin(), splits.train_subjects.end());
  for (const TestSplit& split : splits.test_splits) {
    std::set<int> labels_seen;
    for (size_t rec : split.records) {
      const ManifestRecord& r = manifest.records[rec];
      if (train_set.count(r.subject_id)) {
        throw ContractViolationError("subject '" + r.subject_id +
                                     "' appears in both train and test");
      }
      labels_seen.insert(class_index.at(r.attribute));
    }
    if (labels_seen.size() < classes.size()) {
      throw ConfigError("a test split is missing one of the attribute classes");
    }
  }
  return splits;
}

}  // namespace softprobe
