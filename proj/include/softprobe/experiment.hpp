#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "softprobe/classifier.hpp"
#include "softprobe/detection.hpp"
#include "softprobe/error.hpp"
#include "softprobe/image.hpp"
#include "softprobe/manifest.hpp"
#include "softprobe/metrics.hpp"
#include "softprobe/png_io.hpp"
#include "softprobe/privacy_models.hpp"
#include "softprobe/recovery.hpp"
#include "softprobe/splits.hpp"
#include "softprobe/toy_data.hpp"
#include "softprobe/verifier.hpp"

namespace softprobe {

// A manifest with its images in memory, labels resolved to class indices.
struct LoadedDataset {
  std::string name;
  std::vector<std::string> classes;
  std::vector<Image> images;
  std::vector<ManifestRecord> records;
  std::vector<int> labels;
};

inline LoadedDataset load_dataset(const DatasetManifest& manifest,
                                  std::vector<std::string> classes = {}) {
  LoadedDataset dataset;
  dataset.name = manifest.name;
  if (classes.empty()) {
    std::set<std::string> seen;
    for (const ManifestRecord& r : manifest.records) seen.insert(r.attribute);
    classes.assign(seen.begin(), seen.end());
  }
  dataset.classes = std::move(classes);
  std::map<std::string, int> index;
  for (size_t i = 0; i < dataset.classes.size(); ++i) {
    index[dataset.classes[i]] = static_cast<int>(i);
  }
  for (const ManifestRecord& r : manifest.records) {
    auto it = index.find(r.attribute);
    if (it == index.end()) {
      throw ConfigError("attribute '" + r.attribute + "' not in the configured class set");
    }
    Image img = load_png(r.image_path);
    img = img.with_source_id(std::filesystem::path(r.image_path).stem().string());
    dataset.images.push_back(std::move(img));
    dataset.records.push_back(r);
    dataset.labels.push_back(it->second);
  }
  return dataset;
}

inline LoadedDataset dataset_from_toy(const ToyDataset& toy, std::string name = "toy") {
  LoadedDataset dataset;
  dataset.name = std::move(name);
  dataset.classes = toy.class_names;
  dataset.images = toy.images;
  for (size_t i = 0; i < toy.records.size(); ++i) {
    dataset.records.push_back(
        {toy.images[i].source_id() + ".png", toy.records[i].subject_id,
         toy.class_names[toy.records[i].label], std::nullopt});
    dataset.labels.push_back(toy.records[i].label);
  }
  return dataset;
}

inline DatasetManifest manifest_of(const LoadedDataset& dataset) {
  DatasetManifest manifest;
  manifest.name = dataset.name;
  manifest.records = dataset.records;
  return manifest;
}

// ---------------------------------------------------------------------------
// Robustness experiment

struct SplitMetrics {
  double auc_go = 0.0, auc_gp = 0.0, auc_gr = 0.0;
  double auc_vo = 0.0, auc_vp = 0.0, auc_vr = 0.0;
  double sr = 0.0, il = 0.0, pic = 0.0, arr = 0.0;
  bool arr_clamped = false;
};

struct RobustnessReport {
  std::string prober;
  bool inverted = false;
  std::vector<SplitMetrics> splits;
  SplitStats sr, il, pic, arr;
  std::map<std::string, double> auc_mean;  // keys go/gp/gr/vo/vp/vr
};

struct RobustnessRun {
  std::string dataset;
  std::string privacy_model;
  uint64_t seed = 0;
  std::vector<std::string> classes;
  bool inverted = false;
  std::map<std::string, RobustnessReport> reports;

  struct ImageRecord {
    int split = 0;
    std::string source_id;
    int label = 0;
    // condition -> positive-class posterior; conditions "o", "p", "r:<prober>"
    std::map<std::string, double> scores;
  };
  struct PairRecord {
    int split = 0;
    std::string a, b;
    bool mated = false;
    std::map<std::string, double> scores;
  };
  struct RocRecord {
    std::string task;       // "g" / "v"
    std::string condition;  // "o", "p", "r:<prober>"
    int split = 0;
    std::vector<RocPoint> points;
  };

  std::vector<ImageRecord> image_records;
  std::vector<PairRecord> pair_records;
  std::vector<RocRecord> roc_records;
  std::vector<std::string> failures;
  int completed_images = 0;
};

struct RunOptions {
  std::optional<bool> inverted_override;
  uint64_t seed = 7;
  bool export_roc = true;
};

namespace detail {

inline SplitStats stats_of(const std::vector<SplitMetrics>& splits,
                           double SplitMetrics::* field) {
  std::vector<double> values;
  values.reserve(splits.size());
  for (const SplitMetrics& m : splits) values.push_back(m.*field);
  return split_statistics(values);
}

}  // namespace detail

// Algorithm: for every test image apply the privacy model, attempt recovery
// with each prober, classify under the original / enhanced / recovered
// conditions, run the verification pairs likewise, and derive per-split
// AUCs and the SR / IL / PIC / ARR scores with split statistics.
//
// Verification protocol: the gallery side of a pair stays original; the
// probe side is taken from the evaluated condition.
inline RobustnessRun run_robustness_experiment(
    const LoadedDataset& dataset, const ExperimentSplits& splits, const PrivacyModel& model,
    const AttributeClassifier& classifier, const IdentityVerifier& verifier,
    const std::map<std::string, RecoveryPipeline>& probers, const RunOptions& options = {}) {
  if (dataset.classes.size() < 2) throw ConfigError("robustness run needs >= 2 classes");
  if (probers.empty()) throw ConfigError("robustness run needs at least one prober");
  const int positive_class = 1;

  RobustnessRun run;
  run.dataset = dataset.name;
  run.privacy_model = model.name();
  run.seed = options.seed;
  run.classes = dataset.classes;

  struct ProberSplitScores {
    std::vector<double> gender_scores;
    std::vector<int> gender_labels;
    std::vector<double> ver_scores;
    std::vector<int> ver_labels;
  };
  std::map<std::string, std::vector<SplitMetrics>> per_prober_splits;
  for (const auto& [name, pipeline] : probers) per_prober_splits[name] = {};
  std::optional<bool> inverted_seen;

  for (size_t split_idx = 0; split_idx < splits.test_splits.size(); ++split_idx) {
    const TestSplit& split = splits.test_splits[split_idx];

    // Enhanced + recovered images per record; images whose enhancement
    // fails drop out of every condition and land in the failure log.
    std::map<size_t, Image> enhanced;
    std::map<std::string, std::map<size_t, Image>> recovered;  // prober -> rec -> image
    for (const auto& [name, pipeline] : probers) recovered[name] = {};

    for (size_t rec : split.records) {
      const Image& original = dataset.images[rec];
      try {
        enhanced.emplace(rec, model.enhance(original));
      } catch (const Error& e) {
        run.failures.push_back("enhance failed for '" + original.source_id() +
                               "': " + e.what());
        continue;
      }
    }
    for (const auto& [name, pipeline] : probers) {
      for (const auto& [rec, enh] : enhanced) {
        try {
          recovered[name].emplace(rec, pipeline.run(enh));
        } catch (const Error& e) {
          run.failures.push_back("prober " + name + " failed for '" +
                                 dataset.images[rec].source_id() + "': " + e.what());
        }
      }
    }

    // Gender scores under o / p / r.
    ScoredOutcomes go, gp;
    go.task = gp.task = Task::kGender;
    go.condition = Condition::kOriginal;
    gp.condition = Condition::kEnhanced;
    std::map<std::string, ScoredOutcomes> gr;
    std::map<size_t, RobustnessRun::ImageRecord> image_records;

    for (const auto& [rec, enh] : enhanced) {
      const Image& original = dataset.images[rec];
      const int label = dataset.labels[rec];
      const double score_o = classifier.predict(original)[positive_class];
      const double score_p = classifier.predict(enh)[positive_class];
      go.scores.push_back(score_o);
      go.labels.push_back(label == positive_class ? 1 : 0);
      gp.scores.push_back(score_p);
      gp.labels.push_back(label == positive_class ? 1 : 0);

      RobustnessRun::ImageRecord record;
      record.split = static_cast<int>(split_idx);
      record.source_id = original.source_id();
      record.label = label;
      record.scores["o"] = score_o;
      record.scores["p"] = score_p;
      image_records[rec] = std::move(record);
    }
    for (const auto& [name, images] : recovered) {
      ScoredOutcomes outcomes;
      outcomes.task = Task::kGender;
      outcomes.condition = Condition::kRecovered;
      for (const auto& [rec, img] : images) {
        const double score_r = classifier.predict(img)[positive_class];
        outcomes.scores.push_back(score_r);
        outcomes.labels.push_back(dataset.labels[rec] == positive_class ? 1 : 0);
        image_records[rec].scores["r:" + name] = score_r;
      }
      gr[name] = std::move(outcomes);
    }

    // Verification scores: original gallery embedding against the probe
    // under each condition. Embeddings are cached per condition.
    std::map<size_t, std::vector<double>> emb_o, emb_p;
    std::map<std::string, std::map<size_t, std::vector<double>>> emb_r;
    for (const auto& [rec, enh] : enhanced) {
      emb_o[rec] = verifier.embed(dataset.images[rec]);
      emb_p[rec] = verifier.embed(enh);
    }
    for (const auto& [name, images] : recovered) {
      for (const auto& [rec, img] : images) emb_r[name][rec] = verifier.embed(img);
    }

    ScoredOutcomes vo, vp;
    vo.task = vp.task = Task::kVerification;
    vo.condition = Condition::kOriginal;
    vp.condition = Condition::kEnhanced;
    std::map<std::string, ScoredOutcomes> vr;
    for (const auto& [name, pipeline] : probers) {
      vr[name].task = Task::kVerification;
      vr[name].condition = Condition::kRecovered;
    }

    for (const VerificationPair& pair : split.pairs) {
      if (!enhanced.count(pair.a) || !enhanced.count(pair.b)) continue;
      RobustnessRun::PairRecord record;
      record.split = static_cast<int>(split_idx);
      record.a = dataset.images[pair.a].source_id();
      record.b = dataset.images[pair.b].source_id();
      record.mated = pair.mated;

      const double score_o = cosine_similarity(emb_o[pair.a], emb_o[pair.b]);
      const double score_p = cosine_similarity(emb_o[pair.a], emb_p[pair.b]);
      vo.scores.push_back(score_o);
      vo.labels.push_back(pair.mated ? 1 : 0);
      vp.scores.push_back(score_p);
      vp.labels.push_back(pair.mated ? 1 : 0);
      record.scores["o"] = score_o;
      record.scores["p"] = score_p;

      for (auto& [name, outcomes] : vr) {
        auto& embs = emb_r[name];
        if (!embs.count(pair.b)) continue;
        const double score_r = cosine_similarity(emb_o[pair.a], embs[pair.b]);
        outcomes.scores.push_back(score_r);
        outcomes.labels.push_back(pair.mated ? 1 : 0);
        record.scores["r:" + name] = score_r;
      }
      run.pair_records.push_back(std::move(record));
    }

    const double auc_go = auc(go);
    const double auc_gp = auc(gp);
    const double auc_vo = auc(vo);
    const double auc_vp = auc(vp);
    const bool inverted = options.inverted_override.value_or(auc_gp < 0.5);
    if (!inverted_seen) inverted_seen = inverted;

    if (options.export_roc) {
      run.roc_records.push_back({"g", "o", static_cast<int>(split_idx), roc_curve(go)});
      run.roc_records.push_back({"g", "p", static_cast<int>(split_idx), roc_curve(gp)});
      run.roc_records.push_back({"v", "o", static_cast<int>(split_idx), roc_curve(vo)});
      run.roc_records.push_back({"v", "p", static_cast<int>(split_idx), roc_curve(vp)});
    }

    for (const auto& [name, pipeline] : probers) {
      if (!per_prober_splits.count(name)) continue;  // dropped in an earlier split
      SplitMetrics m;
      m.auc_go = auc_go;
      m.auc_gp = auc_gp;
      m.auc_vo = auc_vo;
      m.auc_vp = auc_vp;
      try {
        m.auc_gr = auc(gr.at(name));
        m.auc_vr = auc(vr.at(name));
      } catch (const UndefinedMetricError& e) {
        // Prober produced too few scorable images in this split; it cannot
        // be reported over all splits, so it is dropped entirely below.
        run.failures.push_back("prober " + name + " unscorable in split " +
                               std::to_string(split_idx) + ": " + e.what());
        per_prober_splits.erase(name);
        continue;
      }
      m.sr = suppression_rate(auc_go, auc_gp, inverted);
      m.il = identity_loss(auc_vo, auc_vp);
      m.pic = pic(m.sr, m.il);
      const ArrResult a = arr_detail(auc_go, auc_gp, m.auc_gr, inverted);
      m.arr = a.value;
      m.arr_clamped = a.clamped;
      per_prober_splits[name].push_back(m);
      if (options.export_roc) {
        run.roc_records.push_back(
            {"g", "r:" + name, static_cast<int>(split_idx), roc_curve(gr.at(name))});
        run.roc_records.push_back(
            {"v", "r:" + name, static_cast<int>(split_idx), roc_curve(vr.at(name))});
      }
    }

    for (auto& [rec, record] : image_records) {
      run.image_records.push_back(std::move(record));
      ++run.completed_images;
    }
  }

  run.inverted = inverted_seen.value_or(false);
  for (const auto& [name, metrics] : per_prober_splits) {
    RobustnessReport report;
    report.prober = name;
    report.inverted = run.inverted;
    report.splits = metrics;
    report.sr = detail::stats_of(metrics, &SplitMetrics::sr);
    report.il = detail::stats_of(metrics, &SplitMetrics::il);
    report.pic = detail::stats_of(metrics, &SplitMetrics::pic);
    report.arr = detail::stats_of(metrics, &SplitMetrics::arr);
    report.auc_mean["go"] = detail::stats_of(metrics, &SplitMetrics::auc_go).mean;
    report.auc_mean["gp"] = detail::stats_of(metrics, &SplitMetrics::auc_gp).mean;
    report.auc_mean["gr"] = detail::stats_of(metrics, &SplitMetrics::auc_gr).mean;
    report.auc_mean["vo"] = detail::stats_of(metrics, &SplitMetrics::auc_vo).mean;
    report.auc_mean["vp"] = detail::stats_of(metrics, &SplitMetrics::auc_vp).mean;
    report.auc_mean["vr"] = detail::stats_of(metrics, &SplitMetrics::auc_vr).mean;
    run.reports[name] = std::move(report);
  }
  return run;
}

// ---------------------------------------------------------------------------
// Detection experiment

struct DetectionSplitResult {
  double auc = 0.0;
  double eer = 0.0;
  double eer_threshold = 0.0;
};

struct DetectionRun {
  std::string dataset;
  std::string privacy_model;
  uint64_t seed = 0;
  std::vector<DetectionSplitResult> splits;
  SplitStats auc_stats, eer_stats;

  struct ScoreRecord {
    int split = 0;
    std::string source_id;
    bool tampered = false;
    double d_fin = 0.0;
  };
  std::vector<ScoreRecord> scores;
  std::vector<std::string> failures;
};

// Black-box detection protocol: score the clean and privacy-enhanced copies
// of every test image with the detector, then report AUC and EER per split.
inline DetectionRun run_detection_experiment(const LoadedDataset& dataset,
                                             const ExperimentSplits& splits,
                                             const PrivacyModel& model,
                                             const DetectorConfig& detector,
                                             const RunOptions& options = {}) {
  detector.validate();
  DetectionRun run;
  run.dataset = dataset.name;
  run.privacy_model = model.name();
  run.seed = options.seed;

  auto log_failure = [&run](const std::string& msg) { run.failures.push_back(msg); };

  for (size_t split_idx = 0; split_idx < splits.test_splits.size(); ++split_idx) {
    std::vector<double> clean_scores, tampered_scores;
    for (size_t rec : splits.test_splits[split_idx].records) {
      const Image& original = dataset.images[rec];
      try {
        const Image enhanced = model.enhance(original);
        const double clean = apend_score(original, detector, log_failure).d_fin;
        const double tampered = apend_score(enhanced, detector, log_failure).d_fin;
        clean_scores.push_back(clean);
        tampered_scores.push_back(tampered);
        run.scores.push_back({static_cast<int>(split_idx), original.source_id(), false, clean});
        run.scores.push_back({static_cast<int>(split_idx), original.source_id(), true, tampered});
      } catch (const Error& e) {
        run.failures.push_back("detection failed for '" + original.source_id() +
                               "': " + e.what());
      }
    }
    const DetectorEval eval = evaluate_detector(tampered_scores, clean_scores);
    run.splits.push_back({eval.auc, eval.eer, eval.eer_threshold});
  }

  std::vector<double> aucs, eers;
  for (const DetectionSplitResult& r : run.splits) {
    aucs.push_back(r.auc);
    eers.push_back(r.eer);
  }
  run.auc_stats = split_statistics(aucs);
  run.eer_stats = split_statistics(eers);
  return run;
}

// ---------------------------------------------------------------------------
// Report emission and reload

namespace detail {

inline nlohmann::json stats_json(const SplitStats& stats) {
  nlohmann::json j;
  j["mean"] = stats.mean;
  if (stats.stderr_mean) {
    j["stderr"] = *stats.stderr_mean;
  } else {
    j["stderr"] = nullptr;
  }
  return j;
}

}  // namespace detail

inline nlohmann::json report_to_json(const RobustnessReport& report) {
  nlohmann::json j;
  j["prober"] = report.prober;
  j["inverted"] = report.inverted;
  nlohmann::json splits = nlohmann::json::array();
  for (const SplitMetrics& m : report.splits) {
    nlohmann::json s;
    s["auc_go"] = m.auc_go;
    s["auc_gp"] = m.auc_gp;
    s["auc_gr"] = m.auc_gr;
    s["auc_vo"] = m.auc_vo;
    s["auc_vp"] = m.auc_vp;
    s["auc_vr"] = m.auc_vr;
    s["sr"] = m.sr;
    s["il"] = m.il;
    s["pic"] = m.pic;
    s["arr"] = m.arr;
    s["arr_clamped"] = m.arr_clamped;
    splits.push_back(std::move(s));
  }
  j["splits"] = std::move(splits);
  j["auc"] = report.auc_mean;
  j["sr"] = detail::stats_json(report.sr);
  j["il"] = detail::stats_json(report.il);
  j["pic"] = detail::stats_json(report.pic);
  j["arr"] = detail::stats_json(report.arr);
  return j;
}

inline nlohmann::json run_to_json(const RobustnessRun& run) {
  nlohmann::json j;
  j["dataset"] = run.dataset;
  j["privacy_model"] = run.privacy_model;
  j["seed"] = run.seed;
  j["classes"] = run.classes;
  j["inverted"] = run.inverted;
  j["completed_images"] = run.completed_images;
  j["failures"] = run.failures;
  nlohmann::json probers;
  for (const auto& [name, report] : run.reports) probers[name] = report_to_json(report);
  j["probers"] = std::move(probers);
  return j;
}

inline RobustnessReport report_from_json(const nlohmann::json& j) {
  RobustnessReport report;
  report.prober = j.at("prober").get<std::string>();
  report.inverted = j.at("inverted").get<bool>();
  for (const auto& s : j.at("splits")) {
    SplitMetrics m;
    m.auc_go = s.at("auc_go").get<double>();
    m.auc_gp = s.at("auc_gp").get<double>();
    m.auc_gr = s.at("auc_gr").get<double>();
    m.auc_vo = s.at("auc_vo").get<double>();
    m.auc_vp = s.at("auc_vp").get<double>();
    m.auc_vr = s.at("auc_vr").get<double>();
    m.sr = s.at("sr").get<double>();
    m.il = s.at("il").get<double>();
    m.pic = s.at("pic").get<double>();
    m.arr = s.at("arr").get<double>();
    m.arr_clamped = s.at("arr_clamped").get<bool>();
    report.splits.push_back(m);
  }
  for (auto it = j.at("auc").begin(); it != j.at("auc").end(); ++it) {
    report.auc_mean[it.key()] = it.value().get<double>();
  }
  auto stats = [](const nlohmann::json& s) {
    SplitStats st;
    st.mean = s.at("mean").get<double>();
    if (!s.at("stderr").is_null()) st.stderr_mean = s.at("stderr").get<double>();
    return st;
  };
  report.sr = stats(j.at("sr"));
  report.il = stats(j.at("il"));
  report.pic = stats(j.at("pic"));
  report.arr = stats(j.at("arr"));
  return report;
}

inline RobustnessRun run_from_json(const nlohmann::json& j) {
  RobustnessRun run;
  run.dataset = j.at("dataset").get<std::string>();
  run.privacy_model = j.at("privacy_model").get<std::string>();
  run.seed = j.at("seed").get<uint64_t>();
  run.classes = j.at("classes").get<std::vector<std::string>>();
  run.inverted = j.at("inverted").get<bool>();
  run.completed_images = j.at("completed_images").get<int>();
  run.failures = j.at("failures").get<std::vector<std::string>>();
  for (auto it = j.at("probers").begin(); it != j.at("probers").end(); ++it) {
    run.reports[it.key()] = report_from_json(it.value());
  }
  return run;
}

// Recomputes every derived metric of the report from its stored AUCs and
// checks bit-exact agreement; used by the report reload path.
inline bool recompute_matches(const RobustnessReport& report) {
  std::vector<double> srs, ils, pics, arrs;
  for (const SplitMetrics& m : report.splits) {
    const double sr = suppression_rate(m.auc_go, m.auc_gp, report.inverted);
    const double il = identity_loss(m.auc_vo, m.auc_vp);
    const double pc = pic(sr, il);
    const double ar = arr(m.auc_go, m.auc_gp, m.auc_gr, report.inverted);
    if (sr != m.sr || il != m.il || pc != m.pic || ar != m.arr) return false;
    srs.push_back(sr);
    ils.push_back(il);
    pics.push_back(pc);
    arrs.push_back(ar);
  }
  auto same = [](const SplitStats& a, const SplitStats& b) {
    return a.mean == b.mean && a.stderr_mean == b.stderr_mean;
  };
  return same(split_statistics(srs), report.sr) && same(split_statistics(ils), report.il) &&
         same(split_statistics(pics), report.pic) && same(split_statistics(arrs), report.arr);
}

// Writes report.json, per-image and per-pair score CSVs, consolidated ROC
// curves and the delta-AUC scatter data. Refuses to write anything for an
// empty run.
inline void emit_reports(const RobustnessRun& run, const std::string& out_dir) {
  if (run.reports.empty() || run.image_records.empty()) {
    throw ContractViolationError("emit_reports: empty record set");
  }
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  {
    std::ofstream out(fs::path(out_dir) / "report.json");
    if (!out) throw IoError("cannot write report.json under " + out_dir);
    out << run_to_json(run).dump(2) << '\n';
  }
  {
    std::ofstream out(fs::path(out_dir) / "image_scores.csv");
    out << "split,source_id,label,condition,score\n";
    for (const auto& record : run.image_records) {
      for (const auto& [condition, score] : record.scores) {
        out << record.split << ',' << record.source_id << ',' << record.label << ','
            << condition << ',' << nlohmann::json(score).dump() << '\n';
      }
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "pair_scores.csv");
    out << "split,a,b,mated,condition,score\n";
    for (const auto& record : run.pair_records) {
      for (const auto& [condition, score] : record.scores) {
        out << record.split << ',' << record.a << ',' << record.b << ',' << (record.mated ? 1 : 0)
            << ',' << condition << ',' << nlohmann::json(score).dump() << '\n';
      }
    }
  }
  if (!run.roc_records.empty()) {
    std::ofstream out(fs::path(out_dir) / "roc_curves.csv");
    out << "task,condition,split,threshold,fpr,tpr\n";
    for (const auto& roc : run.roc_records) {
      for (const RocPoint& p : roc.points) {
        out << roc.task << ',' << roc.condition << ',' << roc.split << ','
            << nlohmann::json(p.threshold).dump() << ',' << nlohmann::json(p.fpr).dump() << ','
            << nlohmann::json(p.tpr).dump() << '\n';
      }
    }
  }
  {
    // delta AUC axes: x = auc_vo - auc_vr, y = auc_go - auc_gr.
    std::ofstream out(fs::path(out_dir) / "delta_auc.csv");
    out << "prober,split,delta_auc_v,delta_auc_g\n";
    for (const auto& [name, report] : run.reports) {
      for (size_t k = 0; k < report.splits.size(); ++k) {
        const SplitMetrics& m = report.splits[k];
        out << name << ',' << k << ',' << nlohmann::json(m.auc_vo - m.auc_vr).dump() << ','
            << nlohmann::json(m.auc_go - m.auc_gr).dump() << '\n';
      }
    }
  }
}

inline nlohmann::json detection_run_to_json(const DetectionRun& run) {
  nlohmann::json j;
  j["dataset"] = run.dataset;
  j["privacy_model"] = run.privacy_model;
  j["seed"] = run.seed;
  nlohmann::json splits = nlohmann::json::array();
  for (const DetectionSplitResult& s : run.splits) {
    nlohmann::json sj;
    sj["auc"] = s.auc;
    sj["eer"] = s.eer;
    sj["eer_threshold"] = s.eer_threshold;
    splits.push_back(std::move(sj));
  }
  j["splits"] = std::move(splits);
  j["auc"] = detail::stats_json(run.auc_stats);
  j["eer"] = detail::stats_json(run.eer_stats);
  j["failures"] = run.failures;
  return j;
}

inline void emit_detection_report(const DetectionRun& run, const std::string& out_dir) {
  if (run.splits.empty()) throw ContractViolationError("emit_detection_report: empty run");
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "detection_report.json");
    if (!out) throw IoError("cannot write detection_report.json under " + out_dir);
    out << detection_run_to_json(run).dump(2) << '\n';
  }
  {
    std::ofstream out(fs::path(out_dir) / "detection_scores.csv");
    out << "split,source_id,tampered,d_fin\n";
    for (const auto& s : run.scores) {
      out << s.split << ',' << s.source_id << ',' << (s.tampered ? 1 : 0) << ','
          << nlohmann::json(s.d_fin).dump() << '\n';
    }
  }
}

}  // namespace softprobe
