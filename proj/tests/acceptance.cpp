// Acceptance suite: one pass/fail line per criterion. Criteria 6-8 share a
// single toy experiment context (trained models and backends); criterion 9
// exercises the file-backed evaluate path end to end.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "softprobe/autoencoder.hpp"
#include "softprobe/classifier.hpp"
#include "softprobe/config.hpp"
#include "softprobe/denoise.hpp"
#include "softprobe/detection.hpp"
#include "softprobe/experiment.hpp"
#include "softprobe/face_parse.hpp"
#include "softprobe/inpaint.hpp"
#include "softprobe/mask_schedule.hpp"
#include "softprobe/metrics.hpp"
#include "softprobe/privacy_models.hpp"
#include "softprobe/recovery.hpp"
#include "softprobe/toy_data.hpp"
#include "softprobe/verifier.hpp"

using namespace softprobe;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::chrono::steady_clock::time_point g_start;

void report(int criterion, const char* label, bool pass, const std::string& detail) {
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - g_start).count();
  std::printf("[%s] criterion %2d: %-28s %s (t=%.1fs)\n", pass ? "PASS" : "FAIL", criterion,
              label, detail.c_str(), elapsed);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// --------------------------------------------------------------------------
// 1. PIC reproduces the published reference rows within +-0.001.

void criterion_1() {
  struct Row {
    const char* label;
    double sr, il, pic_printed;
  };
  const Row rows[] = {
      {"k-AAP/MUCT", 0.668, 0.004, 0.664},      {"k-AAP/Adience", 0.822, 0.133, 0.688},
      {"FGSM/MUCT", 0.766, 0.000, 0.766},       {"FGSM/Adience", 0.712, 0.014, 0.698},
      {"FlowSAN-3/MUCT", 0.707, 0.005, 0.702},  {"FlowSAN-3/Adience", 0.794, 0.073, 0.721},
      {"FlowSAN-5/MUCT", 0.732, 0.023, 0.709},  {"FlowSAN-5/Adience", 0.812, 0.169, 0.643},
      {"PrivacyNet/MUCT", 0.711, 0.000, 0.711}, {"PrivacyNet/Adience", 0.959, 0.010, 0.949},
  };
  bool pass = true;
  std::string worst;
  double worst_err = 0.0;
  for (const Row& row : rows) {
    const double err = std::abs(pic(row.sr, row.il) - row.pic_printed);
    // +-0.001 on three-decimal table values; 1e-12 absorbs representation error
    if (err > 0.001 + 1e-12) pass = false;
    if (err > worst_err) {
      worst_err = err;
      worst = row.label;
    }
  }
  report(1, "PIC vs reference rows", pass,
         "10 rows, max |error| " + fmt(worst_err) + " (" + worst + ")");
}

// --------------------------------------------------------------------------
// 2. Default schedule: exactly 1,156 masks, full 224x224 coverage.

void criterion_2() {
  const MaskSchedule schedule = build_schedule(ChessPatternConfig::default_224());
  const int min_cov = *std::min_element(schedule.coverage.begin(), schedule.coverage.end());
  const bool pass = schedule.size() == 1156 && min_cov >= 1;
  report(2, "default mask count", pass,
         "N=" + std::to_string(schedule.size()) + ", min coverage " + std::to_string(min_cov));
}

// --------------------------------------------------------------------------
// 3. AUC equals the brute-force pairwise statistic on 1,000 random instances.

double auc_bruteforce(const std::vector<double>& scores, const std::vector<int>& labels) {
  double acc = 0.0;
  size_t n_pos = 0, n_neg = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) {
      ++n_neg;
      continue;
    }
    ++n_pos;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      if (scores[i] > scores[j]) acc += 1.0;
      else if (scores[i] == scores[j]) acc += 0.5;
    }
  }
  return acc / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

void criterion_3() {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> score_dist(0.0, 1.0);
  double max_err = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 199);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    labels[0] = 0;
    labels[1] = 1;
    for (int i = 0; i < n; ++i) {
      scores[i] = (trial % 3 == 0) ? std::round(score_dist(rng) * 25.0) / 25.0
                                   : score_dist(rng);
      if (i > 1) labels[i] = rng() % 2;
    }
    max_err = std::max(max_err, std::abs(auc(scores, labels) - auc_bruteforce(scores, labels)));
  }
  report(3, "AUC vs pairwise oracle", max_err <= 1e-12,
         "1000 instances, max |error| " + fmt(max_err * 1e12) + "e-12");
}

// --------------------------------------------------------------------------
// 4. Chi-square DDS vs direct summation, 10,000 pairs, bounds [0, 2].

void criterion_4() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double max_err = 0.0;
  bool bounds_ok = true;
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 7);
    std::vector<double> p(n), q(n);
    double ps = 0.0, qs = 0.0;
    for (int i = 0; i < n; ++i) {
      p[i] = uni(rng);
      q[i] = uni(rng);
      ps += p[i];
      qs += q[i];
    }
    for (int i = 0; i < n; ++i) {
      p[i] /= ps;
      q[i] /= qs;
    }
    double oracle = 0.0;
    for (int i = 0; i < n; ++i) {
      if (p[i] + q[i] > 0.0) oracle += (p[i] - q[i]) * (p[i] - q[i]) / (p[i] + q[i]);
    }
    const double d = dds_chi_square(Posterior(p), Posterior(q));
    max_err = std::max(max_err, std::abs(d - oracle));
    bounds_ok = bounds_ok && d >= 0.0 && d <= 2.0;
  }
  report(4, "chi-square vs oracle", max_err <= 1e-12 && bounds_ok,
         "10000 pairs, max |error| " + fmt(max_err * 1e12) + "e-12, bounds " +
             (bounds_ok ? "held" : "VIOLATED"));
}

// --------------------------------------------------------------------------
// 5. Oracle inpainter: PP-I restores the original exactly.

class OracleInpainter final : public InpaintBackend {
 public:
  const std::string& id() const override { return id_; }
  void set_reference(const Image* reference) { reference_ = reference; }
  Image inpaint(const Image& masked, const BinaryMask& mask) const override {
    Image out = masked;
    for (int c = 0; c < kChannels; ++c) {
      for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
          if (!mask.at(y, x)) out.at(c, y, x) = reference_->at(c, y, x);
        }
      }
    }
    return out;
  }

 private:
  const Image* reference_ = nullptr;
  std::string id_ = "oracle";
};

void criterion_5() {
  ChessPatternConfig cfg;
  cfg.square_size = 3;
  cfg.squares_per_side = 3;
  cfg.spacing = 13;
  cfg.stride = 1;
  cfg.rows = cfg.cols = 64;
  auto schedule = std::make_shared<MaskSchedule>(build_schedule(cfg));
  auto oracle = std::make_shared<OracleInpainter>();
  const RecoveryPipeline pp_i{"PP-I", {RecoveryTransform::inpaint(oracle, schedule)}};

  std::mt19937_64 rng(88);
  std::uniform_real_distribution<float> uni(0.0f, 1.0f);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Image img(64, 64, 0.0f, Provenance::kEnhanced, "img" + std::to_string(trial));
    for (float& v : img.data()) v = uni(rng);
    oracle->set_reference(&img);
    const Image recovered = pp_i.run(img);
    worst = std::max(worst, max_abs_difference(recovered, img));
  }
  report(5, "oracle-inpainter identity", worst < 1e-9,
         "20 images, N=" + std::to_string(schedule->size()) + " masks, max deviation " +
             fmt(worst * 1e12) + "e-12");
}

// --------------------------------------------------------------------------
// Shared toy experiment context for criteria 6-8.

struct ToyContext {
  LoadedDataset dataset;
  ExperimentSplits splits;
  std::unique_ptr<AttributeClassifier> classifier;
  std::shared_ptr<ConvAutoencoder> autoencoder;
  std::map<std::string, RecoveryPipeline> pipelines;
  PoolVerifier verifier;
  std::unique_ptr<FgsmModel> fgsm;
  std::unique_ptr<SynthesisModel> synthesis;
  RunOptions run_options;

  ToyContext() {
    ToyDataConfig cfg;  // 2 x 28 x 8 = 448 images
    dataset = dataset_from_toy(generate_toy_dataset(cfg));

    SplitPolicy policy;
    policy.k = 4;
    policy.seed = 7;
    splits = build_splits(manifest_of(dataset), dataset.classes, policy);

    std::vector<Image> train_images;
    std::vector<int> train_labels;
    for (size_t rec : splits.train_records) {
      train_images.push_back(dataset.images[rec]);
      train_labels.push_back(dataset.labels[rec]);
    }

    classifier = train_toy_classifier(train_images, train_labels, dataset.classes,
                                      ToyArchitecture::kLinear, {}, "steering");

    autoencoder = std::make_shared<ConvAutoencoder>(12, 5);
    ConvAutoencoder::TrainOptions aopts;
    aopts.epochs = 20;
    autoencoder->train_reconstruction(train_images, aopts);

    ChessPatternConfig schedule_cfg;
    schedule_cfg.square_size = 2;
    schedule_cfg.squares_per_side = 2;
    schedule_cfg.spacing = 6;
    schedule_cfg.stride = 2;
    schedule_cfg.rows = schedule_cfg.cols = cfg.image_size;
    schedule_cfg.traversal = 8;

    RecoveryBackends backends;
    backends.denoiser = std::make_shared<NlmDenoiser>();
    backends.inpainter = std::make_shared<HarmonicInpainter>();
    backends.schedule = std::make_shared<MaskSchedule>(build_schedule(schedule_cfg));
    backends.autoencoder = autoencoder;
    backends.parser = std::make_shared<PlaneFitFaceParser>();
    pipelines = standard_pipelines(backends);

    FgsmModel::Options fopts;
    fopts.epsilon = 0.1;
    fgsm = std::make_unique<FgsmModel>(classifier.get(), fopts);

    ClassifierTrainOptions dopts;
    dopts.optimizer = Optimizer::kAdam;
    dopts.l2 = 1e-3f;
    dopts.init_sigma = 0.01f;
    dopts.learning_rate = 3e-3f;
    dopts.seed = 11;
    auto discriminator = train_toy_classifier(train_images, train_labels, dataset.classes,
                                              ToyArchitecture::kLinear, dopts, "san-disc");
    SynthesisOptions sopts;
    sopts.channels = 12;
    synthesis = std::make_unique<SynthesisModel>(sopts);
    synthesis->warm_start(train_images, 16);
    SynthesisTrainOptions topts;
    topts.epochs = 25;
    topts.adv_weight = 1.0f;
    synthesis->train_adversarial(train_images, *discriminator, topts);

    run_options.seed = 7;
    run_options.export_roc = false;
  }
};

struct MinArr {
  double value = std::numeric_limits<double>::infinity();
  std::string prober;
};

MinArr min_arr(const RobustnessRun& run) {
  MinArr best;
  for (const auto& [name, rep] : run.reports) {
    if (rep.arr.mean < best.value) {
      best.value = rep.arr.mean;
      best.prober = name;
    }
  }
  return best;
}

void criteria_6_7_8(const ToyContext& ctx) {
  // 6: FGSM against its own steering classifier suppresses with SR >= 0.9.
  const RobustnessRun fgsm_run =
      run_robustness_experiment(ctx.dataset, ctx.splits, *ctx.fgsm, *ctx.classifier,
                                ctx.verifier, ctx.pipelines, ctx.run_options);
  const RobustnessReport& any_report = fgsm_run.reports.begin()->second;
  report(6, "toy FGSM suppression", any_report.sr.mean >= 0.9,
         "SR " + fmt(any_report.sr.mean) + " +- " + fmt(any_report.sr.stderr_mean.value_or(0.0)) +
             " over " + std::to_string(any_report.splits.size()) + " splits");

  // 7: the synthesis model resists its best prober more than FGSM does.
  const RobustnessRun san_run =
      run_robustness_experiment(ctx.dataset, ctx.splits, *ctx.synthesis, *ctx.classifier,
                                ctx.verifier, ctx.pipelines, ctx.run_options);
  const MinArr fgsm_best = min_arr(fgsm_run);
  const MinArr san_best = min_arr(san_run);
  report(7, "robustness ordering", san_best.value > fgsm_best.value,
         "ARR synthesis " + fmt(san_best.value) + " (" + san_best.prober + ") > FGSM " +
             fmt(fgsm_best.value) + " (" + fgsm_best.prober + ")");

  // 8: detection with PP-A, PP-DI, PP-B at uniform weights.
  DetectorConfig detector;
  detector.probers = {ctx.pipelines.at("PP-A"), ctx.pipelines.at("PP-DI"),
                      ctx.pipelines.at("PP-B")};
  detector.classifier = ctx.classifier.get();

  const DetectionRun fgsm_detect = run_detection_experiment(ctx.dataset, ctx.splits, *ctx.fgsm,
                                                            detector, ctx.run_options);
  const IdentityPrivacyModel identity;
  const DetectionRun control = run_detection_experiment(ctx.dataset, ctx.splits, identity,
                                                        detector, ctx.run_options);
  const bool pass = fgsm_detect.auc_stats.mean >= 0.85 && control.auc_stats.mean >= 0.4 &&
                    control.auc_stats.mean <= 0.6;
  report(8, "detection at desk scale", pass,
         "FGSM AUC " + fmt(fgsm_detect.auc_stats.mean) + ", identity control AUC " +
             fmt(control.auc_stats.mean));
}

// --------------------------------------------------------------------------
// 9. Byte-identical reports for two runs of evaluate with the same seed.

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_9() {
  const fs::path base = fs::temp_directory_path() / "softprobe_acceptance_determinism";
  fs::remove_all(base);
  fs::create_directories(base);

  ToyDataConfig data_cfg;
  data_cfg.subjects_per_class = 8;
  data_cfg.images_per_subject = 4;
  const ToyDataset toy = generate_toy_dataset(data_cfg);
  write_toy_dataset(toy, (base / "data").string());

  nlohmann::json cfg;
  cfg["seed"] = 7;
  cfg["dataset"] = {{"manifest", (base / "data" / "manifest.csv").string()},
                    {"name", "toy"},
                    {"classes", {"warm", "cool"}}};
  cfg["splits"] = {{"k", 2}};
  cfg["schedule"] = {{"square_size", 2}, {"squares_per_side", 2}, {"spacing", 6},
                     {"stride", 2},      {"traversal", 8}};
  cfg["backends"] = {{"autoencoder", {{"channels", 8}, {"epochs", 4}}}};
  cfg["privacy_model"] = {{"kind", "fgsm"}, {"epsilon", 0.1}};
  cfg["probers"] = {"PP-D", "PP-B"};
  const fs::path cfg_path = base / "config.json";
  std::ofstream(cfg_path) << cfg.dump(2);

  auto evaluate_once = [&](const fs::path& out_dir) {
    Toolkit kit = assemble_toolkit(ToolkitConfig::from_file(cfg_path.string()));
    const RobustnessRun run =
        run_robustness_experiment(kit.dataset, kit.splits, *kit.privacy_model, *kit.classifier,
                                  *kit.verifier, kit.probers, kit.run_options);
    emit_reports(run, out_dir.string());
  };
  evaluate_once(base / "run1");
  evaluate_once(base / "run2");

  const std::string a = read_file(base / "run1" / "report.json");
  const std::string b = read_file(base / "run2" / "report.json");
  const bool pass = !a.empty() && a == b;
  report(9, "determinism", pass,
         "report.json " + std::to_string(a.size()) + " bytes, runs " +
             (pass ? "identical" : "DIFFER"));
  fs::remove_all(base);
}

// --------------------------------------------------------------------------
// 10. Bounds over the exhaustive AUC grid in 0.01 steps.

void criterion_10() {
  bool ok = true;
  for (int igo = 1; igo <= 100 && ok; ++igo) {
    const double go = igo / 100.0;
    for (int igp = 0; igp <= 100 && ok; ++igp) {
      const double gp = igp / 100.0;
      for (bool inverted : {false, true}) {
        const double sr = suppression_rate(go, gp, inverted);
        const double il = identity_loss(go, gp);
        const double p = pic(sr, il);
        if (sr < 0.0 || sr > 1.0 || il < 0.0 || il > 1.0 || p < -1.0 || p > 1.0) ok = false;
      }
      for (int igr = 0; igr <= 100; ++igr) {
        const double clamped = arr(go, gp, igr / 100.0, gp <= 0.5);
        if (clamped < 0.0 || clamped > 1.0) {
          ok = false;
          break;
        }
      }
    }
  }
  // auc_go = 0 must be rejected, not produce out-of-range values.
  bool throws_ok = false;
  try {
    suppression_rate(0.0, 0.5, false);
  } catch (const UndefinedMetricError&) {
    throws_ok = true;
  }
  report(10, "metric bounds grid", ok && throws_ok,
         std::string("grid 0..1 step 0.01 ") + (ok ? "in bounds" : "VIOLATED") +
             ", zero reference rejected: " + (throws_ok ? "yes" : "no"));
}

}  // namespace

int main() {
  g_start = std::chrono::steady_clock::now();
  std::printf("acceptance suite\n");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  {
    const ToyContext ctx;
    criteria_6_7_8(ctx);
  }
  criterion_9();
  criterion_10();
  std::printf("%s (%d failure%s)\n", g_failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES PRESENT",
              g_failures, g_failures == 1 ? "" : "s");
  return g_failures == 0 ? 0 : 1;
}
