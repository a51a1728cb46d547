#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "softprobe/autoencoder.hpp"
#include "softprobe/classifier.hpp"
#include "softprobe/denoise.hpp"
#include "softprobe/detection.hpp"
#include "softprobe/error.hpp"
#include "softprobe/experiment.hpp"
#include "softprobe/face_parse.hpp"
#include "softprobe/inpaint.hpp"
#include "softprobe/mask_schedule.hpp"
#include "softprobe/privacy_models.hpp"
#include "softprobe/recovery.hpp"
#include "softprobe/splits.hpp"
#include "softprobe/super_resolve.hpp"
#include "softprobe/verifier.hpp"
#include "softprobe/weights_io.hpp"

namespace softprobe {

// Toolkit configuration, parsed from a JSON file. Every knob has a default;
// a minimal config only names the dataset manifest. See README for the key
// schema. The cache directory comes from the SOFTPROBE_CACHE_DIR environment
// variable only.
struct ToolkitConfig {
  uint64_t seed = 7;

  std::string manifest_path;
  std::string dataset_name;
  std::vector<std::string> classes;

  SplitPolicy split_policy;
  ChessPatternConfig schedule;  // rows/cols adjusted to the data at assembly

  nlohmann::json backends = nlohmann::json::object();
  nlohmann::json classifier = nlohmann::json::object();
  nlohmann::json privacy_model = nlohmann::json::object();
  int verifier_grid = 4;

  std::vector<std::string> probers = {"PP-D", "PP-I", "PP-A", "PP-B", "PP-DI",
                                      "PP-DA", "PP-DB", "PP-IB", "PP-AB"};
  std::vector<std::string> detector_probers = {"PP-A", "PP-DI", "PP-B"};
  std::vector<double> detector_weights;  // empty -> uniform
  std::optional<bool> inverted_override;

  static ToolkitConfig from_json(const nlohmann::json& j,
                                 const std::filesystem::path& base_dir = {});
  static ToolkitConfig from_file(const std::string& path);
};

inline ToolkitConfig ToolkitConfig::from_json(const nlohmann::json& j,
                                              const std::filesystem::path& base_dir) {
  ToolkitConfig cfg;
  cfg.seed = j.value("seed", cfg.seed);

  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    if (d.contains("manifest")) {
      std::filesystem::path p = d.at("manifest").get<std::string>();
      cfg.manifest_path = p.is_absolute() ? p.string() : (base_dir / p).string();
    }
    cfg.dataset_name = d.value("name", std::string{});
    cfg.classes = d.value("classes", std::vector<std::string>{});
  }

  if (j.contains("splits")) {
    const auto& s = j.at("splits");
    cfg.split_policy.test_fraction = s.value("test_fraction", cfg.split_policy.test_fraction);
    cfg.split_policy.k = s.value("k", cfg.split_policy.k);
    cfg.split_policy.min_images_per_subject =
        s.value("min_images_per_subject", cfg.split_policy.min_images_per_subject);
    cfg.split_policy.max_nonmated_per_split = s.value(
        "max_nonmated_per_split", cfg.split_policy.max_nonmated_per_split);
    cfg.split_policy.exhaustive_nonmated =
        s.value("exhaustive_nonmated", cfg.split_policy.exhaustive_nonmated);
  }
  cfg.split_policy.seed = cfg.seed;

  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    cfg.schedule.square_size = s.value("square_size", cfg.schedule.square_size);
    cfg.schedule.squares_per_side = s.value("squares_per_side", cfg.schedule.squares_per_side);
    cfg.schedule.spacing = s.value("spacing", cfg.schedule.spacing);
    cfg.schedule.stride = s.value("stride", cfg.schedule.stride);
    if (s.contains("traversal") && !s.at("traversal").is_null()) {
      cfg.schedule.traversal = s.at("traversal").get<int>();
    }
  } else {
    cfg.schedule = ChessPatternConfig::default_224();
  }

  cfg.backends = j.value("backends", nlohmann::json::object());
  cfg.classifier = j.value("classifier", nlohmann::json::object());
  cfg.privacy_model = j.value("privacy_model", nlohmann::json::object());
  if (j.contains("verifier")) cfg.verifier_grid = j.at("verifier").value("grid", 4);

  cfg.probers = j.value("probers", cfg.probers);
  if (j.contains("detector")) {
    cfg.detector_probers = j.at("detector").value("probers", cfg.detector_probers);
    cfg.detector_weights = j.at("detector").value("weights", std::vector<double>{});
  }
  if (j.contains("inverted_override") && !j.at("inverted_override").is_null()) {
    cfg.inverted_override = j.at("inverted_override").get<bool>();
  }
  return cfg;
}

inline ToolkitConfig ToolkitConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ConfigError("config " + path + " is not valid JSON");
  return from_json(j, std::filesystem::path(path).parent_path());
}

inline std::optional<std::string> cache_dir_from_env() {
  const char* dir = std::getenv("SOFTPROBE_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  return std::string(dir);
}

// Everything an experiment needs, built from one config: loaded data,
// splits, trained models, backends and the pipeline registry.
struct Toolkit {
  LoadedDataset dataset;
  ExperimentSplits splits;

  std::shared_ptr<const MaskSchedule> schedule;
  std::shared_ptr<const DenoiseBackend> denoiser;
  std::shared_ptr<const InpaintBackend> inpainter;
  std::shared_ptr<ConvAutoencoder> autoencoder;
  std::shared_ptr<const FaceParseBackend> parser;
  std::shared_ptr<const SuperResolveBackend> super_resolver;

  std::map<std::string, RecoveryPipeline> pipelines;   // the nine variants
  std::map<std::string, RecoveryPipeline> probers;     // configured subset
  std::unique_ptr<AttributeClassifier> classifier;
  std::unique_ptr<PoolVerifier> verifier;
  std::unique_ptr<PrivacyModel> privacy_model;
  std::shared_ptr<SynthesisModel> synthesis;  // owned when model kind = synthesis
  DetectorConfig detector;

  RunOptions run_options;
};

namespace detail {

inline std::shared_ptr<const DenoiseBackend> make_denoiser(const nlohmann::json& spec) {
  const std::string kind = spec.value("kind", std::string("nlm"));
  if (kind == "median") {
    return std::make_shared<MedianDenoiser>(spec.value("radius", 1));
  }
  if (kind == "gaussian") {
    return std::make_shared<GaussianDenoiser>(spec.value("sigma", 1.0));
  }
  if (kind == "nlm") {
    return std::make_shared<NlmDenoiser>(spec.value("patch_radius", 1),
                                         spec.value("search_radius", 4),
                                         spec.value("strength", 0.35));
  }
  throw ConfigError("unknown denoiser kind '" + kind + "'");
}

inline std::string config_hash(const nlohmann::json& j, const std::string& extra) {
  return split_hash({j.dump(), extra});
}

}  // namespace detail

// Builds the toolkit: loads the dataset, derives splits, trains (or loads
// from cache) the classifier and the learned backends, instantiates the
// privacy model and the detector. Deterministic for a fixed config.
inline Toolkit assemble_toolkit(const ToolkitConfig& cfg) {
  Toolkit kit;
  if (cfg.manifest_path.empty()) {
    throw ConfigError("config needs dataset.manifest");
  }
  DatasetManifest manifest = load_manifest(cfg.manifest_path, cfg.dataset_name);
  kit.dataset = load_dataset(manifest, cfg.classes);
  kit.splits = build_splits(manifest, kit.dataset.classes, cfg.split_policy);

  if (kit.dataset.images.empty()) throw ConfigError("dataset has no images");
  const int rows = kit.dataset.images.front().height();
  const int cols = kit.dataset.images.front().width();

  ChessPatternConfig schedule_cfg = cfg.schedule;
  schedule_cfg.rows = rows;
  schedule_cfg.cols = cols;
  kit.schedule = std::make_shared<MaskSchedule>(build_schedule(schedule_cfg));

  kit.denoiser = detail::make_denoiser(cfg.backends.value("denoiser", nlohmann::json::object()));
  {
    const auto spec = cfg.backends.value("inpainter", nlohmann::json::object());
    kit.inpainter = std::make_shared<HarmonicInpainter>(spec.value("tolerance", 1e-7),
                                                        spec.value("max_iterations", 4000));
  }
  {
    const auto spec = cfg.backends.value("face_parser", nlohmann::json::object());
    kit.parser = std::make_shared<PlaneFitFaceParser>(spec.value("threshold", 0.25),
                                                      spec.value("smooth_radius", 1));
  }
  {
    const auto spec = cfg.backends.value("super_resolver", nlohmann::json::object());
    kit.super_resolver = std::make_shared<BicubicSuperResolver>();
  }

  // Training data (images of the train records).
  std::vector<Image> train_images;
  std::vector<int> train_labels;
  std::vector<std::string> train_ids;
  for (size_t rec : kit.splits.train_records) {
    train_images.push_back(kit.dataset.images[rec]);
    train_labels.push_back(kit.dataset.labels[rec]);
    train_ids.push_back(kit.dataset.images[rec].source_id());
  }
  const std::string train_hash = split_hash(train_ids);
  const std::optional<std::string> cache_dir = cache_dir_from_env();
  if (cache_dir) std::filesystem::create_directories(*cache_dir);

  // Autoencoder backend: trained on clean training images only.
  {
    const auto spec = cfg.backends.value("autoencoder", nlohmann::json::object());
    const int channels = spec.value("channels", 16);
    const uint64_t seed = spec.value("seed", cfg.seed ^ 0xae5eedull);
    const int epochs = spec.value("epochs", 40);
    auto ae = std::make_shared<ConvAutoencoder>(channels, seed);
    bool loaded = false;
    std::string cache_path;
    if (cache_dir) {
      cache_path = (std::filesystem::path(*cache_dir) /
                    ("ae_" + detail::config_hash(spec, train_hash) + ".spw"))
                       .string();
      if (std::filesystem::exists(cache_path)) {
        *ae = ConvAutoencoder::load(cache_path);
        loaded = ae->ready();
      }
    }
    if (!loaded) {
      ConvAutoencoder::TrainOptions topts;
      topts.epochs = epochs;
      topts.learning_rate = spec.value("learning_rate", 2e-3f);
      topts.shuffle_seed = seed ^ 0x51ull;
      ae->train_reconstruction(train_images, topts);
      if (cache_dir) ae->save(cache_path, train_hash);
    }
    kit.autoencoder = std::move(ae);
  }

  RecoveryBackends backends;
  backends.denoiser = kit.denoiser;
  backends.inpainter = kit.inpainter;
  backends.schedule = kit.schedule;
  backends.autoencoder = kit.autoencoder;
  backends.parser = kit.parser;
  kit.pipelines = standard_pipelines(backends);

  for (const std::string& name : cfg.probers) {
    auto it = kit.pipelines.find(name);
    if (it == kit.pipelines.end()) throw ConfigError("unknown prober '" + name + "'");
    kit.probers[name] = it->second;
  }

  // Steering / scoring classifier.
  {
    ClassifierTrainOptions opts;
    opts.epochs = cfg.classifier.value("epochs", opts.epochs);
    opts.learning_rate = cfg.classifier.value("learning_rate", opts.learning_rate);
    opts.l2 = cfg.classifier.value("l2", opts.l2);
    opts.init_sigma = cfg.classifier.value("init_sigma", opts.init_sigma);
    opts.optimizer = cfg.classifier.value("optimizer", std::string("sgd")) == "adam"
                         ? Optimizer::kAdam
                         : Optimizer::kSgd;
    opts.seed = cfg.classifier.value("seed", cfg.seed ^ 0xc1a55ull);
    const std::string arch = cfg.classifier.value("arch", std::string("linear"));

    std::string cache_path;
    bool loaded = false;
    if (cache_dir && arch == "linear") {
      cache_path = (std::filesystem::path(*cache_dir) /
                    ("clf_" + detail::config_hash(cfg.classifier, train_hash) + ".spw"))
                       .string();
      if (std::filesystem::exists(cache_path)) {
        kit.classifier = LinearSoftmaxClassifier::load(cache_path);
        loaded = kit.classifier->trained();
      }
    }
    if (!loaded) {
      kit.classifier = train_toy_classifier(
          train_images, train_labels, kit.dataset.classes,
          arch == "cnn" ? ToyArchitecture::kSmallCnn : ToyArchitecture::kLinear, opts);
      if (cache_dir && arch == "linear") {
        static_cast<LinearSoftmaxClassifier*>(kit.classifier.get())
            ->save(cache_path, train_hash);
      }
    }
  }

  kit.verifier = std::make_unique<PoolVerifier>(cfg.verifier_grid);

  // Privacy model under evaluation.
  {
    const auto& spec = cfg.privacy_model;
    const std::string kind = spec.value("kind", std::string("identity"));
    if (kind == "identity") {
      kit.privacy_model = std::make_unique<IdentityPrivacyModel>();
    } else if (kind == "fgsm") {
      FgsmModel::Options opts;
      opts.epsilon = spec.value("epsilon", opts.epsilon);
      opts.epoch_budget = spec.value("epoch_budget", opts.epoch_budget);
      if (spec.contains("search") && !spec.at("search").is_null()) {
        opts.search_range = {spec.at("search").at("hi").get<double>(),
                             spec.at("search").at("lo").get<double>()};
      }
      kit.privacy_model = std::make_unique<FgsmModel>(kit.classifier.get(), opts);
    } else if (kind == "cw") {
      CwOptions opts;
      opts.max_iter = spec.value("max_iter", opts.max_iter);
      opts.learning_rate = spec.value("learning_rate", opts.learning_rate);
      opts.init_const = spec.value("init_const", opts.init_const);
      kit.privacy_model = std::make_unique<CwModel>(kit.classifier.get(), opts);
    } else if (kind == "synthesis") {
      SynthesisModel::Options opts;
      opts.channels = spec.value("channels", opts.channels);
      opts.strength = spec.value("strength", opts.strength);
      opts.seed = spec.value("seed", cfg.seed ^ 0x5a4eull);
      auto model = std::make_shared<SynthesisModel>(opts);
      std::string cache_path;
      bool loaded = false;
      if (cache_dir) {
        cache_path = (std::filesystem::path(*cache_dir) /
                      ("san_" + detail::config_hash(spec, train_hash) + ".spw"))
                         .string();
        if (std::filesystem::exists(cache_path)) {
          model->load_autoencoder(cache_path);
          loaded = model->ready();
        }
      }
      if (!loaded) {
        model->warm_start(train_images, spec.value("warm_epochs", 16),
                          spec.value("warm_learning_rate", 2e-3f));
        // The synthesis model trains against its own discriminator, fitted
        // smooth (Adam + weight decay) so the adversarial gradient points at
        // the robust attribute cues rather than at classifier-specific noise.
        ClassifierTrainOptions dopts;
        dopts.optimizer = Optimizer::kAdam;
        dopts.epochs = spec.value("discriminator_epochs", 60);
        dopts.learning_rate = spec.value("discriminator_learning_rate", 3e-3f);
        dopts.l2 = spec.value("discriminator_l2", 1e-3f);
        dopts.init_sigma = spec.value("discriminator_init_sigma", 0.01f);
        dopts.seed = spec.value("discriminator_seed", cfg.seed ^ 0xd15cull);
        auto discriminator =
            train_toy_classifier(train_images, train_labels, kit.dataset.classes,
                                 ToyArchitecture::kLinear, dopts, "san-discriminator");
        SynthesisModel::AdversarialTrainOptions topts;
        topts.epochs = spec.value("adv_epochs", 25);
        topts.learning_rate = spec.value("adv_learning_rate", 1e-3f);
        topts.recon_weight = spec.value("recon_weight", 1.0f);
        topts.adv_weight = spec.value("adv_weight", 1.0f);
        model->train_adversarial(train_images, *discriminator, topts);
        if (cache_dir) model->save(cache_path, train_hash);
      }
      kit.synthesis = model;
      struct Owner final : PrivacyModel {
        std::shared_ptr<SynthesisModel> inner;
        explicit Owner(std::shared_ptr<SynthesisModel> m) : inner(std::move(m)) {}
        const std::string& name() const override { return inner->name(); }
        PrivacyModelKind kind() const override { return inner->kind(); }
        Image enhance(const Image& image) const override { return inner->enhance(image); }
      };
      kit.privacy_model = std::make_unique<Owner>(model);
    } else {
      throw ConfigError("unknown privacy model kind '" + kind + "'");
    }
  }

  // Detector.
  for (const std::string& name : cfg.detector_probers) {
    auto it = kit.pipelines.find(name);
    if (it == kit.pipelines.end()) throw ConfigError("unknown detector prober '" + name + "'");
    kit.detector.probers.push_back(it->second);
  }
  kit.detector.weights = cfg.detector_weights;
  kit.detector.classifier = kit.classifier.get();

  kit.run_options.inverted_override = cfg.inverted_override;
  // The identity control is scored under the inverted branch by default:
  // its ROC is unchanged, and that branch reports a no-op as SR = 0.
  if (!kit.run_options.inverted_override &&
      cfg.privacy_model.value("kind", std::string("identity")) == "identity") {
    kit.run_options.inverted_override = true;
  }
  kit.run_options.seed = cfg.seed;
  return kit;
}

}  // namespace softprobe
