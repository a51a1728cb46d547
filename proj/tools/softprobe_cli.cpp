// Command-line front end: dataset generation, enhancement, recovery,
// robustness/detection experiments, detector scoring and report handling.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "softprobe/config.hpp"
#include "softprobe/detection.hpp"
#include "softprobe/experiment.hpp"
#include "softprobe/manifest.hpp"
#include "softprobe/png_io.hpp"
#include "softprobe/toy_data.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int cmd_gen_toy_data(const std::string& out_dir, int subjects, int images_per_subject,
                     int size, uint64_t seed) {
  softprobe::ToyDataConfig cfg;
  cfg.subjects_per_class = subjects;
  cfg.images_per_subject = images_per_subject;
  cfg.image_size = size;
  cfg.seed = seed;
  const softprobe::ToyDataset dataset = softprobe::generate_toy_dataset(cfg);
  const softprobe::DatasetManifest manifest = softprobe::write_toy_dataset(dataset, out_dir);
  std::cout << "wrote " << manifest.records.size() << " images and manifest.csv to "
            << out_dir << "\n";
  return 0;
}

int cmd_enhance(const std::string& config_path, const std::string& out_dir) {
  softprobe::Toolkit kit = softprobe::assemble_toolkit(
      softprobe::ToolkitConfig::from_file(config_path));
  fs::create_directories(out_dir);
  softprobe::DatasetManifest out_manifest;
  out_manifest.name = kit.dataset.name + "-enhanced";
  int failures = 0;
  for (size_t i = 0; i < kit.dataset.images.size(); ++i) {
    const softprobe::Image& original = kit.dataset.images[i];
    try {
      const softprobe::Image enhanced = kit.privacy_model->enhance(original);
      const std::string path = (fs::path(out_dir) / (original.source_id() + ".png")).string();
      softprobe::save_png(enhanced, path);
      out_manifest.records.push_back({path, kit.dataset.records[i].subject_id,
                                      kit.dataset.records[i].attribute, std::nullopt});
    } catch (const softprobe::Error& e) {
      std::cerr << "enhance failed for " << original.source_id() << ": " << e.what() << "\n";
      ++failures;
    }
  }
  softprobe::save_manifest(out_manifest, (fs::path(out_dir) / "manifest.csv").string());
  std::cout << "enhanced " << out_manifest.records.size() << " images with model '"
            << kit.privacy_model->name() << "' (" << failures << " failures)\n";
  return failures == 0 ? 0 : 1;
}

int cmd_recover(const std::string& config_path, const std::string& pipeline_name,
                const std::string& in_dir, const std::string& out_dir) {
  softprobe::Toolkit kit = softprobe::assemble_toolkit(
      softprobe::ToolkitConfig::from_file(config_path));
  auto it = kit.pipelines.find(pipeline_name);
  if (it == kit.pipelines.end()) {
    std::cerr << "unknown pipeline '" << pipeline_name << "'\n";
    return 2;
  }
  fs::create_directories(out_dir);
  std::vector<fs::path> inputs;
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    if (entry.path().extension() == ".png") inputs.push_back(entry.path());
  }
  std::sort(inputs.begin(), inputs.end());
  int failures = 0;
  for (const fs::path& path : inputs) {
    try {
      softprobe::Image image = softprobe::load_png(path.string());
      image = image.with_source_id(path.stem().string());
      const softprobe::Image recovered = it->second.run(image);
      softprobe::save_png(recovered, (fs::path(out_dir) / path.filename()).string());
    } catch (const softprobe::Error& e) {
      std::cerr << "recover failed for " << path.filename().string() << ": " << e.what()
                << "\n";
      ++failures;
    }
  }
  std::cout << "recovered " << (inputs.size() - failures) << "/" << inputs.size()
            << " images with " << pipeline_name << "\n";
  return failures == 0 ? 0 : 1;
}

int cmd_evaluate(const std::string& config_path, const std::string& out_dir,
                 const std::string& mode) {
  softprobe::Toolkit kit = softprobe::assemble_toolkit(
      softprobe::ToolkitConfig::from_file(config_path));
  if (mode == "robustness" || mode == "both") {
    const softprobe::RobustnessRun run = softprobe::run_robustness_experiment(
        kit.dataset, kit.splits, *kit.privacy_model, *kit.classifier, *kit.verifier,
        kit.probers, kit.run_options);
    softprobe::emit_reports(run, out_dir);
    for (const auto& [name, report] : run.reports) {
      std::cout << name << ": SR=" << report.sr.mean << " IL=" << report.il.mean
                << " PIC=" << report.pic.mean << " ARR=" << report.arr.mean << "\n";
    }
  }
  if (mode == "detection" || mode == "both") {
    const softprobe::DetectionRun run = softprobe::run_detection_experiment(
        kit.dataset, kit.splits, *kit.privacy_model, kit.detector, kit.run_options);
    softprobe::emit_detection_report(run, out_dir);
    std::cout << "detection AUC=" << run.auc_stats.mean << " EER=" << run.eer_stats.mean
              << "\n";
  }
  std::cout << "reports written to " << out_dir << "\n";
  return 0;
}

std::map<std::string, double> load_external_scores(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw softprobe::IoError("cannot open external score file " + csv_path);
  std::map<std::string, double> scores;
  std::string line;
  std::getline(in, line);  // header: filename,score
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    scores[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
  }
  return scores;
}

int cmd_detect(const std::string& config_path, const std::string& images,
               const std::string& out_path, const std::string& external_csv, double alpha) {
  softprobe::Toolkit kit = softprobe::assemble_toolkit(
      softprobe::ToolkitConfig::from_file(config_path));

  std::vector<softprobe::Image> inputs;
  if (fs::is_directory(images)) {
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(images)) {
      if (entry.path().extension() == ".png") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    for (const fs::path& p : paths) {
      inputs.push_back(softprobe::load_png(p.string()).with_source_id(p.stem().string()));
    }
  } else if (images.size() > 4 && images.substr(images.size() - 4) == ".csv") {
    const softprobe::DatasetManifest manifest = softprobe::load_manifest(images);
    for (const auto& record : manifest.records) {
      inputs.push_back(
          softprobe::load_png(record.image_path)
              .with_source_id(fs::path(record.image_path).stem().string()));
    }
  } else {
    inputs.push_back(softprobe::load_png(images).with_source_id(fs::path(images).stem().string()));
  }

  std::map<std::string, double> external;
  if (!external_csv.empty()) external = load_external_scores(external_csv);

  json records = json::array();
  for (const softprobe::Image& image : inputs) {
    json record;
    record["source_id"] = image.source_id();
    try {
      const softprobe::DetectionScore score = softprobe::apend_score(image, kit.detector);
      record["d"] = score.per_prober;
      record["failed"] = score.failed;
      record["d_fin"] = score.d_fin;
      auto it = external.find(image.source_id() + ".png");
      if (it == external.end()) it = external.find(image.source_id());
      if (it != external.end()) {
        record["external"] = it->second;
        record["fused"] = softprobe::fuse_with_supervised(score.d_fin, it->second, alpha);
      }
    } catch (const softprobe::Error& e) {
      record["error"] = e.what();
    }
    records.push_back(std::move(record));
  }

  json out;
  out["probers"] = [&] {
    std::vector<std::string> names;
    for (const auto& p : kit.detector.probers) names.push_back(p.name);
    return names;
  }();
  out["records"] = std::move(records);
  if (out_path.empty() || out_path == "-") {
    std::cout << out.dump(2) << "\n";
  } else {
    std::ofstream f(out_path);
    if (!f) throw softprobe::IoError("cannot write " + out_path);
    f << out.dump(2) << "\n";
    std::cout << "wrote scores for " << inputs.size() << " images to " << out_path << "\n";
  }
  return 0;
}

int cmd_report(const std::string& report_path, const std::string& out_dir) {
  std::ifstream in(report_path);
  if (!in) throw softprobe::IoError("cannot open " + report_path);
  json j = json::parse(in);
  const softprobe::RobustnessRun run = softprobe::run_from_json(j);
  bool all_ok = true;
  for (const auto& [name, report] : run.reports) {
    const bool ok = softprobe::recompute_matches(report);
    all_ok = all_ok && ok;
    std::cout << name << ": derived metrics " << (ok ? "match" : "MISMATCH")
              << " the stored AUCs\n";
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "report.json");
    out << softprobe::run_to_json(run).dump(2) << '\n';
    std::cout << "re-emitted report.json to " << out_dir << "\n";
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"soft-biometric privacy robustness toolkit"};
  app.require_subcommand(1);

  // gen-toy-data
  std::string gen_out = "toy-data";
  int gen_subjects = 28, gen_images = 8, gen_size = 32;
  uint64_t gen_seed = 1234;
  auto* gen = app.add_subcommand("gen-toy-data", "generate the synthetic face-proxy dataset");
  gen->add_option("--out", gen_out, "output directory");
  gen->add_option("--subjects-per-class", gen_subjects, "subjects per attribute class");
  gen->add_option("--images-per-subject", gen_images, "images per subject");
  gen->add_option("--size", gen_size, "square image size in px");
  gen->add_option("--seed", gen_seed, "generator seed");

  // enhance
  std::string enh_config, enh_out = "enhanced";
  auto* enh = app.add_subcommand("enhance", "apply the configured privacy model to the dataset");
  enh->add_option("--config", enh_config, "toolkit config JSON")->required();
  enh->add_option("--out", enh_out, "output directory");

  // recover
  std::string rec_config, rec_pipeline = "PP-DI", rec_in, rec_out = "recovered";
  auto* rec = app.add_subcommand("recover", "run a recovery pipeline over a directory of images");
  rec->add_option("--config", rec_config, "toolkit config JSON")->required();
  rec->add_option("--pipeline", rec_pipeline, "pipeline name (PP-D .. PP-AB)");
  rec->add_option("--in", rec_in, "input directory of PNG images")->required();
  rec->add_option("--out", rec_out, "output directory");

  // evaluate
  std::string eval_config, eval_out = "reports", eval_mode = "robustness";
  auto* eval = app.add_subcommand("evaluate", "run the robustness/detection experiment");
  eval->add_option("--config", eval_config, "toolkit config JSON")->required();
  eval->add_option("--out", eval_out, "report output directory");
  eval->add_option("--mode", eval_mode, "robustness | detection | both")
      ->check(CLI::IsMember({"robustness", "detection", "both"}));

  // detect
  std::string det_config, det_images, det_out = "-", det_external;
  double det_alpha = 0.5;
  auto* det = app.add_subcommand("detect", "score images with the evidence-aggregation detector");
  det->add_option("--config", det_config, "toolkit config JSON")->required();
  det->add_option("--images", det_images, "image path, directory, or manifest CSV")->required();
  det->add_option("--out", det_out, "output JSON path ('-' for stdout)");
  det->add_option("--external-scores", det_external,
                  "CSV (filename,score) of supervised detector scores for fusion");
  det->add_option("--alpha", det_alpha, "product-fusion weight");

  // report
  std::string rep_in, rep_out;
  auto* rep = app.add_subcommand("report", "verify and re-emit a stored report");
  rep->add_option("--in", rep_in, "report.json path")->required();
  rep->add_option("--out", rep_out, "directory to re-emit into (optional)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_toy_data(gen_out, gen_subjects, gen_images, gen_size, gen_seed);
    if (enh->parsed()) return cmd_enhance(enh_config, enh_out);
    if (rec->parsed()) return cmd_recover(rec_config, rec_pipeline, rec_in, rec_out);
    if (eval->parsed()) return cmd_evaluate(eval_config, eval_out, eval_mode);
    if (det->parsed()) return cmd_detect(det_config, det_images, det_out, det_external, det_alpha);
    if (rep->parsed()) return cmd_report(rep_in, rep_out);
  } catch (const softprobe::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
