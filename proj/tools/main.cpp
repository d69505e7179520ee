#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hgl/arch.hpp"
#include "hgl/checkpoint.hpp"
#include "hgl/heatmap.hpp"
#include "hgl/manifest.hpp"
#include "hgl/metrics.hpp"
#include "hgl/report.hpp"
#include "hgl/scheme.hpp"
#include "hgl/svgplot.hpp"
#include "hgl/synth.hpp"
#include "hgl/train.hpp"

namespace {

struct RunPaths {
  std::string config;
  std::string manifest;
  std::string scheme;
  std::string out;
};

nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  hgl::op_check(static_cast<bool>(in), "cannot open config: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
}

hgl::TrainConfig train_config_from(const nlohmann::json& root, const hgl::TrainConfig& base) {
  hgl::TrainConfig cfg = base;
  if (!root.contains("train")) return cfg;
  const auto& j = root.at("train");
  if (j.contains("epochs")) cfg.epochs = j.at("epochs").get<int>();
  if (j.contains("batch_size")) cfg.batch_size = j.at("batch_size").get<int>();
  if (j.contains("checkpoint_interval"))
    cfg.checkpoint_interval = j.at("checkpoint_interval").get<int>();
  if (j.contains("loss_visibility_masking"))
    cfg.loss_visibility_masking = j.at("loss_visibility_masking").get<bool>();
  if (j.contains("lr_schedule")) {
    cfg.lr_schedule.clear();
    for (const auto& pair : j.at("lr_schedule"))
      cfg.lr_schedule.emplace_back(pair.at(0).get<int>(), pair.at(1).get<double>());
  }
  if (j.contains("optimiser")) {
    const auto name = j.at("optimiser").get<std::string>();
    if (name == "rmsprop")
      cfg.optimiser.kind = hgl::OptimKind::rmsprop;
    else if (name == "sgd")
      cfg.optimiser.kind = hgl::OptimKind::sgd;
    else
      throw std::invalid_argument("config: unknown optimiser " + name);
  }
  if (j.contains("alpha")) cfg.optimiser.alpha = j.at("alpha").get<double>();
  if (j.contains("eps")) cfg.optimiser.eps = j.at("eps").get<double>();
  hgl::validate(cfg);
  return cfg;
}

hgl::AugmentConfig augment_config_from(const nlohmann::json& root,
                                       const hgl::SchemeFile& scheme) {
  hgl::AugmentConfig cfg;
  cfg.flip_swap_map = scheme.flip_swap_map;
  if (!root.contains("augment")) return cfg;
  const auto& j = root.at("augment");
  if (j.contains("flip_prob")) cfg.flip_prob = j.at("flip_prob").get<double>();
  if (j.contains("rotate_deg")) {
    cfg.rotate_deg_lo = j.at("rotate_deg").at(0).get<double>();
    cfg.rotate_deg_hi = j.at("rotate_deg").at(1).get<double>();
  }
  if (j.contains("scale")) {
    cfg.scale_lo = j.at("scale").at(0).get<double>();
    cfg.scale_hi = j.at("scale").at(1).get<double>();
  }
  if (j.contains("jitter")) {
    cfg.jitter_lo = j.at("jitter").at(0).get<double>();
    cfg.jitter_hi = j.at("jitter").at(1).get<double>();
  }
  if (j.contains("occlusion_prob")) cfg.occlusion_prob = j.at("occlusion_prob").get<double>();
  if (j.contains("occlusion_max_area"))
    cfg.occlusion_max_area = j.at("occlusion_max_area").get<double>();
  if (j.contains("occlusion_value")) cfg.occlusion_value = j.at("occlusion_value").get<float>();
  return cfg;
}

hgl::GaussianSpec gaussian_spec_from(const nlohmann::json& root) {
  hgl::GaussianSpec spec;
  if (!root.contains("gaussian")) return spec;
  const auto& j = root.at("gaussian");
  if (j.contains("sigma")) spec.sigma = j.at("sigma").get<double>();
  if (j.contains("truncation_radius"))
    spec.truncation_radius = j.at("truncation_radius").get<double>();
  if (j.contains("peak")) spec.peak = j.at("peak").get<double>();
  return spec;
}

hgl::FanConfig fan_config_from(const nlohmann::json& root, const hgl::SchemeFile& scheme) {
  hgl::FanConfig cfg;
  if (root.contains("arch")) {
    nlohmann::json arch = root.at("arch");
    if (!arch.contains("kind")) arch["kind"] = "fan";
    cfg = hgl::fan_config_from_json(arch);
    hgl::op_check(cfg.m_landmarks == scheme.m,
                  "config: arch has " + std::to_string(cfg.m_landmarks) +
                      " landmarks, scheme " + scheme.id + " has " + std::to_string(scheme.m));
  } else {
    cfg.m_landmarks = scheme.m;
  }
  return cfg;
}

hgl::DepthNetConfig depth_config_from(const nlohmann::json& root,
                                      const hgl::SchemeFile& scheme) {
  hgl::DepthNetConfig cfg;
  if (root.contains("depth_arch")) {
    nlohmann::json arch = root.at("depth_arch");
    if (!arch.contains("kind")) arch["kind"] = "depth";
    cfg = hgl::depth_config_from_json(arch);
    hgl::op_check(cfg.n_landmarks == scheme.m,
                  "config: depth arch has " + std::to_string(cfg.n_landmarks) +
                      " landmarks, scheme " + scheme.id + " has " + std::to_string(scheme.m));
  } else {
    cfg.n_landmarks = scheme.m;
  }
  return cfg;
}

std::vector<hgl::Sample> load_samples(const std::string& manifest_path,
                                      const hgl::SchemeFile& scheme) {
  auto samples = hgl::load_dataset(manifest_path, scheme);
  hgl::op_check(!samples.empty(), "manifest " + manifest_path + " has no records");
  return samples;
}

int run_synth(std::size_t count, std::size_t size, double asymmetry, std::uint64_t seed,
              const std::string& out_dir) {
  const auto corpus = hgl::synth::synth_generate(count, {size, size}, asymmetry, seed, out_dir);
  std::cout << "wrote " << count << " samples, " << corpus.manifest_path << ", "
            << corpus.scheme_path << "\n";
  return 0;
}

int run_train(const RunPaths& paths, std::uint64_t seed, bool depth) {
  const auto root = load_config(paths.config);
  const auto scheme = hgl::load_scheme(paths.scheme);
  const auto dataset = load_samples(paths.manifest, scheme);

  // Field-level config mistakes (wrong types, missing keys) surface here;
  // name the file instead of leaking a bare json error.
  hgl::AugmentConfig aug;
  hgl::GaussianSpec spec;
  hgl::TrainConfig cfg;
  hgl::FanConfig fan_cfg;
  hgl::DepthNetConfig depth_cfg;
  try {
    aug = augment_config_from(root, scheme);
    spec = gaussian_spec_from(root);
    cfg = train_config_from(root, depth ? hgl::depth_train_defaults() : hgl::fan_train_defaults());
    if (depth)
      depth_cfg = depth_config_from(root, scheme);
    else
      fan_cfg = fan_config_from(root, scheme);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config " + paths.config + ": " + e.what());
  }
  std::filesystem::create_directories(paths.out);
  const auto out = std::filesystem::path(paths.out);

  hgl::TrainResult result;
  if (depth) {
    hgl::DepthNetModel<float> model(depth_cfg);
    model.init(seed);
    const hgl::Extent image{dataset.front().image.h, dataset.front().image.w};
    hgl::op_check(image.h % 4 == 0 && image.w % 4 == 0,
                  "train: image extent must be divisible by 4");
    const hgl::Extent heatmap{image.h / 4, image.w / 4};
    const auto save = [&](int epoch) {
      const bool final_epoch = epoch == cfg.epochs - 1;
      const auto name = final_epoch ? std::string("depth.ckpt")
                                    : "depth_epoch_" + std::to_string(epoch) + ".ckpt";
      hgl::save_checkpoint<float>(model, scheme.id, epoch, (out / name).string());
    };
    result = hgl::train_depth(model, dataset, cfg, aug, seed, heatmap, spec, save);
  } else {
    hgl::FanModel<float> model(fan_cfg);
    model.init(seed);
    const auto save = [&](int epoch) {
      const bool final_epoch = epoch == cfg.epochs - 1;
      const auto name = final_epoch ? std::string("fan.ckpt")
                                    : "fan_epoch_" + std::to_string(epoch) + ".ckpt";
      hgl::save_checkpoint<float>(model, scheme.id, epoch, (out / name).string());
    };
    result = hgl::train_fan(model, dataset, cfg, aug, seed, spec, save);
  }
  hgl::write_loss_csv((out / "loss.csv").string(), result);
  std::cout << "trained " << result.epoch_mean_loss.size() << " epochs, final mean loss "
            << std::setprecision(6) << result.epoch_mean_loss.back() << ", "
            << result.rejected_steps.size() << " rejected steps\n";
  return 0;
}

int run_predict(const RunPaths& paths, const std::string& checkpoint,
                const std::string& depth_checkpoint, const std::string& out_file) {
  const auto scheme = hgl::load_scheme(paths.scheme);
  const auto records = hgl::load_manifest(paths.manifest);
  hgl::validate_manifest(records, scheme);
  hgl::op_check(!records.empty(), "manifest " + paths.manifest + " has no records");
  const auto base = std::filesystem::path(paths.manifest).parent_path();

  const auto meta = hgl::read_checkpoint_header(checkpoint);
  hgl::op_check(meta.scheme == scheme.id, "checkpoint " + checkpoint + " was trained for " +
                                              meta.scheme + ", manifest uses " + scheme.id);
  hgl::FanModel<float> model(hgl::fan_config_from_json(meta.arch));
  hgl::load_checkpoint<float>(checkpoint, model);

  std::unique_ptr<hgl::DepthNetModel<float>> depth_model;
  if (!depth_checkpoint.empty()) {
    const auto depth_meta = hgl::read_checkpoint_header(depth_checkpoint);
    depth_model = std::make_unique<hgl::DepthNetModel<float>>(
        hgl::depth_config_from_json(depth_meta.arch));
    hgl::load_checkpoint<float>(depth_checkpoint, *depth_model);
    hgl::op_check(depth_model->cfg.n_landmarks == scheme.m,
                  "depth checkpoint landmark count disagrees with scheme");
  }

  const hgl::Extent image{model.cfg.input_h(), model.cfg.input_w()};
  const hgl::Extent heatmap{model.cfg.heatmap_h, model.cfg.heatmap_w};
  std::vector<hgl::ManifestRecord> out_records;
  for (const auto& r : records) {
    const std::filesystem::path img_path = std::filesystem::path(r.image).is_absolute()
                                               ? std::filesystem::path(r.image)
                                               : base / r.image;
    const hgl::Image img = hgl::read_ppm(img_path.string());
    hgl::op_check(img.h == image.h && img.w == image.w,
                  "image " + r.image + " is " + std::to_string(img.w) + "x" +
                      std::to_string(img.h) + ", model expects " + std::to_string(image.w) +
                      "x" + std::to_string(image.h));
    auto stacks = model.forward(hgl::image_to_tensor<float>(img), hgl::BnMode::eval);
    auto& last = stacks.back();
    auto maps = hgl::Tensor<float>::from_data({last.dim(1), last.dim(2), last.dim(3)},
                                              std::vector<float>(last.data()));
    hgl::LandmarkSet pred = hgl::decode_heatmaps(maps, image);
    pred.scheme = scheme.id;
    if (depth_model) {
      auto hm_input = hgl::depth_heatmap_input<float>(pred, image, heatmap);
      auto z = depth_model->forward(hgl::image_to_tensor<float>(img), hm_input,
                                    hgl::BnMode::eval);
      for (std::size_t i = 0; i < pred.size(); ++i)
        pred.points[i].z = static_cast<double>(z.data()[i]);
    }
    out_records.push_back({r.image, std::move(pred), r.bbox});
  }
  hgl::save_manifest(out_file, out_records);
  std::cout << "wrote " << out_records.size() << " predictions to " << out_file << "\n";
  return 0;
}

int run_eval(const std::string& pred_path, const std::string& gt_path,
             const std::string& out_dir, double cutoff) {
  const auto pred_records = hgl::load_manifest(pred_path);
  const auto gt_records = hgl::load_manifest(gt_path);
  hgl::op_check(pred_records.size() == gt_records.size(),
                "prediction and ground-truth manifests disagree: " +
                    std::to_string(pred_records.size()) + " vs " +
                    std::to_string(gt_records.size()) + " records");
  std::vector<hgl::LandmarkSet> preds, gts;
  for (const auto& r : pred_records) preds.push_back(r.landmarks);
  for (const auto& r : gt_records) gts.push_back(r.landmarks);

  std::vector<double> thresholds;
  const int n = static_cast<int>(std::floor(cutoff / 0.001 + 1e-9));
  for (int i = 0; i <= n; ++i) thresholds.push_back(i * 0.001);
  if (thresholds.back() < cutoff - 1e-12) thresholds.push_back(cutoff);

  const auto report = hgl::evaluate(preds, gts, {}, thresholds, cutoff);
  std::filesystem::create_directories(out_dir);
  const auto out = std::filesystem::path(out_dir);
  hgl::write_report_json((out / "report.json").string(), report);
  hgl::write_ced_csv((out / "ced.csv").string(), report);
  hgl::write_per_landmark_csv((out / "per_landmark.csv").string(), report);
  const double mean_nme =
      std::accumulate(report.per_sample_nme.begin(), report.per_sample_nme.end(), 0.0) /
      static_cast<double>(report.per_sample_nme.size());
  std::cout << std::setprecision(6) << "mean NME " << mean_nme << ", AUC@" << cutoff << " "
            << report.auc << ", " << report.excluded_samples.size() << " excluded\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stacked-hourglass facial landmark toolkit"};
  app.require_subcommand(1);

  std::size_t count = 8, size = 256;
  double asymmetry = 0.5, cutoff = 0.10;
  std::uint64_t seed = 1;
  bool depth = false;
  RunPaths paths;
  std::string checkpoint, depth_checkpoint, pred_path, gt_path, out_file;
  std::vector<std::string> csv_paths;

  auto* synth = app.add_subcommand("synth", "generate a synthetic face corpus");
  synth->add_option("--count", count, "number of samples")->required()
      ->check(CLI::PositiveNumber);
  synth->add_option("--out", paths.out, "output directory")->required();
  synth->add_option("--seed", seed, "random seed");
  synth->add_option("--asymmetry", asymmetry, "droop strength in [0,1]")
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--size", size, "square image extent")->check(CLI::PositiveNumber);

  auto* train = app.add_subcommand("train", "train a model and write checkpoints");
  train->add_option("--manifest", paths.manifest, "training manifest")->required()
      ->check(CLI::ExistingFile);
  train->add_option("--scheme", paths.scheme, "scheme file")->required()
      ->check(CLI::ExistingFile);
  train->add_option("--out", paths.out, "output directory")->required();
  train->add_option("--config", paths.config, "JSON config")->check(CLI::ExistingFile);
  train->add_option("--seed", seed, "random seed");
  train->add_flag("--depth", depth, "train the depth regressor instead of the landmark model");

  auto* predict = app.add_subcommand("predict", "run a checkpoint over a manifest");
  predict->add_option("--manifest", paths.manifest, "input manifest")->required()
      ->check(CLI::ExistingFile);
  predict->add_option("--scheme", paths.scheme, "scheme file")->required()
      ->check(CLI::ExistingFile);
  predict->add_option("--checkpoint", checkpoint, "landmark model checkpoint")->required()
      ->check(CLI::ExistingFile);
  predict->add_option("--out", out_file, "output predictions manifest")->required();
  predict->add_option("--depth-checkpoint", depth_checkpoint, "depth model checkpoint")
      ->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
  eval->add_option("--pred", pred_path, "predictions manifest")->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--gt", gt_path, "ground-truth manifest")->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--out", paths.out, "output directory")->required();
  eval->add_option("--ced-cutoff", cutoff, "AUC cutoff")->check(CLI::PositiveNumber);

  auto* plot = app.add_subcommand("plot-ced", "render CED curves to SVG");
  plot->add_option("csv", csv_paths, "ced.csv files")->required()
      ->check(CLI::ExistingFile);
  plot->add_option("--out", out_file, "output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return run_synth(count, size, asymmetry, seed, paths.out);
    if (train->parsed()) return run_train(paths, seed, depth);
    if (predict->parsed()) return run_predict(paths, checkpoint, depth_checkpoint, out_file);
    if (eval->parsed()) return run_eval(pred_path, gt_path, paths.out, cutoff);
    if (plot->parsed()) {
      hgl::plot_ced(csv_paths, out_file);
      std::cout << "wrote " << out_file << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
