#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "hgl/arch.hpp"
#include "hgl/augment.hpp"
#include "hgl/heatmap.hpp"
#include "hgl/image.hpp"
#include "hgl/loss.hpp"
#include "hgl/nn.hpp"
#include "hgl/optim.hpp"
#include "hgl/rng.hpp"

namespace hgl {

struct TrainConfig {
  std::vector<std::pair<int, double>> lr_schedule{{0, 1e-4}, {15, 1e-5}, {30, 1e-6}};
  int epochs = 40;
  int batch_size = 10;
  OptimConfig optimiser;
  bool loss_visibility_masking = true;
  int checkpoint_interval = 0;  // epochs between checkpoint callbacks; 0 = final only
};

inline void validate(const TrainConfig& cfg) {
  op_check(cfg.epochs >= 1, "train config: epochs must be >= 1, got " +
                                std::to_string(cfg.epochs));
  op_check(cfg.batch_size >= 1, "train config: batch_size must be >= 1, got " +
                                    std::to_string(cfg.batch_size));
  op_check(cfg.checkpoint_interval >= 0, "train config: negative checkpoint interval");
  validate_schedule(cfg.lr_schedule);
}

/// Landmark-model training defaults: rate 1e-4 dropping to 1e-5 at epoch 15
/// and 1e-6 at epoch 30, 40 epochs, mini-batches of 10, rmsprop.
inline TrainConfig fan_train_defaults() { return TrainConfig{}; }

/// Depth-model training defaults: rate 1e-3, 50 epochs.
inline TrainConfig depth_train_defaults() {
  TrainConfig cfg;
  cfg.lr_schedule = {{0, 1e-3}};
  cfg.epochs = 50;
  return cfg;
}

struct StepLog {
  int epoch;
  long step;  // global step index, 0-based
  double loss;
};

struct TrainResult {
  std::vector<StepLog> steps;
  std::vector<double> epoch_mean_loss;
  std::vector<std::pair<int, long>> rejected_steps;  // (epoch, step) with non-finite grads
  long all_invisible_batches = 0;
};

inline void write_loss_csv(const std::string& path, const TrainResult& result) {
  std::ofstream out(path, std::ios::trunc);
  op_check(static_cast<bool>(out), "cannot open loss log for writing: " + path);
  out << std::setprecision(17);
  out << "epoch,step,loss\n";
  for (const auto& row : result.steps)
    out << row.epoch << ',' << row.step << ',' << row.loss << '\n';
  op_check(static_cast<bool>(out), "short write to loss log: " + path);
}

namespace detail {

template <typename T>
Tensor<T> batch_images(const std::vector<const Image*>& images) {
  const Image& first = *images.front();
  std::vector<T> data;
  data.reserve(images.size() * first.data.size());
  for (const Image* img : images) {
    op_check(img->h == first.h && img->w == first.w && img->channels == first.channels,
             "batch: images disagree on shape");
    for (float v : img->data) data.push_back(static_cast<T>(v));
  }
  return Tensor<T>::from_data({images.size(), first.channels, first.h, first.w},
                              std::move(data));
}

/// Stacks k-d tensors of identical shape into one (B, ...) tensor. Data only;
/// no lineage.
template <typename T>
Tensor<T> stack_batch(const std::vector<Tensor<T>>& items) {
  const Shape& inner = items.front().shape();
  std::vector<T> data;
  data.reserve(items.size() * items.front().numel());
  for (const auto& t : items) {
    op_check(t.shape() == inner, "batch: tensors disagree on shape");
    data.insert(data.end(), t.data().begin(), t.data().end());
  }
  Shape shape{items.size()};
  shape.insert(shape.end(), inner.begin(), inner.end());
  return Tensor<T>::from_data(std::move(shape), std::move(data));
}

inline std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t(0));
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.next_below(i)]);
  return idx;
}

template <typename T, typename Model, typename BatchLoss>
TrainResult run_epochs(Model& model, std::size_t n_samples, const TrainConfig& cfg,
                       std::uint64_t seed, BatchLoss&& batch_loss,
                       const std::function<void(int)>& on_checkpoint) {
  validate(cfg);
  op_check(n_samples > 0, "train: empty dataset");
  TrainResult result;
  Optimizer<T> opt(cfg.optimiser, trainable_params<T>(model));
  Rng shuffle_rng(seed, "shuffle");
  Rng augment_rng(seed, "augment");
  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at(epoch, cfg.lr_schedule);
    std::vector<std::size_t> order = shuffled_indices(n_samples, shuffle_rng);
    double loss_sum = 0.0;
    long epoch_steps = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.batch_size)) {
      std::vector<std::size_t> batch(
          order.begin() + static_cast<std::ptrdiff_t>(begin),
          order.begin() + static_cast<std::ptrdiff_t>(
                              std::min(begin + cfg.batch_size, order.size())));
      bool all_invisible = false;
      Tensor<T> loss = batch_loss(batch, augment_rng, &all_invisible);
      if (all_invisible) ++result.all_invisible_batches;
      const double value = static_cast<double>(loss.item());
      if (!std::isfinite(value))
        throw std::runtime_error("train: non-finite loss at epoch " +
                                 std::to_string(epoch) + ", batch " +
                                 std::to_string(begin / cfg.batch_size));
      backward(loss);
      try {
        opt.step(lr);
      } catch (const BadGradient&) {
        result.rejected_steps.emplace_back(epoch, step);
      }
      zero_grads<T>(model);
      result.steps.push_back({epoch, step, value});
      loss_sum += value;
      ++epoch_steps;
      ++step;
    }
    result.epoch_mean_loss.push_back(loss_sum / static_cast<double>(epoch_steps));
    const bool at_interval =
        cfg.checkpoint_interval > 0 && (epoch + 1) % cfg.checkpoint_interval == 0;
    if (on_checkpoint && (at_interval || epoch + 1 == cfg.epochs)) on_checkpoint(epoch);
  }
  return result;
}

}  // namespace detail

/// Trains the landmark model on in-memory samples. Deterministic given seed:
/// shuffling and augmentation draw from fixed per-purpose streams. The
/// checkpoint callback (may be empty) fires at the configured interval and
/// after the final epoch.
template <typename T>
TrainResult train_fan(FanModel<T>& model, const std::vector<Sample>& dataset,
                      const TrainConfig& cfg, const AugmentConfig& aug,
                      std::uint64_t seed, const GaussianSpec& spec = {},
                      const std::function<void(int)>& on_checkpoint = {}) {
  const Extent image{model.cfg.input_h(), model.cfg.input_w()};
  const Extent heatmap{model.cfg.heatmap_h, model.cfg.heatmap_w};
  validate_augment(aug, model.cfg.m_landmarks);
  for (const auto& s : dataset) {
    op_check(s.image.h == image.h && s.image.w == image.w && s.image.channels == 3,
             "train: sample image must be 3x" + std::to_string(image.h) + "x" +
                 std::to_string(image.w));
    op_check(s.landmarks.size() == model.cfg.m_landmarks,
             "train: sample has " + std::to_string(s.landmarks.size()) +
                 " landmarks, model expects " + std::to_string(model.cfg.m_landmarks));
  }
  auto batch_loss = [&](const std::vector<std::size_t>& batch, Rng& aug_rng,
                        bool* all_invisible) {
    std::vector<Sample> prepared;
    prepared.reserve(batch.size());
    for (std::size_t i : batch) prepared.push_back(augment(dataset[i], aug, aug_rng));
    std::vector<const Image*> images;
    std::vector<Tensor<T>> targets;
    std::vector<std::uint8_t> visibility;
    for (const auto& s : prepared) {
      images.push_back(&s.image);
      std::vector<std::uint8_t> oob;
      targets.push_back(encode_heatmaps<T>(s.landmarks, image, heatmap, spec, &oob));
      for (std::size_t i = 0; i < s.landmarks.size(); ++i)
        visibility.push_back(s.landmarks.visible(i) && !oob[i] ? 1 : 0);
    }
    std::vector<Tensor<T>> preds =
        model.forward(detail::batch_images<T>(images), BnMode::train);
    return fan_loss(preds, detail::stack_batch(targets), visibility,
                    cfg.loss_visibility_masking, all_invisible);
  };
  return detail::run_epochs<T>(model, dataset.size(), cfg, seed, batch_loss,
                               on_checkpoint);
}

/// Ground-truth heatmap input for depth training: encode at the working
/// resolution, then nearest-neighbour upsample to image resolution, matching
/// what the landmark model's predictions go through at inference.
template <typename T>
Tensor<T> depth_heatmap_input(const LandmarkSet& landmarks, Extent image, Extent heatmap,
                              const GaussianSpec& spec = {}) {
  op_check(heatmap.h > 0 && heatmap.w > 0 && image.h % heatmap.h == 0 &&
               image.w % heatmap.w == 0 && image.h / heatmap.h == image.w / heatmap.w,
           "depth input: image extent must be an integer multiple of heatmap extent");
  Tensor<T> hm = encode_heatmaps<T>(landmarks, image, heatmap, spec);
  Tensor<T> batched = Tensor<T>::from_data({1, hm.dim(0), hm.dim(1), hm.dim(2)},
                                           std::vector<T>(hm.data()));
  return upsample_nearest(batched, static_cast<int>(image.h / heatmap.h));
}

/// Trains the depth model with ground-truth heatmap inputs and an L2 loss on
/// per-landmark depth, masked to visible landmarks when configured.
template <typename T>
TrainResult train_depth(DepthNetModel<T>& model, const std::vector<Sample>& dataset,
                        const TrainConfig& cfg, const AugmentConfig& aug,
                        std::uint64_t seed, Extent heatmap, const GaussianSpec& spec = {},
                        const std::function<void(int)>& on_checkpoint = {}) {
  op_check(!dataset.empty(), "train: empty dataset");
  const Extent image{dataset.front().image.h, dataset.front().image.w};
  validate_augment(aug, model.cfg.n_landmarks);
  for (const auto& s : dataset)
    op_check(s.landmarks.size() == model.cfg.n_landmarks,
             "train: sample has " + std::to_string(s.landmarks.size()) +
                 " landmarks, model expects " + std::to_string(model.cfg.n_landmarks));
  auto batch_loss = [&](const std::vector<std::size_t>& batch, Rng& aug_rng,
                        bool* all_invisible) {
    std::vector<Sample> prepared;
    prepared.reserve(batch.size());
    for (std::size_t i : batch) prepared.push_back(augment(dataset[i], aug, aug_rng));
    std::vector<const Image*> images;
    std::vector<Tensor<T>> heatmaps;
    std::vector<T> z_target;
    std::vector<std::uint8_t> visibility;
    for (const auto& s : prepared) {
      images.push_back(&s.image);
      heatmaps.push_back(depth_heatmap_input<T>(s.landmarks, image, heatmap, spec));
      for (std::size_t i = 0; i < s.landmarks.size(); ++i) {
        z_target.push_back(static_cast<T>(s.landmarks.points[i].z));
        visibility.push_back(s.landmarks.visible(i) ? 1 : 0);
      }
    }
    std::vector<Tensor<T>> flat;
    flat.reserve(heatmaps.size());
    for (auto& h : heatmaps)
      flat.push_back(Tensor<T>::from_data({h.dim(1), h.dim(2), h.dim(3)},
                                          std::vector<T>(h.data())));
    Tensor<T> pred = model.forward(detail::batch_images<T>(images),
                                   detail::stack_batch(flat), BnMode::train);
    Tensor<T> target = Tensor<T>::from_data(
        {batch.size(), model.cfg.n_landmarks}, std::move(z_target));
    return depth_l2(pred, target, visibility, cfg.loss_visibility_masking,
                    all_invisible);
  };
  return detail::run_epochs<T>(model, dataset.size(), cfg, seed, batch_loss,
                               on_checkpoint);
}

}  // namespace hgl
