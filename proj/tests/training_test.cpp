#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "hgl/arch.hpp"
#include "hgl/loss.hpp"
#include "hgl/optim.hpp"
#include "hgl/train.hpp"

namespace {

using namespace hgl;

Tensor<double> tensor4(const Shape& s, std::vector<double> v) {
  return Tensor<double>::from_data(s, std::move(v));
}

AugmentConfig identity_augment() {
  AugmentConfig cfg;
  cfg.flip_prob = 0.0;
  cfg.rotate_deg_lo = cfg.rotate_deg_hi = 0.0;
  cfg.scale_lo = cfg.scale_hi = 1.0;
  cfg.jitter_lo = cfg.jitter_hi = 1.0;
  cfg.occlusion_prob = 0.0;
  return cfg;
}

FanConfig mini_fan_config(int n_stacks) {
  FanConfig cfg;
  cfg.n_stacks = n_stacks;
  cfg.m_landmarks = 5;
  cfg.heatmap_h = cfg.heatmap_w = 8;
  cfg.hourglass.depth = 2;
  cfg.hourglass.width = 16;
  cfg.hourglass.block = BlockKind::bottleneck;
  cfg.stem.c1 = 8;
  cfg.stem.c2 = 12;
  return cfg;
}

// 32x32 samples with 5 landmarks, each marked by a bright 3x3 dot so the
// images genuinely carry position information.
Sample make_dot_sample(Rng& rng) {
  Sample s;
  s.image.channels = 3;
  s.image.h = s.image.w = 32;
  s.image.data.assign(3 * 32 * 32, 0.1f);
  s.landmarks.scheme = "test5";
  s.landmarks.visibility.assign(5, 1);
  for (int i = 0; i < 5; ++i) {
    const double x = rng.uniform(6.0, 26.0);
    const double y = rng.uniform(6.0, 26.0);
    s.landmarks.points.push_back({x, y, rng.uniform(-1.0, 1.0)});
    const auto cx = static_cast<std::size_t>(x), cy = static_cast<std::size_t>(y);
    for (std::size_t dy = cy - 1; dy <= cy + 1; ++dy)
      for (std::size_t dx = cx - 1; dx <= cx + 1; ++dx)
        s.image.at(static_cast<std::size_t>(i) % 3, dy, dx) = 1.0f;
  }
  return s;
}

std::vector<Sample> dot_dataset(std::size_t n, std::uint64_t seed) {
  Rng rng(seed, "fixture");
  std::vector<Sample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(make_dot_sample(rng));
  return out;
}

double grad_l1(FanModel<float>& model, const std::string& name) {
  auto params = named_params<float>(model);
  auto it = params.find(name);
  EXPECT_NE(it, params.end()) << "no parameter named " << name;
  double total = 0.0;
  for (float g : it->second.tensor.grad()) total += std::abs(static_cast<double>(g));
  return total;
}

TEST(HeatmapMse, IdenticalInputsGiveZero) {
  Rng rng(3);
  auto a = hgltest::random_tensor({2, 3, 4, 4}, rng);
  EXPECT_EQ(heatmap_mse(a, a, std::vector<std::uint8_t>(6, 1)).item(), 0.0);
}

TEST(HeatmapMse, SingleHotCellAveragesOverAllCells) {
  auto pred = tensor4({1, 1, 2, 2}, {0, 0, 0, 0});
  auto target = tensor4({1, 1, 2, 2}, {0, 1, 0, 0});
  EXPECT_DOUBLE_EQ(heatmap_mse(pred, target, {1}).item(), 0.25);
}

TEST(HeatmapMse, MaskingHalvesCellPopulation) {
  auto pred = tensor4({1, 2, 2, 2}, {1, 0, 0, 0, 0, 0, 0, 0});
  auto target = tensor4({1, 2, 2, 2}, std::vector<double>(8, 0.0));
  EXPECT_DOUBLE_EQ(heatmap_mse(pred, target, {1, 1}).item(), 0.125);
  EXPECT_DOUBLE_EQ(heatmap_mse(pred, target, {1, 0}).item(), 0.25);
}

TEST(HeatmapMse, MaskingOffCountsEveryChannel) {
  auto pred = tensor4({1, 2, 2, 2}, {1, 0, 0, 0, 3, 0, 0, 0});
  auto target = tensor4({1, 2, 2, 2}, std::vector<double>(8, 0.0));
  EXPECT_DOUBLE_EQ(heatmap_mse(pred, target, {1, 0}, false).item(), 1.25);
}

TEST(HeatmapMse, AllInvisibleIsZeroWithWarning) {
  Rng rng(4);
  auto pred = hgltest::random_tensor({1, 2, 3, 3}, rng);
  auto target = hgltest::random_tensor({1, 2, 3, 3}, rng);
  bool all_invisible = false;
  auto loss = heatmap_mse(pred, target, {0, 0}, true, &all_invisible);
  EXPECT_TRUE(all_invisible);
  EXPECT_EQ(loss.item(), 0.0);
}

TEST(HeatmapMse, VisibilityCountMismatchRejected) {
  auto pred = tensor4({1, 2, 2, 2}, std::vector<double>(8, 0.0));
  EXPECT_THROW(heatmap_mse(pred, pred, {1}), std::invalid_argument);
  EXPECT_THROW(heatmap_mse(pred, tensor4({1, 2, 2, 1}, std::vector<double>(4, 0.0)),
                           std::vector<std::uint8_t>{1, 1}),
               std::invalid_argument);
}

TEST(HeatmapMse, NonNegativeOnRandomInputs) {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    auto pred = hgltest::random_tensor({2, 2, 3, 3}, rng);
    auto target = hgltest::random_tensor({2, 2, 3, 3}, rng);
    std::vector<std::uint8_t> vis;
    for (int i = 0; i < 4; ++i) vis.push_back(rng.bernoulli(0.7) ? 1 : 0);
    EXPECT_GE(heatmap_mse(pred, target, vis).item(), 0.0);
  }
}

TEST(HeatmapMse, GradientMatchesFiniteDifferences) {
  Rng rng(6);
  auto target = hgltest::random_tensor({2, 3, 4, 4}, rng);
  const std::vector<std::uint8_t> vis{1, 0, 1, 1, 1, 0};
  auto build = [&](std::vector<Tensor<double>>& leaves) {
    return heatmap_mse(leaves[0], target, vis);
  };
  EXPECT_LT(hgltest::max_rel_grad_error(build, {hgltest::random_tensor({2, 3, 4, 4}, rng)}),
            1e-4);
}

TEST(FanLoss, SingleStackEqualsHeatmapMse) {
  Rng rng(7);
  auto pred = hgltest::random_tensor({1, 2, 3, 3}, rng);
  auto target = hgltest::random_tensor({1, 2, 3, 3}, rng);
  const std::vector<std::uint8_t> vis{1, 1};
  EXPECT_DOUBLE_EQ(fan_loss<double>({pred}, target, vis).item(),
                   heatmap_mse(pred, target, vis).item());
}

TEST(FanLoss, FourIdenticalStacksQuadruple) {
  Rng rng(8);
  auto pred = hgltest::random_tensor({1, 2, 3, 3}, rng);
  auto target = hgltest::random_tensor({1, 2, 3, 3}, rng);
  const std::vector<std::uint8_t> vis{1, 1};
  const double one = heatmap_mse(pred, target, vis).item();
  EXPECT_NEAR(fan_loss<double>({pred, pred, pred, pred}, target, vis).item(), 4.0 * one,
              1e-12);
}

TEST(FanLoss, MatchesSumOfIndependentPerStackMses) {
  Rng rng(9);
  auto target = hgltest::random_tensor({2, 3, 4, 4}, rng);
  std::vector<Tensor<double>> preds;
  for (int s = 0; s < 3; ++s) preds.push_back(hgltest::random_tensor({2, 3, 4, 4}, rng));
  const std::vector<std::uint8_t> vis{1, 1, 0, 1, 1, 1};
  double expected = 0.0;
  for (const auto& p : preds) expected += heatmap_mse(p, target, vis).item();
  const double got = fan_loss(preds, target, vis).item();
  EXPECT_LE(std::abs(got - expected), 1e-6 * std::max(std::abs(expected), 1.0));
}

TEST(FanLoss, EmptyStackListRejected) {
  Rng rng(10);
  auto target = hgltest::random_tensor({1, 1, 2, 2}, rng);
  EXPECT_THROW(fan_loss<double>({}, target, {1}), std::invalid_argument);
}

TEST(FanLoss, GradientReachesFirstStackThroughBothPaths) {
  FanModel<float> model(mini_fan_config(2));
  model.init(11);
  Rng rng(12);
  std::vector<float> img(1 * 3 * 32 * 32);
  for (auto& v : img) v = static_cast<float>(rng.uniform(0.0, 1.0));
  auto input = Tensor<float>::from_data({1, 3, 32, 32}, std::move(img));
  auto target = Tensor<float>::zeros({1, 5, 8, 8});
  const std::vector<std::uint8_t> vis(5, 1);

  // Own head only: loss on the first stack's output.
  auto preds = model.forward(input, BnMode::train);
  backward(heatmap_mse(preds[0], target, vis));
  EXPECT_GT(grad_l1(model, "stack.0.head.out.weight"), 0.0);
  EXPECT_GT(grad_l1(model, "stack.0.hg.up.conv1.weight"), 0.0);
  EXPECT_EQ(grad_l1(model, "stack.1.head.out.weight"), 0.0);
  zero_grads<float>(model);

  // Fusion path only: loss on the second stack's output still reaches the
  // first stack's parameters, including its head, via the remap convolutions.
  preds = model.forward(input, BnMode::train);
  backward(heatmap_mse(preds[1], target, vis));
  EXPECT_GT(grad_l1(model, "stack.0.head.out.weight"), 0.0);
  EXPECT_GT(grad_l1(model, "stack.0.hg.up.conv1.weight"), 0.0);
  EXPECT_GT(grad_l1(model, "stack.0.remap_feat.weight"), 0.0);
  EXPECT_GT(grad_l1(model, "stack.0.remap_heat.weight"), 0.0);
  EXPECT_GT(grad_l1(model, "stack.1.head.out.weight"), 0.0);
}

TEST(DepthL2, HandExample) {
  auto pred = Tensor<double>::from_data({1, 2}, {0, 0});
  auto target = Tensor<double>::from_data({1, 2}, {3, 4});
  EXPECT_DOUBLE_EQ(depth_l2(pred, target, {1, 1}).item(), 12.5);
}

TEST(DepthL2, MaskedLandmarkExcluded) {
  auto pred = Tensor<double>::from_data({1, 2}, {0, 0});
  auto target = Tensor<double>::from_data({1, 2}, {3, 4});
  EXPECT_DOUBLE_EQ(depth_l2(pred, target, {1, 0}).item(), 9.0);
  EXPECT_DOUBLE_EQ(depth_l2(pred, target, {0, 1}).item(), 16.0);
}

TEST(DepthL2, IdenticalInputsGiveZero) {
  Rng rng(13);
  auto a = hgltest::random_tensor({3, 4}, rng);
  EXPECT_EQ(depth_l2(a, a, std::vector<std::uint8_t>(12, 1)).item(), 0.0);
}

TEST(DepthL2, AllInvisibleIsZeroWithWarning) {
  auto pred = Tensor<double>::from_data({1, 2}, {1, 2});
  auto target = Tensor<double>::from_data({1, 2}, {3, 4});
  bool all_invisible = false;
  EXPECT_EQ(depth_l2(pred, target, {0, 0}, true, &all_invisible).item(), 0.0);
  EXPECT_TRUE(all_invisible);
}

TEST(DepthL2, GradientMatchesFiniteDifferences) {
  Rng rng(14);
  auto target = hgltest::random_tensor({2, 5}, rng);
  const std::vector<std::uint8_t> vis{1, 0, 1, 1, 1, 0, 1, 1, 0, 1};
  auto build = [&](std::vector<Tensor<double>>& leaves) {
    return depth_l2(leaves[0], target, vis);
  };
  EXPECT_LT(hgltest::max_rel_grad_error(build, {hgltest::random_tensor({2, 5}, rng)}),
            1e-4);
}

TEST(Optimizer, SgdHandExample) {
  auto w = Tensor<double>::from_data({1}, {1.0});
  w.set_requires_grad(true);
  w.zero_grad();
  w.grad()[0] = 2.0;
  Optimizer<double> opt({OptimKind::sgd}, {w});
  opt.step(0.1);
  EXPECT_DOUBLE_EQ(w.data()[0], 0.8);
}

TEST(Optimizer, ZeroGradientLeavesParametersUnchanged) {
  for (OptimKind kind : {OptimKind::sgd, OptimKind::rmsprop}) {
    auto w = Tensor<double>::from_data({3}, {1.0, -2.0, 0.5});
    w.set_requires_grad(true);
    w.zero_grad();
    OptimConfig cfg;
    cfg.kind = kind;
    Optimizer<double> opt(cfg, {w});
    opt.step(0.1);
    EXPECT_EQ(w.data(), (std::vector<double>{1.0, -2.0, 0.5}));
  }
}

TEST(Optimizer, LrZeroIsNoOp) {
  for (OptimKind kind : {OptimKind::sgd, OptimKind::rmsprop}) {
    auto w = Tensor<double>::from_data({2}, {0.25, -1.5});
    w.set_requires_grad(true);
    w.zero_grad();
    w.grad() = {0.7, -0.3};
    OptimConfig cfg;
    cfg.kind = kind;
    Optimizer<double> opt(cfg, {w});
    opt.step(0.0);
    EXPECT_EQ(w.data(), (std::vector<double>{0.25, -1.5}));
  }
}

TEST(Optimizer, RmspropMatchesManualTwoSteps) {
  auto w = Tensor<double>::from_data({1}, {0.5});
  w.set_requires_grad(true);
  Optimizer<double> opt({}, {w});
  const double lr = 0.01, alpha = 0.99, eps = 1e-8;
  const double g1 = 0.3, g2 = -0.2;

  w.zero_grad();
  w.grad()[0] = g1;
  opt.step(lr);
  double v = (1 - alpha) * g1 * g1;
  double expected = 0.5 - lr * g1 / (std::sqrt(v) + eps);
  EXPECT_NEAR(w.data()[0], expected, 1e-14);

  w.zero_grad();
  w.grad()[0] = g2;
  opt.step(lr);
  v = alpha * v + (1 - alpha) * g2 * g2;
  expected -= lr * g2 / (std::sqrt(v) + eps);
  EXPECT_NEAR(w.data()[0], expected, 1e-14);
}

TEST(Optimizer, NonFiniteGradientRejectsWholeStep) {
  auto a = Tensor<double>::from_data({1}, {1.0});
  auto b = Tensor<double>::from_data({1}, {2.0});
  for (auto* t : {&a, &b}) {
    t->set_requires_grad(true);
    t->zero_grad();
  }
  a.grad()[0] = 0.5;
  b.grad()[0] = std::nan("");
  Optimizer<double> opt({OptimKind::sgd}, {a, b});
  EXPECT_THROW(opt.step(0.1), BadGradient);
  EXPECT_DOUBLE_EQ(a.data()[0], 1.0);
  EXPECT_DOUBLE_EQ(b.data()[0], 2.0);
}

TEST(Schedule, FanScheduleSteps) {
  const auto schedule = fan_train_defaults().lr_schedule;
  EXPECT_DOUBLE_EQ(lr_at(0, schedule), 1e-4);
  EXPECT_DOUBLE_EQ(lr_at(14, schedule), 1e-4);
  EXPECT_DOUBLE_EQ(lr_at(15, schedule), 1e-5);
  EXPECT_DOUBLE_EQ(lr_at(29, schedule), 1e-5);
  EXPECT_DOUBLE_EQ(lr_at(30, schedule), 1e-6);
  EXPECT_DOUBLE_EQ(lr_at(39, schedule), 1e-6);
}

TEST(Schedule, ValidationRejectsBadShapes) {
  EXPECT_THROW(lr_at(0, {}), std::invalid_argument);
  EXPECT_THROW(lr_at(0, {{1, 1e-4}}), std::invalid_argument);
  EXPECT_THROW(lr_at(0, {{0, 1e-4}, {0, 1e-5}}), std::invalid_argument);
  EXPECT_THROW(lr_at(0, {{0, 1e-4}, {5, 1e-3}}), std::invalid_argument);
  EXPECT_THROW(lr_at(0, {{0, -1e-4}}), std::invalid_argument);
  EXPECT_THROW(lr_at(-1, {{0, 1e-4}}), std::invalid_argument);
}

TEST(TrainConfig, FanDefaultsMatchProtocol) {
  const TrainConfig cfg = fan_train_defaults();
  EXPECT_EQ(cfg.epochs, 40);
  EXPECT_EQ(cfg.batch_size, 10);
  const std::vector<std::pair<int, double>> expected{{0, 1e-4}, {15, 1e-5}, {30, 1e-6}};
  EXPECT_EQ(cfg.lr_schedule, expected);
  EXPECT_EQ(cfg.optimiser.kind, OptimKind::rmsprop);
  EXPECT_DOUBLE_EQ(cfg.optimiser.alpha, 0.99);
  EXPECT_DOUBLE_EQ(cfg.optimiser.eps, 1e-8);
  EXPECT_TRUE(cfg.loss_visibility_masking);
  validate(cfg);
}

TEST(TrainConfig, DepthDefaultsMatchProtocol) {
  const TrainConfig cfg = depth_train_defaults();
  EXPECT_EQ(cfg.epochs, 50);
  const std::vector<std::pair<int, double>> expected{{0, 1e-3}};
  EXPECT_EQ(cfg.lr_schedule, expected);
  validate(cfg);
}

TEST(TrainConfig, ZeroEpochsRejected) {
  TrainConfig cfg = fan_train_defaults();
  cfg.epochs = 0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  FanModel<float> model(mini_fan_config(1));
  model.init(1);
  EXPECT_THROW(train_fan(model, dot_dataset(2, 1), cfg, identity_augment(), 1),
               std::invalid_argument);
}

TEST(Train, OverfitsMiniatureFanAndSmoothedLossDecreases) {
  FanModel<float> model(mini_fan_config(1));
  model.init(21);
  const auto dataset = dot_dataset(8, 22);
  TrainConfig cfg;
  cfg.lr_schedule = {{0, 1.5e-3}, {100, 5e-4}, {200, 1e-4}};
  cfg.epochs = 300;
  cfg.batch_size = 8;  // full batch: one step per epoch, 300 steps total
  const TrainResult result = train_fan(model, dataset, cfg, identity_augment(), 23);

  ASSERT_EQ(result.steps.size(), 300u);
  const double initial = result.steps.front().loss;
  const double final_loss = result.steps.back().loss;
  EXPECT_LE(final_loss, 0.01 * initial)
      << "initial " << initial << " final " << final_loss;

  std::vector<double> smoothed;
  for (std::size_t i = 0; i + 20 <= result.steps.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = i; j < i + 20; ++j) acc += result.steps[j].loss;
    smoothed.push_back(acc / 20.0);
  }
  for (std::size_t i = 1; i < smoothed.size(); ++i)
    ASSERT_LE(smoothed[i], smoothed[i - 1] + 1e-12) << "at window " << i;
}

TEST(Train, IdenticalSeedsGiveIdenticalLossLogs) {
  AugmentConfig aug;  // defaults exercise every augmentation stream
  aug.flip_swap_map = {{0, 1}, {2, 3}};
  const auto dataset = dot_dataset(8, 31);
  TrainConfig cfg;
  cfg.lr_schedule = {{0, 1e-3}};
  cfg.epochs = 2;
  cfg.batch_size = 4;

  std::vector<std::vector<double>> logs;
  for (int run = 0; run < 2; ++run) {
    FanModel<float> model(mini_fan_config(1));
    model.init(32);
    const TrainResult r = train_fan(model, dataset, cfg, aug, 33);
    std::vector<double> losses;
    for (const auto& s : r.steps) losses.push_back(s.loss);
    logs.push_back(std::move(losses));
  }
  EXPECT_EQ(logs[0], logs[1]);

  FanModel<float> other(mini_fan_config(1));
  other.init(32);
  const TrainResult r = train_fan(other, dataset, cfg, aug, 34);
  std::vector<double> losses;
  for (const auto& s : r.steps) losses.push_back(s.loss);
  EXPECT_NE(logs[0], losses);
}

TEST(Train, NonFiniteLossAbortsWithBatchId) {
  FanModel<float> model(mini_fan_config(1));
  model.init(41);
  auto params = named_params<float>(model);
  auto it = params.find("stack.0.head.out.bias");
  ASSERT_NE(it, params.end());
  for (auto& v : it->second.tensor.data()) v = 1e30f;

  TrainConfig cfg;
  cfg.lr_schedule = {{0, 1e-3}};
  cfg.epochs = 1;
  cfg.batch_size = 2;
  try {
    train_fan(model, dot_dataset(2, 42), cfg, identity_augment(), 43);
    FAIL() << "expected divergence abort";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("batch"), std::string::npos) << e.what();
  }
}

TEST(Train, PerEpochMeanMatchesStepLosses) {
  FanModel<float> model(mini_fan_config(1));
  model.init(51);
  TrainConfig cfg;
  cfg.lr_schedule = {{0, 1e-3}};
  cfg.epochs = 2;
  cfg.batch_size = 3;  // 8 samples: steps of 3, 3, 2
  const TrainResult r = train_fan(model, dot_dataset(8, 52), cfg, identity_augment(), 53);
  ASSERT_EQ(r.steps.size(), 6u);
  ASSERT_EQ(r.epoch_mean_loss.size(), 2u);
  for (int epoch = 0; epoch < 2; ++epoch) {
    double acc = 0.0;
    int n = 0;
    for (const auto& s : r.steps)
      if (s.epoch == epoch) {
        acc += s.loss;
        ++n;
      }
    EXPECT_EQ(n, 3);
    EXPECT_NEAR(r.epoch_mean_loss[epoch], acc / n, 1e-12);
  }
}

TEST(Train, WritesLossCsv) {
  FanModel<float> model(mini_fan_config(1));
  model.init(61);
  TrainConfig cfg;
  cfg.lr_schedule = {{0, 1e-3}};
  cfg.epochs = 1;
  cfg.batch_size = 4;
  const TrainResult r = train_fan(model, dot_dataset(8, 62), cfg, identity_augment(), 63);

  const auto path =
      (std::filesystem::temp_directory_path() / "hgl_loss_test.csv").string();
  write_loss_csv(path, r);
  std::ifstream in(path);
  std::string line;
  ASSERT_TRUE(std::getline(in, line));
  EXPECT_EQ(line, "epoch,step,loss");
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    int epoch;
    long step;
    double loss;
    char c1, c2;
    ASSERT_TRUE(row >> epoch >> c1 >> step >> c2 >> loss) << line;
    EXPECT_EQ(c1, ',');
    EXPECT_EQ(c2, ',');
    EXPECT_EQ(epoch, 0);
    EXPECT_EQ(step, rows);
    EXPECT_EQ(loss, r.steps[rows].loss);
    ++rows;
  }
  EXPECT_EQ(rows, 2);
  std::remove(path.c_str());
}

TEST(Train, CheckpointCallbackFiresAtIntervalAndEnd) {
  FanModel<float> model(mini_fan_config(1));
  model.init(71);
  TrainConfig cfg;
  cfg.lr_schedule = {{0, 1e-3}};
  cfg.epochs = 5;
  cfg.batch_size = 8;
  cfg.checkpoint_interval = 2;
  std::vector<int> epochs;
  train_fan(model, dot_dataset(2, 72), cfg, identity_augment(), 73, {},
            [&epochs](int epoch) { epochs.push_back(epoch); });
  EXPECT_EQ(epochs, (std::vector<int>{1, 3, 4}));
}

TEST(Train, DepthHeatmapInputUpsamplesEncodedMaps) {
  LandmarkSet lm;
  lm.scheme = "test5";
  lm.visibility.assign(5, 1);
  for (int i = 0; i < 5; ++i) lm.points.push_back({4.0 + 5.0 * i, 6.0 + 4.0 * i, 0.0});
  const Extent image{32, 32}, heatmap{8, 8};
  auto up = depth_heatmap_input<float>(lm, image, heatmap);
  ASSERT_EQ(up.shape(), (Shape{1, 5, 32, 32}));
  auto base = encode_heatmaps<float>(lm, image, heatmap);
  for (std::size_t c = 0; c < 5; ++c)
    for (std::size_t y = 0; y < 32; ++y)
      for (std::size_t x = 0; x < 32; ++x)
        ASSERT_EQ(up.data()[(c * 32 + y) * 32 + x],
                  base.data()[(c * 8 + y / 4) * 8 + x / 4]);
  EXPECT_THROW(depth_heatmap_input<float>(lm, {30, 30}, heatmap), std::invalid_argument);
}

TEST(Train, DepthNetLossDecreasesOnTinyFixture) {
  DepthNetConfig cfg;
  cfg.n_landmarks = 5;
  cfg.tower = {{8, 1}, {16, 1}};
  DepthNetModel<float> model(cfg);
  model.init(81);
  TrainConfig tc;
  tc.lr_schedule = {{0, 1e-3}};
  tc.epochs = 30;
  tc.batch_size = 8;
  const TrainResult r = train_depth(model, dot_dataset(8, 82), tc, identity_augment(),
                                    83, Extent{8, 8});
  ASSERT_EQ(r.epoch_mean_loss.size(), 30u);
  EXPECT_LT(r.epoch_mean_loss.back(), 0.7 * r.epoch_mean_loss.front());
}

TEST(Train, RejectsWrongLandmarkCount) {
  FanModel<float> model(mini_fan_config(1));
  model.init(91);
  auto dataset = dot_dataset(2, 92);
  dataset[0].landmarks.points.pop_back();
  dataset[0].landmarks.visibility.pop_back();
  TrainConfig cfg;
  cfg.epochs = 1;
  EXPECT_THROW(train_fan(model, dataset, cfg, identity_augment(), 93),
               std::invalid_argument);
}

}  // namespace
