#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hgl/nn.hpp"
#include "hgl/ops.hpp"
#include "hgl/tensor.hpp"

namespace hgl {

enum class BlockKind { bottleneck, hpm };

struct HourglassConfig {
  int depth = 4;            // pooling levels
  std::size_t width = 256;  // feature channels, constant through the hourglass
  BlockKind block = BlockKind::hpm;
};

struct StemConfig {
  std::size_t c1 = 64;   // after the 7x7 stride-2 conv
  std::size_t c2 = 128;  // after the first block
};

struct FanConfig {
  int n_stacks = 4;
  std::size_t m_landmarks = 68;
  std::size_t heatmap_h = 64, heatmap_w = 64;  // working resolution, input/4
  HourglassConfig hourglass;
  StemConfig stem;

  std::size_t input_h() const { return heatmap_h * 4; }
  std::size_t input_w() const { return heatmap_w * 4; }
};

struct DepthStage {
  std::size_t width;
  int blocks;
};

struct DepthNetConfig {
  std::size_t n_landmarks = 68;
  std::vector<DepthStage> tower{{32, 2}, {64, 2}, {128, 2}, {256, 2}};
  BlockKind block = BlockKind::bottleneck;

  std::size_t input_channels() const { return 3 + n_landmarks; }
};

inline void validate_block(BlockKind kind, std::size_t in_c, std::size_t out_c) {
  op_check(in_c >= 1 && out_c >= 1, "block: channel counts must be >= 1");
  op_check(kind != BlockKind::hpm || out_c % 4 == 0,
           "block: hpm output channels must be divisible by 4, got " + std::to_string(out_c));
}

inline void validate(const HourglassConfig& c) {
  op_check(c.depth >= 1, "hourglass: depth must be >= 1");
  validate_block(c.block, c.width, c.width);
}

inline void validate(const FanConfig& c) {
  op_check(c.n_stacks >= 1, "fan: n_stacks must be >= 1");
  op_check(c.m_landmarks >= 1, "fan: m_landmarks must be >= 1");
  validate(c.hourglass);
  validate_block(c.hourglass.block, c.stem.c1, c.stem.c2);
  const std::size_t div = std::size_t{1} << c.hourglass.depth;
  op_check(c.heatmap_h % div == 0 && c.heatmap_w % div == 0,
           "fan: heatmap extent (" + std::to_string(c.heatmap_h) + "," +
               std::to_string(c.heatmap_w) + ") must be divisible by 2^depth = " +
               std::to_string(div));
}

inline void validate(const DepthNetConfig& c) {
  op_check(c.n_landmarks >= 1, "depthnet: n_landmarks must be >= 1");
  op_check(!c.tower.empty(), "depthnet: tower must have at least one stage");
  for (const auto& s : c.tower) {
    op_check(s.blocks >= 1, "depthnet: each stage needs >= 1 block");
    validate_block(c.block, s.width, s.width);
  }
}

namespace detail {

inline std::size_t block_w1(BlockKind k, std::size_t out) {
  return k == BlockKind::bottleneck ? std::max<std::size_t>(1, out / 2) : out / 2;
}
inline std::size_t block_w2(BlockKind k, std::size_t out) {
  return k == BlockKind::bottleneck ? std::max<std::size_t>(1, out / 2) : out / 4;
}

}  // namespace detail

/// Pre-activation residual block, bottleneck or hierarchical-multiscale.
/// Both preserve spatial extent; the skip is identity when channel counts
/// match, a 1x1 convolution otherwise.
template <typename T>
struct ResidualBlock {
  BlockKind kind;
  std::size_t in_c, out_c;
  BnLayer<T> bn1, bn2, bn3;
  Conv2dLayer<T> c1, c2, c3;
  std::optional<Conv2dLayer<T>> skip;

  ResidualBlock(const std::string& name, BlockKind kind_, std::size_t in, std::size_t out)
      : kind((validate_block(kind_, in, out), kind_)),
        in_c(in),
        out_c(out),
        bn1(name + ".bn1", in),
        bn2(name + ".bn2", detail::block_w1(kind_, out)),
        bn3(name + ".bn3", detail::block_w2(kind_, out)),
        c1(name + ".conv1", in, detail::block_w1(kind_, out),
           kind_ == BlockKind::bottleneck ? 1 : 3, 1,
           kind_ == BlockKind::bottleneck ? 0 : 1),
        c2(name + ".conv2", detail::block_w1(kind_, out), detail::block_w2(kind_, out), 3, 1, 1),
        c3(name + ".conv3", detail::block_w2(kind_, out),
           kind_ == BlockKind::bottleneck ? out : out / 4,
           kind_ == BlockKind::bottleneck ? 1 : 3, 1,
           kind_ == BlockKind::bottleneck ? 0 : 1) {
    if (in != out) skip.emplace(name + ".skip", in, out, 1, 1, 0);
  }

  Tensor<T> forward(const Tensor<T>& x, BnMode mode) {
    op_check(x.ndim() == 4 && x.dim(1) == in_c,
             "block: expected (N," + std::to_string(in_c) + ",H,W), got " + shape_str(x.shape()));
    Tensor<T> s = skip ? (*skip)(x) : x;
    Tensor<T> p1 = c1(relu(bn1(x, mode)));
    Tensor<T> p2 = c2(relu(bn2(p1, mode)));
    Tensor<T> p3 = c3(relu(bn3(p2, mode)));
    if (kind == BlockKind::bottleneck) return add(s, p3);
    return add(s, concat_channels<T>({p1, p2, p3}));
  }

  void init(std::uint64_t seed) {
    for (auto* b : {&bn1, &bn2, &bn3}) b->init(seed);
    for (auto* c : {&c1, &c2, &c3}) c->init(seed);
    if (skip) skip->init(seed);
  }

  void visit(const ParamVisitor<T>& v) {
    for (auto* b : {&bn1, &bn2, &bn3}) b->visit(v);
    for (auto* c : {&c1, &c2, &c3}) c->visit(v);
    if (skip) skip->visit(v);
  }
};

/// Recursive hourglass: branch before each pooling step, further blocks on
/// the pooled path, nearest-neighbour upsampling and element-wise addition
/// on the way back up. Output shape equals input shape.
template <typename T>
struct Hourglass {
  int depth;
  std::size_t width;
  ResidualBlock<T> up, low1, low3;
  std::unique_ptr<Hourglass<T>> inner;        // depth > 1
  std::unique_ptr<ResidualBlock<T>> bottom;   // depth == 1

  Hourglass(const std::string& name, int depth_, std::size_t width_, BlockKind kind)
      : depth(depth_),
        width(width_),
        up(name + ".up", kind, width_, width_),
        low1(name + ".low1", kind, width_, width_),
        low3(name + ".low3", kind, width_, width_) {
    op_check(depth_ >= 1, "hourglass: depth must be >= 1");
    if (depth_ > 1)
      inner = std::make_unique<Hourglass<T>>(name + ".inner", depth_ - 1, width_, kind);
    else
      bottom = std::make_unique<ResidualBlock<T>>(name + ".bottom", kind, width_, width_);
  }

  Tensor<T> forward(const Tensor<T>& x, BnMode mode) {
    const std::size_t div = std::size_t{1} << depth;
    op_check(x.ndim() == 4 && x.dim(2) % div == 0 && x.dim(3) % div == 0,
             "hourglass: spatial extent of " + shape_str(x.shape()) +
                 " not divisible by 2^depth = " + std::to_string(div));
    Tensor<T> branch = up.forward(x, mode);
    Tensor<T> main_path = low1.forward(maxpool2d(x, 2, 2), mode);
    main_path = inner ? inner->forward(main_path, mode) : bottom->forward(main_path, mode);
    main_path = low3.forward(main_path, mode);
    return add(upsample_nearest(main_path, 2), branch);
  }

  void init(std::uint64_t seed) {
    for (auto* b : {&up, &low1, &low3}) b->init(seed);
    if (inner) inner->init(seed);
    if (bottom) bottom->init(seed);
  }

  void visit(const ParamVisitor<T>& v) {
    for (auto* b : {&up, &low1, &low3}) b->visit(v);
    if (inner) inner->visit(v);
    if (bottom) bottom->visit(v);
  }
};

/// Stacked hourglasses with per-stack heatmap heads and intermediate
/// fusion: the next stack's input is prev + remap_feat(features) +
/// remap_heat(heatmaps), both remaps 1x1 convolutions.
template <typename T>
struct FanModel {
  FanConfig cfg;
  Conv2dLayer<T> stem_conv;
  BnLayer<T> stem_bn;
  ResidualBlock<T> stem_b1, stem_b2, stem_b3;

  struct Stack {
    Hourglass<T> hg;
    Conv2dLayer<T> head_conv;
    BnLayer<T> head_bn;
    Conv2dLayer<T> head_out;
    std::unique_ptr<Conv2dLayer<T>> remap_feat, remap_heat;  // absent on the last stack
  };
  std::vector<Stack> stacks;

  static FanConfig validated(FanConfig c) {
    validate(c);
    return c;
  }

  explicit FanModel(const FanConfig& c)
      : cfg(validated(c)),
        stem_conv("stem.conv", 3, cfg.stem.c1, 7, 2, 3),
        stem_bn("stem.bn", cfg.stem.c1),
        stem_b1("stem.block1", cfg.hourglass.block, cfg.stem.c1, cfg.stem.c2),
        stem_b2("stem.block2", cfg.hourglass.block, cfg.stem.c2, cfg.stem.c2),
        stem_b3("stem.block3", cfg.hourglass.block, cfg.stem.c2, cfg.hourglass.width) {
    const std::size_t w = cfg.hourglass.width, m = cfg.m_landmarks;
    for (int s = 0; s < cfg.n_stacks; ++s) {
      const std::string p = "stack." + std::to_string(s);
      Stack st{Hourglass<T>(p + ".hg", cfg.hourglass.depth, w, cfg.hourglass.block),
               Conv2dLayer<T>(p + ".head.conv", w, w, 1, 1, 0),
               BnLayer<T>(p + ".head.bn", w),
               Conv2dLayer<T>(p + ".head.out", w, m, 1, 1, 0),
               nullptr,
               nullptr};
      if (s + 1 < cfg.n_stacks) {
        st.remap_feat = std::make_unique<Conv2dLayer<T>>(p + ".remap_feat", w, w, 1, 1, 0);
        st.remap_heat = std::make_unique<Conv2dLayer<T>>(p + ".remap_heat", m, w, 1, 1, 0);
      }
      stacks.push_back(std::move(st));
    }
  }

  /// Returns one heatmap tensor (N, m, H, W) per stack, in stack order.
  std::vector<Tensor<T>> forward(const Tensor<T>& image, BnMode mode) {
    op_check(image.ndim() == 4 && image.dim(1) == 3,
             "fan: image must be (N,3,H,W), got " + shape_str(image.shape()));
    op_check(image.dim(2) == cfg.input_h() && image.dim(3) == cfg.input_w(),
             "fan: input " + shape_str(image.shape()) + " incompatible; this config requires (N,3," +
                 std::to_string(cfg.input_h()) + "," + std::to_string(cfg.input_w()) +
                 ") for heatmaps (" + std::to_string(cfg.heatmap_h) + "," +
                 std::to_string(cfg.heatmap_w) + ")");
    Tensor<T> x = relu(stem_bn(stem_conv(image), mode));
    x = stem_b1.forward(x, mode);
    x = maxpool2d(x, 2, 2);
    x = stem_b2.forward(x, mode);
    x = stem_b3.forward(x, mode);
    std::vector<Tensor<T>> heatmaps;
    heatmaps.reserve(stacks.size());
    for (auto& st : stacks) {
      Tensor<T> fs = st.hg.forward(x, mode);
      Tensor<T> t = relu(st.head_bn(st.head_conv(fs), mode));
      Tensor<T> hs = st.head_out(t);
      heatmaps.push_back(hs);
      if (st.remap_feat) x = add(add(x, (*st.remap_feat)(fs)), (*st.remap_heat)(hs));
    }
    return heatmaps;
  }

  void init(std::uint64_t seed) {
    stem_conv.init(seed);
    stem_bn.init(seed);
    for (auto* b : {&stem_b1, &stem_b2, &stem_b3}) b->init(seed);
    for (auto& st : stacks) {
      st.hg.init(seed);
      st.head_conv.init(seed);
      st.head_bn.init(seed);
      st.head_out.init(seed);
      if (st.remap_feat) st.remap_feat->init(seed);
      if (st.remap_heat) st.remap_heat->init(seed);
    }
  }

  void visit(const ParamVisitor<T>& v) {
    stem_conv.visit(v);
    stem_bn.visit(v);
    for (auto* b : {&stem_b1, &stem_b2, &stem_b3}) b->visit(v);
    for (auto& st : stacks) {
      st.hg.visit(v);
      st.head_conv.visit(v);
      st.head_bn.visit(v);
      st.head_out.visit(v);
      if (st.remap_feat) st.remap_feat->visit(v);
      if (st.remap_heat) st.remap_heat->visit(v);
    }
  }
};

/// Depth regressor: image and per-landmark heatmaps concatenated to 3+N
/// channels, a residual tower halving the extent per stage, global average
/// pooling, and a linear head of N per-landmark depths.
template <typename T>
struct DepthNetModel {
  DepthNetConfig cfg;
  std::vector<std::vector<ResidualBlock<T>>> stages;
  LinearLayer<T> head;

  static DepthNetConfig validated(DepthNetConfig c) {
    validate(c);
    return c;
  }

  explicit DepthNetModel(const DepthNetConfig& c)
      : cfg(validated(c)), head("head", cfg.tower.back().width, cfg.n_landmarks) {
    std::size_t in_c = cfg.input_channels();
    for (std::size_t i = 0; i < cfg.tower.size(); ++i) {
      std::vector<ResidualBlock<T>> blocks;
      for (int b = 0; b < cfg.tower[i].blocks; ++b) {
        const std::string name =
            "stage." + std::to_string(i) + ".block." + std::to_string(b);
        blocks.emplace_back(name, cfg.block, in_c, cfg.tower[i].width);
        in_c = cfg.tower[i].width;
      }
      stages.push_back(std::move(blocks));
    }
  }

  Tensor<T> forward(const Tensor<T>& image, const Tensor<T>& heatmaps, BnMode mode) {
    op_check(image.ndim() == 4 && image.dim(1) == 3,
             "depthnet: image must be (N,3,H,W), got " + shape_str(image.shape()));
    op_check(heatmaps.ndim() == 4 && heatmaps.dim(1) == cfg.n_landmarks,
             "depthnet: expected " + std::to_string(cfg.n_landmarks) +
                 " heatmap channels, got " + shape_str(heatmaps.shape()));
    op_check(heatmaps.dim(0) == image.dim(0) && heatmaps.dim(2) == image.dim(2) &&
                 heatmaps.dim(3) == image.dim(3),
             "depthnet: image " + shape_str(image.shape()) + " and heatmaps " +
                 shape_str(heatmaps.shape()) + " disagree");
    Tensor<T> x = concat_channels<T>({image, heatmaps});
    for (auto& stage : stages) {
      x = maxpool2d(x, 2, 2);
      for (auto& block : stage) x = block.forward(x, mode);
    }
    return head(avgpool_global(x));
  }

  void init(std::uint64_t seed) {
    for (auto& stage : stages)
      for (auto& block : stage) block.init(seed);
    head.init(seed);
  }

  void visit(const ParamVisitor<T>& v) {
    for (auto& stage : stages)
      for (auto& block : stage) block.visit(v);
    head.visit(v);
  }
};

}  // namespace hgl
