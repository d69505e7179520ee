#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "gradcheck.hpp"
#include "gtest/gtest.h"
#include "hgl/ops.hpp"
#include "hgl/rng.hpp"
#include "hgl/tensor.hpp"

using hgl::backward;
using hgl::BnMode;
using hgl::Rng;
using hgl::Shape;
using hgl::Tensor;
using hgltest::max_rel_grad_error;
using hgltest::random_tensor;
using hgltest::random_tensor_off_kink;

namespace {

// Bounds-checked scalar reference for cross-correlation, structured
// differently from the library loop on purpose.
std::vector<double> conv_reference(const std::vector<double>& in, std::size_t N,
                                   std::size_t Cin, std::size_t H, std::size_t W,
                                   const std::vector<double>& w, std::size_t Cout,
                                   std::size_t KH, std::size_t KW,
                                   const std::vector<double>* bias, int stride,
                                   int padding, std::size_t Ho, std::size_t Wo) {
  std::vector<double> out(N * Cout * Ho * Wo, 0.0);
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t co = 0; co < Cout; ++co)
      for (std::size_t oh = 0; oh < Ho; ++oh)
        for (std::size_t ow = 0; ow < Wo; ++ow) {
          double acc = bias ? (*bias)[co] : 0.0;
          for (std::size_t ci = 0; ci < Cin; ++ci)
            for (std::size_t kh = 0; kh < KH; ++kh)
              for (std::size_t kw = 0; kw < KW; ++kw) {
                std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh) * stride + kh - padding;
                std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow) * stride + kw - padding;
                if (ih < 0 || iw < 0 || ih >= static_cast<std::ptrdiff_t>(H) ||
                    iw >= static_cast<std::ptrdiff_t>(W))
                  continue;
                acc += in[((n * Cin + ci) * H + ih) * W + iw] *
                       w[((co * Cin + ci) * KH + kh) * KW + kw];
              }
          out[((n * Cout + co) * Ho + oh) * Wo + ow] = acc;
        }
  return out;
}

}  // namespace

TEST(Tensor, FactoriesAndIndexing) {
  auto t = Tensor<float>::zeros({2, 3});
  EXPECT_EQ(t.numel(), 6u);
  EXPECT_EQ(t.shape(), (Shape{2, 3}));
  for (float v : t.data()) EXPECT_EQ(v, 0.0f);

  auto f = Tensor<float>::full({2, 2}, 7.0f);
  EXPECT_EQ(f.at({1, 1}), 7.0f);

  auto d = Tensor<float>::from_data({2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(d.at({0, 2}), 3.0f);
  EXPECT_EQ(d.at({1, 0}), 4.0f);

  auto s = Tensor<float>::scalar(2.5f);
  EXPECT_EQ(s.ndim(), 0u);
  EXPECT_EQ(s.numel(), 1u);
  EXPECT_FLOAT_EQ(s.item(), 2.5f);

  EXPECT_THROW(Tensor<float>::from_data({2, 2}, {1, 2, 3}), std::invalid_argument);
}

TEST(Tensor, GradShapeMatchesData) {
  auto t = Tensor<float>::from_data({3, 2}, {1, 2, 3, 4, 5, 6}).set_requires_grad(true);
  t.zero_grad();
  EXPECT_EQ(t.grad().size(), t.data().size());
}

TEST(Tensor, BackwardRejectsNonScalar) {
  auto v = Tensor<double>::from_data({2}, {1, 2}).set_requires_grad(true);
  try {
    backward(v);
    FAIL() << "expected rejection of non-scalar loss";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("(2)"), std::string::npos) << e.what();
  }
}

TEST(Tensor, BackwardSquareSum) {
  auto w = Tensor<double>::from_data({2}, {1, 2}).set_requires_grad(true);
  backward(hgl::sum(hgl::mul(w, w)));
  ASSERT_EQ(w.grad().size(), 2u);
  EXPECT_DOUBLE_EQ(w.grad()[0], 2.0);
  EXPECT_DOUBLE_EQ(w.grad()[1], 4.0);
}

TEST(Tensor, BackwardAccumulatesUntilZeroed) {
  auto w = Tensor<double>::from_data({2}, {1, 2}).set_requires_grad(true);
  backward(hgl::sum(hgl::mul(w, w)));
  backward(hgl::sum(hgl::mul(w, w)));
  EXPECT_DOUBLE_EQ(w.grad()[0], 4.0);
  EXPECT_DOUBLE_EQ(w.grad()[1], 8.0);
  w.zero_grad();
  EXPECT_DOUBLE_EQ(w.grad()[0], 0.0);
  EXPECT_DOUBLE_EQ(w.grad()[1], 0.0);
}

TEST(Tensor, UnusedParameterGetsNoGradient) {
  auto used = Tensor<double>::from_data({2}, {1, 2}).set_requires_grad(true);
  auto unused = Tensor<double>::from_data({2}, {5, 5}).set_requires_grad(true);
  backward(hgl::sum(used));
  EXPECT_TRUE(unused.grad().empty());
  unused.zero_grad();
  for (double g : unused.grad()) EXPECT_EQ(g, 0.0);
}

TEST(Tensor, SharedParentAccumulatesThroughDiamond) {
  auto x = Tensor<double>::from_data({3}, {1, 2, 3}).set_requires_grad(true);
  backward(hgl::sum(hgl::add(x, x)));
  for (double g : x.grad()) EXPECT_DOUBLE_EQ(g, 2.0);
}

TEST(Conv2d, StemShape) {
  auto in = Tensor<float>::zeros({1, 3, 256, 256});
  auto w = Tensor<float>::zeros({64, 3, 7, 7});
  auto out = hgl::conv2d(in, w, std::nullopt, 2, 3);
  EXPECT_EQ(out.shape(), (Shape{1, 64, 128, 128}));
}

TEST(Conv2d, IdentityKernel) {
  auto in = Tensor<float>::from_data({1, 1, 1, 1}, {5});
  auto w = Tensor<float>::from_data({1, 1, 1, 1}, {1});
  auto out = hgl::conv2d(in, w, std::nullopt, 1, 0);
  EXPECT_EQ(out.shape(), (Shape{1, 1, 1, 1}));
  EXPECT_FLOAT_EQ(out.item(), 5.0f);
}

TEST(Conv2d, RejectsBadShapes) {
  auto in = Tensor<float>::zeros({1, 3, 8, 8});
  auto w_badc = Tensor<float>::zeros({4, 2, 3, 3});
  try {
    hgl::conv2d(in, w_badc, std::nullopt, 1, 1);
    FAIL() << "expected channel-mismatch rejection";
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("(1,3,8,8)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("(4,2,3,3)"), std::string::npos) << msg;
  }
  auto w_big = Tensor<float>::zeros({4, 3, 9, 9});
  EXPECT_THROW(hgl::conv2d(in, w_big, std::nullopt, 1, 0), std::invalid_argument);
  auto w = Tensor<float>::zeros({4, 3, 3, 3});
  auto bad_bias = Tensor<float>::zeros({5});
  EXPECT_THROW(hgl::conv2d(in, w, std::optional<Tensor<float>>(bad_bias), 1, 1),
               std::invalid_argument);
}

TEST(Conv2d, MatchesScalarReference) {
  Rng rng(7, "conv-ref");
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t H = 1 + rng.next_below(7), W = 1 + rng.next_below(7);
    const std::size_t KH = 1 + rng.next_below(3), KW = 1 + rng.next_below(3);
    const int stride = 1 + static_cast<int>(rng.next_below(3));
    const int padding = static_cast<int>(rng.next_below(3));
    if (H + 2 * padding < KH || W + 2 * padding < KW) continue;
    const std::size_t N = 1 + rng.next_below(2), Cin = 1 + rng.next_below(3);
    const std::size_t Cout = 1 + rng.next_below(3);
    auto in = random_tensor({N, Cin, H, W}, rng);
    auto w = random_tensor({Cout, Cin, KH, KW}, rng);
    auto b = random_tensor({Cout}, rng);
    auto out = hgl::conv2d(in, w, std::optional<Tensor<double>>(b), stride, padding);
    const std::size_t Ho = (H + 2 * padding - KH) / stride + 1;
    const std::size_t Wo = (W + 2 * padding - KW) / stride + 1;
    ASSERT_EQ(out.shape(), (Shape{N, Cout, Ho, Wo}));
    auto ref = conv_reference(in.data(), N, Cin, H, W, w.data(), Cout, KH, KW, &b.data(),
                              stride, padding, Ho, Wo);
    for (std::size_t i = 0; i < ref.size(); ++i)
      EXPECT_NEAR(out.data()[i], ref[i], 1e-12) << "trial " << trial << " elem " << i;
  }
}

TEST(Conv2d, GradientMatchesFiniteDifferences) {
  Rng rng(11, "conv-grad");
  auto in = random_tensor({1, 2, 5, 5}, rng);
  auto w = random_tensor({3, 2, 3, 3}, rng);
  auto b = random_tensor({3}, rng);
  auto probe = random_tensor({1, 3, 3, 3}, rng);  // fixed mixing weights
  auto build = [&probe](std::vector<Tensor<double>>& leaves) {
    auto y = hgl::conv2d(leaves[0], leaves[1], std::optional<Tensor<double>>(leaves[2]), 2, 1);
    return hgl::sum(hgl::mul(y, probe));
  };
  EXPECT_LT(max_rel_grad_error(build, {in, w, b}), 1e-4);

  auto probe2 = random_tensor({1, 3, 3, 3}, rng);
  auto build2 = [&probe2](std::vector<Tensor<double>>& leaves) {
    auto y = hgl::conv2d(leaves[0], leaves[1], std::nullopt, 1, 0);
    return hgl::sum(hgl::mul(y, probe2));
  };
  EXPECT_LT(max_rel_grad_error(build2, {in, w}), 1e-4);
}

TEST(Conv2d, LinearInInput) {
  Rng rng(13, "conv-lin");
  auto a = random_tensor({1, 2, 6, 6}, rng);
  auto b = random_tensor({1, 2, 6, 6}, rng);
  auto w = random_tensor({3, 2, 3, 3}, rng);
  auto lhs = hgl::conv2d(hgl::add(a, b), w, std::nullopt, 1, 1);
  auto rhs = hgl::add(hgl::conv2d(a, w, std::nullopt, 1, 1),
                      hgl::conv2d(b, w, std::nullopt, 1, 1));
  for (std::size_t i = 0; i < lhs.numel(); ++i) {
    double denom = std::max({std::abs(lhs.data()[i]), std::abs(rhs.data()[i]), 1e-5});
    EXPECT_LT(std::abs(lhs.data()[i] - rhs.data()[i]) / denom, 1e-5);
  }
}

TEST(Conv2d, DeterministicAcrossRuns) {
  Rng rng1(3, "conv-det");
  Rng rng2(3, "conv-det");
  auto run = [](Rng& rng) {
    auto in = random_tensor({2, 3, 9, 9}, rng);
    auto w = random_tensor({4, 3, 3, 3}, rng);
    return hgl::conv2d(in, w, std::nullopt, 2, 1);
  };
  auto o1 = run(rng1), o2 = run(rng2);
  ASSERT_EQ(o1.numel(), o2.numel());
  for (std::size_t i = 0; i < o1.numel(); ++i) EXPECT_EQ(o1.data()[i], o2.data()[i]);
}

TEST(Maxpool2d, WindowExamples) {
  auto in = Tensor<double>::from_data({1, 1, 2, 2}, {1, 2, 3, 4});
  auto out = hgl::maxpool2d(in, 2, 2);
  EXPECT_EQ(out.shape(), (Shape{1, 1, 1, 1}));
  EXPECT_DOUBLE_EQ(out.item(), 4.0);

  auto cst = Tensor<double>::full({1, 2, 4, 4}, 3.5);
  auto pooled = hgl::maxpool2d(cst, 2, 2);
  for (double v : pooled.data()) EXPECT_DOUBLE_EQ(v, 3.5);
}

TEST(Maxpool2d, BackwardRoutesToMaxOnly) {
  auto in = Tensor<double>::from_data({1, 1, 2, 2}, {1, 2, 3, 4}).set_requires_grad(true);
  backward(hgl::sum(hgl::maxpool2d(in, 2, 2)));
  std::vector<double> want{0, 0, 0, 1};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(in.grad()[i], want[i]);
}

TEST(Maxpool2d, TiesBreakTowardFirstIndex) {
  auto in = Tensor<double>::full({1, 1, 2, 2}, 7.0).set_requires_grad(true);
  backward(hgl::sum(hgl::maxpool2d(in, 2, 2)));
  std::vector<double> want{1, 0, 0, 0};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(in.grad()[i], want[i]);
}

TEST(Maxpool2d, RejectsOversizedWindow) {
  auto in = Tensor<double>::zeros({1, 1, 2, 2});
  EXPECT_THROW(hgl::maxpool2d(in, 3, 1), std::invalid_argument);
}

TEST(Maxpool2d, GradientMatchesFiniteDifferences) {
  Rng rng(17, "pool-grad");
  auto in = random_tensor({2, 2, 6, 6}, rng);
  auto probe = random_tensor({2, 2, 3, 3}, rng);
  auto build = [&probe](std::vector<Tensor<double>>& leaves) {
    return hgl::sum(hgl::mul(hgl::maxpool2d(leaves[0], 2, 2), probe));
  };
  EXPECT_LT(max_rel_grad_error(build, {in}), 1e-4);
}

TEST(Upsample, ReplicatesBlocks) {
  auto in = Tensor<double>::from_data({1, 1, 2, 2}, {1, 2, 3, 4});
  auto out = hgl::upsample_nearest(in, 2);
  ASSERT_EQ(out.shape(), (Shape{1, 1, 4, 4}));
  std::vector<double> want{1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4};
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_DOUBLE_EQ(out.data()[i], want[i]);

  auto same = hgl::upsample_nearest(in, 1);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(same.data()[i], in.data()[i]);
}

TEST(Upsample, BackwardSumsBlocks) {
  auto in = Tensor<double>::from_data({1, 1, 2, 2}, {1, 2, 3, 4}).set_requires_grad(true);
  backward(hgl::sum(hgl::upsample_nearest(in, 2)));
  for (double g : in.grad()) EXPECT_DOUBLE_EQ(g, 4.0);
}

TEST(Upsample, GradientMatchesFiniteDifferences) {
  Rng rng(19, "up-grad");
  auto in = random_tensor({1, 2, 3, 3}, rng);
  auto probe = random_tensor({1, 2, 6, 6}, rng);
  auto build = [&probe](std::vector<Tensor<double>>& leaves) {
    return hgl::sum(hgl::mul(hgl::upsample_nearest(leaves[0], 2), probe));
  };
  EXPECT_LT(max_rel_grad_error(build, {in}), 1e-4);
}

TEST(Batchnorm, TrainModeNormalisesByPopulationMoments) {
  auto in = Tensor<double>::from_data({2, 1, 1, 1}, {1, 3});
  auto gamma = Tensor<double>::full({1}, 1.0);
  auto beta = Tensor<double>::zeros({1});
  auto rm = Tensor<double>::zeros({1});
  auto rv = Tensor<double>::full({1}, 1.0);
  auto out = hgl::batchnorm2d(in, gamma, beta, rm, rv, BnMode::train);
  EXPECT_NEAR(out.data()[0], -1.0, 1e-4);
  EXPECT_NEAR(out.data()[1], 1.0, 1e-4);
  // running moments after momentum-0.1 update: mean 0.2, var 0.1 + 0.9
  EXPECT_NEAR(rm.data()[0], 0.2, 1e-12);
  EXPECT_NEAR(rv.data()[0], 0.9 * 1.0 + 0.1 * 1.0, 1e-12);
}

TEST(Batchnorm, ConstantChannelYieldsBeta) {
  auto in = Tensor<double>::full({1, 2, 3, 3}, 4.0);
  auto gamma = Tensor<double>::full({2}, 2.0);
  auto beta = Tensor<double>::from_data({2}, {0.5, -0.5});
  auto rm = Tensor<double>::zeros({2});
  auto rv = Tensor<double>::full({2}, 1.0);
  auto out = hgl::batchnorm2d(in, gamma, beta, rm, rv, BnMode::train);
  for (std::size_t c = 0; c < 2; ++c) {
    const double want = beta.data()[c];
    for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(out.data()[c * 9 + i], want, 1e-9);
  }
}

TEST(Batchnorm, EvalModeUsesRunningMoments) {
  Rng rng(23, "bn-eval");
  auto in = random_tensor({1, 2, 3, 3}, rng);
  auto gamma = Tensor<double>::full({2}, 1.0);
  auto beta = Tensor<double>::zeros({2});
  auto rm = Tensor<double>::zeros({2});
  auto rv = Tensor<double>::full({2}, 1.0);
  auto out = hgl::batchnorm2d(in, gamma, beta, rm, rv, BnMode::eval);
  for (std::size_t i = 0; i < in.numel(); ++i) EXPECT_NEAR(out.data()[i], in.data()[i], 1e-4);
}

TEST(Batchnorm, GradientMatchesFiniteDifferences) {
  Rng rng(29, "bn-grad");
  auto in = random_tensor({2, 2, 3, 3}, rng);
  auto gamma = random_tensor({2}, rng, 0.5, 1.5);
  auto beta = random_tensor({2}, rng);
  auto probe = random_tensor({2, 2, 3, 3}, rng);
  for (BnMode mode : {BnMode::train, BnMode::eval}) {
    auto build = [&probe, mode](std::vector<Tensor<double>>& leaves) {
      auto rm = hgl::Tensor<double>::from_data({2}, {0.1, -0.2});
      auto rv = hgl::Tensor<double>::from_data({2}, {0.8, 1.3});
      auto y = hgl::batchnorm2d(leaves[0], leaves[1], leaves[2], rm, rv, mode);
      return hgl::sum(hgl::mul(y, probe));
    };
    EXPECT_LT(max_rel_grad_error(build, {in, gamma, beta}), 1e-4)
        << (mode == BnMode::train ? "train" : "eval");
  }
}

TEST(Elementwise, ReluAddConcatExamples) {
  auto x = Tensor<double>::from_data({3}, {-1, 0, 2});
  auto r = hgl::relu(x);
  EXPECT_DOUBLE_EQ(r.data()[0], 0.0);
  EXPECT_DOUBLE_EQ(r.data()[1], 0.0);
  EXPECT_DOUBLE_EQ(r.data()[2], 2.0);

  Rng rng(31, "ew");
  auto a = random_tensor({2, 3}, rng);
  auto z = Tensor<double>::zeros({2, 3});
  auto s = hgl::add(a, z);
  for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_DOUBLE_EQ(s.data()[i], a.data()[i]);

  auto c1 = random_tensor({1, 2, 4, 4}, rng);
  auto c2 = random_tensor({1, 3, 4, 4}, rng);
  auto cat = hgl::concat_channels<double>({c1, c2});
  ASSERT_EQ(cat.shape(), (Shape{1, 5, 4, 4}));
  for (std::size_t i = 0; i < c1.numel(); ++i) EXPECT_DOUBLE_EQ(cat.data()[i], c1.data()[i]);
  for (std::size_t i = 0; i < c2.numel(); ++i)
    EXPECT_DOUBLE_EQ(cat.data()[c1.numel() + i], c2.data()[i]);

  EXPECT_THROW(hgl::add(a, Tensor<double>::zeros({3, 2})), std::invalid_argument);
  EXPECT_THROW(hgl::concat_channels<double>({c1, random_tensor({1, 2, 5, 4}, rng)}),
               std::invalid_argument);
}

TEST(Elementwise, GradientsMatchFiniteDifferences) {
  Rng rng(37, "ew-grad");
  auto a = random_tensor_off_kink({2, 2, 2, 2}, rng);
  auto b = random_tensor({2, 2, 2, 2}, rng);
  auto probe = random_tensor({2, 4, 2, 2}, rng);
  auto build = [&probe](std::vector<Tensor<double>>& leaves) {
    auto r = hgl::relu(leaves[0]);
    auto m = hgl::mul(leaves[0], leaves[1]);
    auto d = hgl::sub(leaves[0], leaves[1]);
    auto cat = hgl::concat_channels<double>({hgl::add(r, m), hgl::scale(d, 0.7)});
    return hgl::sum(hgl::mul(cat, probe));
  };
  EXPECT_LT(max_rel_grad_error(build, {a, b}), 1e-4);
}

TEST(Linear, Examples) {
  auto eye = Tensor<double>::from_data({2, 2}, {1, 0, 0, 1});
  auto zb = Tensor<double>::zeros({2});
  auto x = Tensor<double>::from_data({1, 2}, {3, 4});
  auto same = hgl::linear(x, eye, zb);
  EXPECT_DOUBLE_EQ(same.data()[0], 3.0);
  EXPECT_DOUBLE_EQ(same.data()[1], 4.0);

  auto w = Tensor<double>::from_data({1, 2}, {3, 4});
  auto b = Tensor<double>::from_data({1}, {5});
  auto y = hgl::linear(Tensor<double>::from_data({1, 2}, {1, 2}), w, b);
  EXPECT_DOUBLE_EQ(y.data()[0], 16.0);

  EXPECT_THROW(hgl::linear(x, Tensor<double>::zeros({2, 3}), zb), std::invalid_argument);
}

TEST(Linear, GradientMatchesFiniteDifferences) {
  Rng rng(41, "lin-grad");
  auto x = random_tensor({3, 4}, rng);
  auto w = random_tensor({2, 4}, rng);
  auto b = random_tensor({2}, rng);
  auto probe = random_tensor({3, 2}, rng);
  auto build = [&probe](std::vector<Tensor<double>>& leaves) {
    return hgl::sum(hgl::mul(hgl::linear(leaves[0], leaves[1], leaves[2]), probe));
  };
  EXPECT_LT(max_rel_grad_error(build, {x, w, b}), 1e-4);
}

TEST(AvgpoolGlobal, MeanAndGradient) {
  auto in = Tensor<double>::from_data({1, 2, 2, 2}, {1, 2, 3, 4, 10, 10, 10, 10});
  auto out = hgl::avgpool_global(in);
  ASSERT_EQ(out.shape(), (Shape{1, 2}));
  EXPECT_DOUBLE_EQ(out.data()[0], 2.5);
  EXPECT_DOUBLE_EQ(out.data()[1], 10.0);

  Rng rng(43, "gap-grad");
  auto x = random_tensor({2, 3, 4, 4}, rng);
  auto probe = random_tensor({2, 3}, rng);
  auto build = [&probe](std::vector<Tensor<double>>& leaves) {
    return hgl::sum(hgl::mul(hgl::avgpool_global(leaves[0]), probe));
  };
  EXPECT_LT(max_rel_grad_error(build, {x}), 1e-4);
}

TEST(ShapeAlgebra, ConvAndPoolFollowFloorFormula) {
  Rng rng(47, "shapes");
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t H = 1 + rng.next_below(12), W = 1 + rng.next_below(12);
    const std::size_t k = 1 + rng.next_below(4);
    const int stride = 1 + static_cast<int>(rng.next_below(3));
    const int padding = static_cast<int>(rng.next_below(3));
    if (H + 2 * padding < k || W + 2 * padding < k) continue;
    auto in = Tensor<float>::zeros({1, 1, H, W});
    auto w = Tensor<float>::zeros({1, 1, k, k});
    auto out = hgl::conv2d(in, w, std::nullopt, stride, padding);
    EXPECT_EQ(out.dim(2), (H + 2 * padding - k) / stride + 1);
    EXPECT_EQ(out.dim(3), (W + 2 * padding - k) / stride + 1);
    if (k <= H && k <= W) {
      auto pooled = hgl::maxpool2d(in, static_cast<int>(k), stride);
      EXPECT_EQ(pooled.dim(2), (H - k) / stride + 1);
      EXPECT_EQ(pooled.dim(3), (W - k) / stride + 1);
    }
  }
}
