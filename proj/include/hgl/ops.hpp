#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "hgl/tensor.hpp"

namespace hgl {

enum class BnMode { train, eval };

namespace detail {

// Valid output range [lo, hi] for one kernel tap: index = o*stride + offset
// must land in [0, extent). hi < lo means the tap never lands inside.
struct TapRange {
  std::ptrdiff_t lo, hi;
};

inline TapRange tap_range(std::ptrdiff_t offset, std::ptrdiff_t stride,
                          std::ptrdiff_t extent, std::ptrdiff_t out_extent) {
  std::ptrdiff_t lo = 0;
  if (offset < 0) lo = (-offset + stride - 1) / stride;
  std::ptrdiff_t hi = out_extent - 1;
  if (extent - 1 - offset < hi * stride) hi = (extent - 1 - offset) / stride;
  return {lo, hi};
}

}  // namespace detail

/// 2D cross-correlation (deep-learning "convolution", no kernel flip).
/// input (N,Cin,H,W), weight (Cout,Cin,kh,kw), optional bias (Cout).
/// Output extent: floor((H + 2*padding - kh)/stride) + 1, same for W.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight,
                 const std::type_identity_t<std::optional<Tensor<T>>>& bias,
                 int stride = 1, int padding = 0) {
  op_check(input.ndim() == 4, "conv2d: input must be 4-d, got " + shape_str(input.shape()));
  op_check(weight.ndim() == 4, "conv2d: weight must be 4-d, got " + shape_str(weight.shape()));
  op_check(stride >= 1, "conv2d: stride must be >= 1");
  op_check(padding >= 0, "conv2d: padding must be >= 0");
  const std::ptrdiff_t N = input.dim(0), Cin = input.dim(1), H = input.dim(2), W = input.dim(3);
  const std::ptrdiff_t Cout = weight.dim(0), KH = weight.dim(2), KW = weight.dim(3);
  op_check(KH >= 1 && KW >= 1, "conv2d: kernel extent must be >= 1");
  op_check(static_cast<std::ptrdiff_t>(weight.dim(1)) == Cin,
           "conv2d: channel mismatch between input " + shape_str(input.shape()) +
               " and weight " + shape_str(weight.shape()));
  if (bias) {
    op_check(bias->ndim() == 1 && static_cast<std::ptrdiff_t>(bias->dim(0)) == Cout,
             "conv2d: bias must be (" + std::to_string(Cout) + "), got " +
                 shape_str(bias->shape()));
  }
  const std::ptrdiff_t Ho = (H + 2 * padding - KH) / stride + 1;
  const std::ptrdiff_t Wo = (W + 2 * padding - KW) / stride + 1;
  op_check(H + 2 * padding >= KH && W + 2 * padding >= KW && Ho >= 1 && Wo >= 1,
           "conv2d: non-positive output extent for input " + shape_str(input.shape()) +
               ", weight " + shape_str(weight.shape()) + ", stride " + std::to_string(stride) +
               ", padding " + std::to_string(padding));

  std::vector<T> out(static_cast<std::size_t>(N * Cout * Ho * Wo), T(0));
  const T* in = input.data().data();
  const T* w = weight.data().data();
  if (bias) {
    const T* b = bias->data().data();
    for (std::ptrdiff_t n = 0; n < N; ++n)
      for (std::ptrdiff_t co = 0; co < Cout; ++co)
        std::fill_n(out.data() + (n * Cout + co) * Ho * Wo, Ho * Wo, b[co]);
  }
  for (std::ptrdiff_t n = 0; n < N; ++n) {
    for (std::ptrdiff_t co = 0; co < Cout; ++co) {
      T* out_plane = out.data() + (n * Cout + co) * Ho * Wo;
      for (std::ptrdiff_t ci = 0; ci < Cin; ++ci) {
        const T* in_plane = in + (n * Cin + ci) * H * W;
        const T* w_plane = w + (co * Cin + ci) * KH * KW;
        for (std::ptrdiff_t kh = 0; kh < KH; ++kh) {
          const std::ptrdiff_t offh = kh - padding;
          const auto rh = detail::tap_range(offh, stride, H, Ho);
          for (std::ptrdiff_t kw = 0; kw < KW; ++kw) {
            const T wv = w_plane[kh * KW + kw];
            const std::ptrdiff_t offw = kw - padding;
            const auto rw = detail::tap_range(offw, stride, W, Wo);
            for (std::ptrdiff_t oh = rh.lo; oh <= rh.hi; ++oh) {
              const T* in_row = in_plane + (oh * stride + offh) * W + offw;
              T* out_row = out_plane + oh * Wo;
              for (std::ptrdiff_t ow = rw.lo; ow <= rw.hi; ++ow)
                out_row[ow] += wv * in_row[ow * stride];
            }
          }
        }
      }
    }
  }

  std::vector<Tensor<T>> parents{input, weight};
  if (bias) parents.push_back(*bias);
  auto* xn = input.node().get();
  auto* wn = weight.node().get();
  auto* bn = bias ? bias->node().get() : nullptr;
  const std::ptrdiff_t s = stride, p = padding;
  return Tensor<T>::make_op(
      {static_cast<std::size_t>(N), static_cast<std::size_t>(Cout),
       static_cast<std::size_t>(Ho), static_cast<std::size_t>(Wo)},
      std::move(out), std::move(parents),
      [=](typename Tensor<T>::Node& self) {
        const T* g = self.grad.data();
        const bool need_x = xn->requires_grad;
        const bool need_w = wn->requires_grad;
        if (need_x) xn->ensure_grad();
        if (need_w) wn->ensure_grad();
        if (bn && bn->requires_grad) {
          bn->ensure_grad();
          for (std::ptrdiff_t co = 0; co < Cout; ++co) {
            T acc = T(0);
            for (std::ptrdiff_t n = 0; n < N; ++n) {
              const T* grow = g + (n * Cout + co) * Ho * Wo;
              for (std::ptrdiff_t i = 0; i < Ho * Wo; ++i) acc += grow[i];
            }
            bn->grad[co] += acc;
          }
        }
        if (!need_x && !need_w) return;
        for (std::ptrdiff_t n = 0; n < N; ++n) {
          for (std::ptrdiff_t co = 0; co < Cout; ++co) {
            const T* g_plane = g + (n * Cout + co) * Ho * Wo;
            for (std::ptrdiff_t ci = 0; ci < Cin; ++ci) {
              const T* in_plane = xn->data.data() + (n * Cin + ci) * H * W;
              T* gx_plane = need_x ? xn->grad.data() + (n * Cin + ci) * H * W : nullptr;
              const T* w_plane = wn->data.data() + (co * Cin + ci) * KH * KW;
              T* gw_plane = need_w ? wn->grad.data() + (co * Cin + ci) * KH * KW : nullptr;
              for (std::ptrdiff_t kh = 0; kh < KH; ++kh) {
                const std::ptrdiff_t offh = kh - p;
                const auto rh = detail::tap_range(offh, s, H, Ho);
                for (std::ptrdiff_t kw = 0; kw < KW; ++kw) {
                  const std::ptrdiff_t offw = kw - p;
                  const auto rw = detail::tap_range(offw, s, W, Wo);
                  const T wv = w_plane[kh * KW + kw];
                  T wacc = T(0);
                  for (std::ptrdiff_t oh = rh.lo; oh <= rh.hi; ++oh) {
                    const T* g_row = g_plane + oh * Wo;
                    const std::ptrdiff_t row_off = (oh * s + offh) * W + offw;
                    if (need_w) {
                      const T* in_row = in_plane + row_off;
                      for (std::ptrdiff_t ow = rw.lo; ow <= rw.hi; ++ow)
                        wacc += g_row[ow] * in_row[ow * s];
                    }
                    if (need_x) {
                      T* gx_row = gx_plane + row_off;
                      for (std::ptrdiff_t ow = rw.lo; ow <= rw.hi; ++ow)
                        gx_row[ow * s] += wv * g_row[ow];
                    }
                  }
                  if (need_w) gw_plane[kh * KW + kw] += wacc;
                }
              }
            }
          }
        }
      });
}

/// Max pooling; argmax retained for backward, ties broken toward the first
/// index in row-major window scan order.
template <typename T>
Tensor<T> maxpool2d(const Tensor<T>& input, int window, int stride) {
  op_check(input.ndim() == 4, "maxpool2d: input must be 4-d, got " + shape_str(input.shape()));
  op_check(window >= 1 && stride >= 1, "maxpool2d: window and stride must be >= 1");
  const std::ptrdiff_t N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  op_check(window <= H && window <= W,
           "maxpool2d: window " + std::to_string(window) + " larger than spatial extent of " +
               shape_str(input.shape()));
  const std::ptrdiff_t Ho = (H - window) / stride + 1;
  const std::ptrdiff_t Wo = (W - window) / stride + 1;

  std::vector<T> out(static_cast<std::size_t>(N * C * Ho * Wo));
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.size());
  const T* in = input.data().data();
  std::size_t o = 0;
  for (std::ptrdiff_t nc = 0; nc < N * C; ++nc) {
    const T* plane = in + nc * H * W;
    for (std::ptrdiff_t oh = 0; oh < Ho; ++oh) {
      for (std::ptrdiff_t ow = 0; ow < Wo; ++ow, ++o) {
        std::ptrdiff_t base = (oh * stride) * W + ow * stride;
        T best = plane[base];
        std::ptrdiff_t best_at = base;
        for (std::ptrdiff_t kh = 0; kh < window; ++kh) {
          for (std::ptrdiff_t kw = 0; kw < window; ++kw) {
            std::ptrdiff_t at = base + kh * W + kw;
            if (plane[at] > best) {
              best = plane[at];
              best_at = at;
            }
          }
        }
        out[o] = best;
        (*argmax)[o] = static_cast<std::size_t>(nc * H * W + best_at);
      }
    }
  }

  auto* xn = input.node().get();
  return Tensor<T>::make_op(
      {static_cast<std::size_t>(N), static_cast<std::size_t>(C),
       static_cast<std::size_t>(Ho), static_cast<std::size_t>(Wo)},
      std::move(out), {input},
      [xn, argmax](typename Tensor<T>::Node& self) {
        xn->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i)
          xn->grad[(*argmax)[i]] += self.grad[i];
      });
}

/// Nearest-neighbour upsampling: each cell replicated into a factor x factor
/// block. Backward sums the block gradients.
template <typename T>
Tensor<T> upsample_nearest(const Tensor<T>& input, int factor) {
  op_check(input.ndim() == 4, "upsample_nearest: input must be 4-d, got " + shape_str(input.shape()));
  op_check(factor >= 1, "upsample_nearest: factor must be >= 1");
  const std::ptrdiff_t N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const std::ptrdiff_t f = factor, Ho = H * f, Wo = W * f;

  std::vector<T> out(static_cast<std::size_t>(N * C * Ho * Wo));
  const T* in = input.data().data();
  for (std::ptrdiff_t nc = 0; nc < N * C; ++nc) {
    const T* plane = in + nc * H * W;
    T* out_plane = out.data() + nc * Ho * Wo;
    for (std::ptrdiff_t oh = 0; oh < Ho; ++oh) {
      const T* in_row = plane + (oh / f) * W;
      T* out_row = out_plane + oh * Wo;
      for (std::ptrdiff_t ow = 0; ow < Wo; ++ow) out_row[ow] = in_row[ow / f];
    }
  }

  auto* xn = input.node().get();
  return Tensor<T>::make_op(
      {static_cast<std::size_t>(N), static_cast<std::size_t>(C),
       static_cast<std::size_t>(Ho), static_cast<std::size_t>(Wo)},
      std::move(out), {input},
      [xn, N, C, H, W, f, Ho, Wo](typename Tensor<T>::Node& self) {
        xn->ensure_grad();
        for (std::ptrdiff_t nc = 0; nc < N * C; ++nc) {
          const T* g_plane = self.grad.data() + nc * Ho * Wo;
          T* gx_plane = xn->grad.data() + nc * H * W;
          for (std::ptrdiff_t oh = 0; oh < Ho; ++oh) {
            const T* g_row = g_plane + oh * Wo;
            T* gx_row = gx_plane + (oh / f) * W;
            for (std::ptrdiff_t ow = 0; ow < Wo; ++ow) gx_row[ow / f] += g_row[ow];
          }
        }
      });
}

/// Batch normalisation over (N,H,W) per channel. Train mode normalises by
/// batch moments (population variance) and updates the running moments in
/// place with the given momentum; eval mode normalises by the running
/// moments. running_mean / running_var are plain state tensors, not part of
/// the differentiated graph.
template <typename T>
Tensor<T> batchnorm2d(const Tensor<T>& input, const Tensor<T>& gamma,
                      const Tensor<T>& beta, Tensor<T>& running_mean,
                      Tensor<T>& running_var, BnMode mode, T eps = T(1e-5),
                      T momentum = T(0.1)) {
  op_check(input.ndim() == 4, "batchnorm2d: input must be 4-d, got " + shape_str(input.shape()));
  const std::ptrdiff_t N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  op_check(N * H * W >= 1, "batchnorm2d: empty normalisation population");
  op_check(eps > T(0), "batchnorm2d: epsilon must be > 0");
  const Tensor<T>* per_channel[] = {&gamma, &beta, &running_mean, &running_var};
  for (const Tensor<T>* t : per_channel)
    op_check(t->ndim() == 1 && static_cast<std::ptrdiff_t>(t->dim(0)) == C,
             "batchnorm2d: per-channel tensor must be (" + std::to_string(C) + "), got " +
                 shape_str(t->shape()));

  const std::ptrdiff_t M = N * H * W;  // population per channel
  std::vector<T> mean(C), inv_std(C);
  if (mode == BnMode::train) {
    for (std::ptrdiff_t c = 0; c < C; ++c) {
      T mu = T(0);
      for (std::ptrdiff_t n = 0; n < N; ++n) {
        const T* plane = input.data().data() + (n * C + c) * H * W;
        for (std::ptrdiff_t i = 0; i < H * W; ++i) mu += plane[i];
      }
      mu /= static_cast<T>(M);
      T var = T(0);
      for (std::ptrdiff_t n = 0; n < N; ++n) {
        const T* plane = input.data().data() + (n * C + c) * H * W;
        for (std::ptrdiff_t i = 0; i < H * W; ++i) {
          T d = plane[i] - mu;
          var += d * d;
        }
      }
      var /= static_cast<T>(M);
      mean[c] = mu;
      inv_std[c] = T(1) / std::sqrt(var + eps);
      running_mean.data()[c] = (T(1) - momentum) * running_mean.data()[c] + momentum * mu;
      running_var.data()[c] = (T(1) - momentum) * running_var.data()[c] + momentum * var;
    }
  } else {
    for (std::ptrdiff_t c = 0; c < C; ++c) {
      mean[c] = running_mean.data()[c];
      inv_std[c] = T(1) / std::sqrt(running_var.data()[c] + eps);
    }
  }

  std::vector<T> out(input.numel());
  for (std::ptrdiff_t n = 0; n < N; ++n) {
    for (std::ptrdiff_t c = 0; c < C; ++c) {
      const T* in_plane = input.data().data() + (n * C + c) * H * W;
      T* out_plane = out.data() + (n * C + c) * H * W;
      const T g = gamma.data()[c], b = beta.data()[c], mu = mean[c], inv = inv_std[c];
      for (std::ptrdiff_t i = 0; i < H * W; ++i)
        out_plane[i] = g * (in_plane[i] - mu) * inv + b;
    }
  }

  auto* xn = input.node().get();
  auto* gn = gamma.node().get();
  auto* bn = beta.node().get();
  const bool train = mode == BnMode::train;
  return Tensor<T>::make_op(
      input.shape(), std::move(out), {input, gamma, beta},
      [xn, gn, bn, mean, inv_std, N, C, H, W, M, train](typename Tensor<T>::Node& self) {
        const std::ptrdiff_t HW = H * W;
        std::vector<T> sum_g(C, T(0)), sum_gx(C, T(0));
        for (std::ptrdiff_t n = 0; n < N; ++n) {
          for (std::ptrdiff_t c = 0; c < C; ++c) {
            const T* g_plane = self.grad.data() + (n * C + c) * HW;
            const T* in_plane = xn->data.data() + (n * C + c) * HW;
            const T mu = mean[c], inv = inv_std[c];
            T sg = T(0), sgx = T(0);
            for (std::ptrdiff_t i = 0; i < HW; ++i) {
              sg += g_plane[i];
              sgx += g_plane[i] * (in_plane[i] - mu) * inv;
            }
            sum_g[c] += sg;
            sum_gx[c] += sgx;
          }
        }
        if (gn->requires_grad) {
          gn->ensure_grad();
          for (std::ptrdiff_t c = 0; c < C; ++c) gn->grad[c] += sum_gx[c];
        }
        if (bn->requires_grad) {
          bn->ensure_grad();
          for (std::ptrdiff_t c = 0; c < C; ++c) bn->grad[c] += sum_g[c];
        }
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::ptrdiff_t n = 0; n < N; ++n) {
          for (std::ptrdiff_t c = 0; c < C; ++c) {
            const T* g_plane = self.grad.data() + (n * C + c) * HW;
            const T* in_plane = xn->data.data() + (n * C + c) * HW;
            T* gx_plane = xn->grad.data() + (n * C + c) * HW;
            const T mu = mean[c], inv = inv_std[c], gam = gn->data[c];
            if (train) {
              const T mg = sum_g[c] / static_cast<T>(M);
              const T mgx = sum_gx[c] / static_cast<T>(M);
              for (std::ptrdiff_t i = 0; i < HW; ++i) {
                const T xhat = (in_plane[i] - mu) * inv;
                gx_plane[i] += gam * inv * (g_plane[i] - mg - xhat * mgx);
              }
            } else {
              for (std::ptrdiff_t i = 0; i < HW; ++i) gx_plane[i] += gam * inv * g_plane[i];
            }
          }
        }
      });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
  std::vector<T> out(input.numel());
  const auto& x = input.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] > T(0) ? x[i] : T(0);
  auto* xn = input.node().get();
  return Tensor<T>::make_op(input.shape(), std::move(out), {input},
                            [xn](typename Tensor<T>::Node& self) {
                              xn->ensure_grad();
                              for (std::size_t i = 0; i < self.grad.size(); ++i)
                                if (xn->data[i] > T(0)) xn->grad[i] += self.grad[i];
                            });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  op_check(a.shape() == b.shape(), "add: shape mismatch " + shape_str(a.shape()) + " vs " +
                                       shape_str(b.shape()));
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  auto* an = a.node().get();
  auto* bn = b.node().get();
  return Tensor<T>::make_op(a.shape(), std::move(out), {a, b},
                            [an, bn](typename Tensor<T>::Node& self) {
                              for (auto* pn : {an, bn}) {
                                if (!pn->requires_grad) continue;
                                pn->ensure_grad();
                                for (std::size_t i = 0; i < self.grad.size(); ++i)
                                  pn->grad[i] += self.grad[i];
                              }
                            });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  op_check(a.shape() == b.shape(), "sub: shape mismatch " + shape_str(a.shape()) + " vs " +
                                       shape_str(b.shape()));
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  auto* an = a.node().get();
  auto* bn = b.node().get();
  return Tensor<T>::make_op(a.shape(), std::move(out), {a, b},
                            [an, bn](typename Tensor<T>::Node& self) {
                              if (an->requires_grad) {
                                an->ensure_grad();
                                for (std::size_t i = 0; i < self.grad.size(); ++i)
                                  an->grad[i] += self.grad[i];
                              }
                              if (bn->requires_grad) {
                                bn->ensure_grad();
                                for (std::size_t i = 0; i < self.grad.size(); ++i)
                                  bn->grad[i] -= self.grad[i];
                              }
                            });
}

/// Element-wise product (no broadcasting).
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  op_check(a.shape() == b.shape(), "mul: shape mismatch " + shape_str(a.shape()) + " vs " +
                                       shape_str(b.shape()));
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  auto* an = a.node().get();
  auto* bn = b.node().get();
  return Tensor<T>::make_op(a.shape(), std::move(out), {a, b},
                            [an, bn](typename Tensor<T>::Node& self) {
                              if (an->requires_grad) {
                                an->ensure_grad();
                                for (std::size_t i = 0; i < self.grad.size(); ++i)
                                  an->grad[i] += self.grad[i] * bn->data[i];
                              }
                              if (bn->requires_grad) {
                                bn->ensure_grad();
                                for (std::size_t i = 0; i < self.grad.size(); ++i)
                                  bn->grad[i] += self.grad[i] * an->data[i];
                              }
                            });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * factor;
  auto* an = a.node().get();
  return Tensor<T>::make_op(a.shape(), std::move(out), {a},
                            [an, factor](typename Tensor<T>::Node& self) {
                              an->ensure_grad();
                              for (std::size_t i = 0; i < self.grad.size(); ++i)
                                an->grad[i] += factor * self.grad[i];
                            });
}

/// Channel-axis concatenation in argument order; all inputs share N,H,W.
template <typename T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& inputs) {
  op_check(!inputs.empty(), "concat_channels: empty input list");
  const std::size_t N = inputs[0].dim(0), H = inputs[0].dim(2), W = inputs[0].dim(3);
  std::size_t Ctot = 0;
  for (const auto& t : inputs) {
    op_check(t.ndim() == 4 && t.dim(0) == N && t.dim(2) == H && t.dim(3) == W,
             "concat_channels: incompatible shape " + shape_str(t.shape()) + " vs " +
                 shape_str(inputs[0].shape()));
    Ctot += t.dim(1);
  }
  std::vector<T> out(N * Ctot * H * W);
  std::size_t c0 = 0;
  for (const auto& t : inputs) {
    const std::size_t C = t.dim(1), plane = H * W;
    for (std::size_t n = 0; n < N; ++n)
      std::copy_n(t.data().data() + n * C * plane, C * plane,
                  out.data() + (n * Ctot + c0) * plane);
    c0 += C;
  }
  std::vector<typename Tensor<T>::Node*> nodes;
  for (const auto& t : inputs) nodes.push_back(t.node().get());
  return Tensor<T>::make_op(
      {N, Ctot, H, W}, std::move(out), inputs,
      [nodes, N, Ctot, H, W](typename Tensor<T>::Node& self) {
        const std::size_t plane = H * W;
        std::size_t c0 = 0;
        for (auto* pn : nodes) {
          const std::size_t C = pn->shape[1];
          if (pn->requires_grad) {
            pn->ensure_grad();
            for (std::size_t n = 0; n < N; ++n) {
              const T* g = self.grad.data() + (n * Ctot + c0) * plane;
              T* pg = pn->grad.data() + n * C * plane;
              for (std::size_t i = 0; i < C * plane; ++i) pg[i] += g[i];
            }
          }
          c0 += C;
        }
      });
}

/// Affine map: input (N,F) * weight (O,F)^T + bias (O) -> (N,O).
template <typename T>
Tensor<T> linear(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias) {
  op_check(input.ndim() == 2 && weight.ndim() == 2 && bias.ndim() == 1,
           "linear: expected input (N,F), weight (O,F), bias (O); got " +
               shape_str(input.shape()) + ", " + shape_str(weight.shape()) + ", " +
               shape_str(bias.shape()));
  const std::size_t N = input.dim(0), F = input.dim(1), O = weight.dim(0);
  op_check(weight.dim(1) == F && bias.dim(0) == O,
           "linear: shape mismatch between input " + shape_str(input.shape()) + ", weight " +
               shape_str(weight.shape()) + ", bias " + shape_str(bias.shape()));
  std::vector<T> out(N * O);
  for (std::size_t n = 0; n < N; ++n) {
    const T* x = input.data().data() + n * F;
    for (std::size_t o = 0; o < O; ++o) {
      const T* w = weight.data().data() + o * F;
      T acc = bias.data()[o];
      for (std::size_t f = 0; f < F; ++f) acc += x[f] * w[f];
      out[n * O + o] = acc;
    }
  }
  auto* xn = input.node().get();
  auto* wn = weight.node().get();
  auto* bn = bias.node().get();
  return Tensor<T>::make_op(
      {N, O}, std::move(out), {input, weight, bias},
      [xn, wn, bn, N, F, O](typename Tensor<T>::Node& self) {
        for (std::size_t n = 0; n < N; ++n) {
          const T* g = self.grad.data() + n * O;
          if (xn->requires_grad) {
            xn->ensure_grad();
            T* gx = xn->grad.data() + n * F;
            for (std::size_t o = 0; o < O; ++o) {
              const T* w = wn->data.data() + o * F;
              for (std::size_t f = 0; f < F; ++f) gx[f] += g[o] * w[f];
            }
          }
          if (wn->requires_grad) {
            wn->ensure_grad();
            const T* x = xn->data.data() + n * F;
            for (std::size_t o = 0; o < O; ++o) {
              T* gw = wn->grad.data() + o * F;
              for (std::size_t f = 0; f < F; ++f) gw[f] += g[o] * x[f];
            }
          }
          if (bn->requires_grad) {
            bn->ensure_grad();
            for (std::size_t o = 0; o < O; ++o) bn->grad[o] += g[o];
          }
        }
      });
}

/// Full reduction to a scalar (shape ()).
template <typename T>
Tensor<T> sum(const Tensor<T>& input) {
  T acc = T(0);
  for (T v : input.data()) acc += v;
  auto* xn = input.node().get();
  return Tensor<T>::make_op({}, {acc}, {input},
                            [xn](typename Tensor<T>::Node& self) {
                              xn->ensure_grad();
                              const T g = self.grad[0];
                              for (auto& v : xn->grad) v += g;
                            });
}

/// Global average pooling: (N,C,H,W) -> (N,C).
template <typename T>
Tensor<T> avgpool_global(const Tensor<T>& input) {
  op_check(input.ndim() == 4, "avgpool_global: input must be 4-d, got " + shape_str(input.shape()));
  const std::size_t N = input.dim(0), C = input.dim(1), HW = input.dim(2) * input.dim(3);
  std::vector<T> out(N * C);
  for (std::size_t nc = 0; nc < N * C; ++nc) {
    const T* plane = input.data().data() + nc * HW;
    T acc = T(0);
    for (std::size_t i = 0; i < HW; ++i) acc += plane[i];
    out[nc] = acc / static_cast<T>(HW);
  }
  auto* xn = input.node().get();
  return Tensor<T>::make_op({N, C}, std::move(out), {input},
                            [xn, N, C, HW](typename Tensor<T>::Node& self) {
                              xn->ensure_grad();
                              for (std::size_t nc = 0; nc < N * C; ++nc) {
                                const T g = self.grad[nc] / static_cast<T>(HW);
                                T* gx = xn->grad.data() + nc * HW;
                                for (std::size_t i = 0; i < HW; ++i) gx[i] += g;
                              }
                            });
}

}  // namespace hgl
