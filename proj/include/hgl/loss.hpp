#pragma once

#include <cstdint>
#include <vector>

#include "hgl/ops.hpp"
#include "hgl/tensor.hpp"

namespace hgl {

namespace detail {

/// Constant per-channel 0/1 mask shaped like (N,m,H,W), built from N*m
/// visibility flags. Not part of the differentiated graph.
template <typename T>
Tensor<T> channel_mask(const Shape& shape, const std::vector<std::uint8_t>& visibility) {
  const std::size_t N = shape[0], m = shape[1], plane = shape[2] * shape[3];
  std::vector<T> mask(N * m * plane);
  for (std::size_t nc = 0; nc < N * m; ++nc)
    std::fill_n(mask.data() + nc * plane, plane, visibility[nc] ? T(1) : T(0));
  return Tensor<T>::from_data(shape, std::move(mask));
}

}  // namespace detail

/// Mean squared error over the heatmap cells of visible channels. With
/// masking on, invisible channels drop out of both the sum and the count;
/// with every channel invisible the loss is 0 and `all_invisible` is set.
template <typename T>
Tensor<T> heatmap_mse(const Tensor<T>& pred, const Tensor<T>& target,
                      const std::vector<std::uint8_t>& visibility, bool masking = true,
                      bool* all_invisible = nullptr) {
  op_check(pred.ndim() == 4, "heatmap_mse: pred must be (N,m,H,W), got " +
                                 shape_str(pred.shape()));
  op_check(pred.shape() == target.shape(), "heatmap_mse: shape mismatch " +
                                               shape_str(pred.shape()) + " vs " +
                                               shape_str(target.shape()));
  const std::size_t N = pred.dim(0), m = pred.dim(1);
  const std::size_t plane = pred.dim(2) * pred.dim(3);
  op_check(visibility.size() == N * m,
           "heatmap_mse: expected " + std::to_string(N * m) + " visibility flags, got " +
               std::to_string(visibility.size()));
  if (all_invisible) *all_invisible = false;

  std::size_t visible = N * m;
  if (masking) {
    visible = 0;
    for (auto v : visibility) visible += v ? 1 : 0;
    if (visible == 0) {
      if (all_invisible) *all_invisible = true;
      return Tensor<T>::scalar(T(0));
    }
  }
  Tensor<T> d = sub(pred, target);
  Tensor<T> sq = mul(d, d);
  if (masking && visible < N * m) sq = mul(sq, detail::channel_mask<T>(pred.shape(), visibility));
  return scale(sum(sq), T(1) / static_cast<T>(visible * plane));
}

/// Intermediate supervision: unweighted sum of per-stack heatmap MSEs.
template <typename T>
Tensor<T> fan_loss(const std::vector<Tensor<T>>& per_stack_preds, const Tensor<T>& target,
                   const std::vector<std::uint8_t>& visibility, bool masking = true,
                   bool* all_invisible = nullptr) {
  op_check(!per_stack_preds.empty(), "fan_loss: empty stack list");
  Tensor<T> total;
  for (const auto& pred : per_stack_preds) {
    Tensor<T> one = heatmap_mse(pred, target, visibility, masking, all_invisible);
    total = total.defined() ? add(total, one) : one;
  }
  return total;
}

/// Mean squared depth error over visible landmarks; masking as above.
template <typename T>
Tensor<T> depth_l2(const Tensor<T>& pred, const Tensor<T>& target,
                   const std::vector<std::uint8_t>& visibility, bool masking = true,
                   bool* all_invisible = nullptr) {
  op_check(pred.ndim() == 2, "depth_l2: pred must be (N,Nl), got " + shape_str(pred.shape()));
  op_check(pred.shape() == target.shape(), "depth_l2: shape mismatch " +
                                               shape_str(pred.shape()) + " vs " +
                                               shape_str(target.shape()));
  const std::size_t count = pred.numel();
  op_check(visibility.size() == count,
           "depth_l2: expected " + std::to_string(count) + " visibility flags, got " +
               std::to_string(visibility.size()));
  if (all_invisible) *all_invisible = false;

  std::size_t visible = count;
  if (masking) {
    visible = 0;
    for (auto v : visibility) visible += v ? 1 : 0;
    if (visible == 0) {
      if (all_invisible) *all_invisible = true;
      return Tensor<T>::scalar(T(0));
    }
  }
  Tensor<T> d = sub(pred, target);
  Tensor<T> sq = mul(d, d);
  if (masking && visible < count) {
    std::vector<T> mask(count);
    for (std::size_t i = 0; i < count; ++i) mask[i] = visibility[i] ? T(1) : T(0);
    sq = mul(sq, Tensor<T>::from_data(pred.shape(), std::move(mask)));
  }
  return scale(sum(sq), T(1) / static_cast<T>(visible));
}

}  // namespace hgl
