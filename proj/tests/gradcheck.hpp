#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "hgl/rng.hpp"
#include "hgl/tensor.hpp"

namespace hgltest {

inline hgl::Tensor<double> random_tensor(const hgl::Shape& shape, hgl::Rng& rng,
                                         double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(hgl::shape_numel(shape));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return hgl::Tensor<double>::from_data(shape, std::move(v));
}

// Random values bounded away from zero, for ops with a kink at the origin.
inline hgl::Tensor<double> random_tensor_off_kink(const hgl::Shape& shape, hgl::Rng& rng,
                                                  double margin = 0.2) {
  std::vector<double> v(hgl::shape_numel(shape));
  for (auto& x : v) {
    double m = rng.uniform(margin, 1.0);
    x = rng.bernoulli(0.5) ? m : -m;
  }
  return hgl::Tensor<double>::from_data(shape, std::move(v));
}

// Central finite differences vs reverse-mode gradients. `build` must
// construct the scalar loss afresh from the given leaves on every call.
// Returns the worst element-wise relative error over all leaf gradients.
inline double max_rel_grad_error(
    const std::function<hgl::Tensor<double>(std::vector<hgl::Tensor<double>>&)>& build,
    std::vector<hgl::Tensor<double>> leaves, double h = 1e-6) {
  for (auto& t : leaves) {
    t.set_requires_grad(true);
    t.zero_grad();
  }
  hgl::backward(build(leaves));
  double worst = 0.0;
  for (auto& leaf : leaves) {
    std::vector<double> analytic(leaf.numel(), 0.0);
    if (!leaf.grad().empty()) analytic = leaf.grad();
    for (std::size_t i = 0; i < leaf.numel(); ++i) {
      const double keep = leaf.data()[i];
      leaf.data()[i] = keep + h;
      const double fp = build(leaves).item();
      leaf.data()[i] = keep - h;
      const double fm = build(leaves).item();
      leaf.data()[i] = keep;
      const double numeric = (fp - fm) / (2.0 * h);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-4});
      worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace hgltest
