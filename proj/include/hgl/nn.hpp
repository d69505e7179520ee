#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hgl/ops.hpp"
#include "hgl/rng.hpp"
#include "hgl/tensor.hpp"

namespace hgl {

/// Callback over (dotted name, tensor, trainable). Running BN moments are
/// visited as non-trainable state so checkpoints capture them.
template <typename T>
using ParamVisitor = std::function<void(const std::string&, Tensor<T>&, bool)>;

namespace detail {

template <typename T>
void fill_fan_in_uniform(Tensor<T>& w, std::size_t fan_in, std::uint64_t seed,
                         const std::string& stream) {
  Rng rng(seed, stream);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (auto& v : w.data()) v = static_cast<T>(rng.uniform(-bound, bound));
}

}  // namespace detail

template <typename T>
struct Conv2dLayer {
  std::string name;
  std::size_t in_c, out_c, k;
  int stride, padding;
  Tensor<T> w, b;

  Conv2dLayer(std::string name_, std::size_t in_c_, std::size_t out_c_, std::size_t k_,
              int stride_, int padding_)
      : name(std::move(name_)),
        in_c(in_c_),
        out_c(out_c_),
        k(k_),
        stride(stride_),
        padding(padding_),
        w(Tensor<T>::zeros({out_c_, in_c_, k_, k_}).set_requires_grad(true)),
        b(Tensor<T>::zeros({out_c_}).set_requires_grad(true)) {}

  void init(std::uint64_t seed) {
    detail::fill_fan_in_uniform(w, in_c * k * k, seed, name + ".weight");
    std::fill(b.data().begin(), b.data().end(), T(0));
  }

  Tensor<T> operator()(const Tensor<T>& x) const { return conv2d(x, w, b, stride, padding); }

  void visit(const ParamVisitor<T>& v) {
    v(name + ".weight", w, true);
    v(name + ".bias", b, true);
  }
};

template <typename T>
struct BnLayer {
  std::string name;
  std::size_t channels;
  Tensor<T> gamma, beta, running_mean, running_var;

  BnLayer(std::string name_, std::size_t channels_)
      : name(std::move(name_)),
        channels(channels_),
        gamma(Tensor<T>::full({channels_}, T(1)).set_requires_grad(true)),
        beta(Tensor<T>::zeros({channels_}).set_requires_grad(true)),
        running_mean(Tensor<T>::zeros({channels_})),
        running_var(Tensor<T>::full({channels_}, T(1))) {}

  void init(std::uint64_t) {
    std::fill(gamma.data().begin(), gamma.data().end(), T(1));
    std::fill(beta.data().begin(), beta.data().end(), T(0));
    std::fill(running_mean.data().begin(), running_mean.data().end(), T(0));
    std::fill(running_var.data().begin(), running_var.data().end(), T(1));
  }

  Tensor<T> operator()(const Tensor<T>& x, BnMode mode) {
    return batchnorm2d(x, gamma, beta, running_mean, running_var, mode);
  }

  void visit(const ParamVisitor<T>& v) {
    v(name + ".gamma", gamma, true);
    v(name + ".beta", beta, true);
    v(name + ".running_mean", running_mean, false);
    v(name + ".running_var", running_var, false);
  }
};

template <typename T>
struct LinearLayer {
  std::string name;
  std::size_t in_f, out_f;
  Tensor<T> w, b;

  LinearLayer(std::string name_, std::size_t in_f_, std::size_t out_f_)
      : name(std::move(name_)),
        in_f(in_f_),
        out_f(out_f_),
        w(Tensor<T>::zeros({out_f_, in_f_}).set_requires_grad(true)),
        b(Tensor<T>::zeros({out_f_}).set_requires_grad(true)) {}

  void init(std::uint64_t seed) {
    detail::fill_fan_in_uniform(w, in_f, seed, name + ".weight");
    std::fill(b.data().begin(), b.data().end(), T(0));
  }

  Tensor<T> operator()(const Tensor<T>& x) const { return linear(x, w, b); }

  void visit(const ParamVisitor<T>& v) {
    v(name + ".weight", w, true);
    v(name + ".bias", b, true);
  }
};

/// Name-ordered snapshot of a model's parameters. Tensors are shared
/// handles, so mutating an entry mutates the model.
template <typename T>
struct NamedParam {
  Tensor<T> tensor;
  bool trainable;
};

template <typename T, typename Model>
std::map<std::string, NamedParam<T>> named_params(Model& model) {
  std::map<std::string, NamedParam<T>> out;
  model.visit([&out](const std::string& name, Tensor<T>& t, bool trainable) {
    op_check(out.emplace(name, NamedParam<T>{t, trainable}).second,
             "duplicate parameter name " + name);
  });
  return out;
}

template <typename T, typename Model>
std::vector<Tensor<T>> trainable_params(Model& model) {
  std::vector<Tensor<T>> out;
  for (auto& [name, p] : named_params<T>(model))
    if (p.trainable) out.push_back(p.tensor);
  return out;
}

template <typename T, typename Model>
void zero_grads(Model& model) {
  model.visit([](const std::string&, Tensor<T>& t, bool trainable) {
    if (trainable) t.zero_grad();
  });
}

}  // namespace hgl
