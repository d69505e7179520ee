#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hgl/tensor.hpp"

namespace hgl {

enum class OptimKind { rmsprop, sgd };

struct OptimConfig {
  OptimKind kind = OptimKind::rmsprop;
  double alpha = 0.99;  // rmsprop squared-gradient decay
  double eps = 1e-8;
};

/// Thrown when a step is rejected because some gradient is not finite.
/// The training loop catches it and reports the offending batch.
class BadGradient : public std::runtime_error {
 public:
  explicit BadGradient(const std::string& what) : std::runtime_error(what) {}
};

template <typename T>
class Optimizer {
 public:
  Optimizer(OptimConfig cfg, std::vector<Tensor<T>> params)
      : cfg_(cfg), params_(std::move(params)) {
    op_check(cfg_.alpha > 0.0 && cfg_.alpha < 1.0,
             "optimizer: alpha must be in (0,1), got " + std::to_string(cfg_.alpha));
    op_check(cfg_.eps > 0.0, "optimizer: eps must be positive");
    if (cfg_.kind == OptimKind::rmsprop) {
      sq_avg_.reserve(params_.size());
      for (const auto& p : params_) sq_avg_.emplace_back(p.numel(), T(0));
    }
  }

  const std::vector<Tensor<T>>& params() const { return params_; }

  /// Applies one update. A parameter whose grad buffer was never touched is
  /// treated as having zero gradient. Rejects the whole step, mutating
  /// nothing, if any gradient element is not finite.
  void step(double lr) {
    for (std::size_t i = 0; i < params_.size(); ++i)
      for (T g : params_[i].grad())
        if (!std::isfinite(static_cast<double>(g)))
          throw BadGradient("non-finite gradient in parameter " + std::to_string(i));

    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& data = params_[i].data();
      const auto& grad = params_[i].grad();
      if (grad.empty()) continue;
      if (cfg_.kind == OptimKind::sgd) {
        for (std::size_t j = 0; j < data.size(); ++j)
          data[j] -= static_cast<T>(lr) * grad[j];
      } else {
        auto& v = sq_avg_[i];
        const T a = static_cast<T>(cfg_.alpha);
        for (std::size_t j = 0; j < data.size(); ++j) {
          v[j] = a * v[j] + (T(1) - a) * grad[j] * grad[j];
          data[j] -= static_cast<T>(lr) * grad[j] /
                     (std::sqrt(v[j]) + static_cast<T>(cfg_.eps));
        }
      }
    }
  }

 private:
  OptimConfig cfg_;
  std::vector<Tensor<T>> params_;
  std::vector<std::vector<T>> sq_avg_;
};

/// Right-continuous step schedule: the rate at `epoch` is the value of the
/// last entry whose epoch is <= it. Entries must start at epoch 0, ascend,
/// and never raise the rate.
inline void validate_schedule(const std::vector<std::pair<int, double>>& schedule) {
  op_check(!schedule.empty(), "lr schedule: empty");
  op_check(schedule.front().first == 0, "lr schedule: first entry must be epoch 0");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    op_check(schedule[i].second > 0.0, "lr schedule: rates must be positive");
    if (i > 0) {
      op_check(schedule[i].first > schedule[i - 1].first,
               "lr schedule: epochs must be strictly increasing");
      op_check(schedule[i].second <= schedule[i - 1].second,
               "lr schedule: rates must be non-increasing");
    }
  }
}

inline double lr_at(int epoch, const std::vector<std::pair<int, double>>& schedule) {
  validate_schedule(schedule);
  op_check(epoch >= 0, "lr_at: negative epoch");
  double lr = schedule.front().second;
  for (const auto& [start, rate] : schedule)
    if (start <= epoch) lr = rate;
  return lr;
}

}  // namespace hgl
