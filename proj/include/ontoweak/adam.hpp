#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>

#include "ontoweak/tape.hpp"

namespace ontoweak {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Decoupled: w <- w - lr * wd * w, applied before the moment update.
  double weight_decay = 0.0;
};

class Adam {
 public:
  explicit Adam(AdamOptions options) : options_(options) {}

  /// One update of every parameter in `params` from its `grad`. Throws
  /// TrainingError naming the first parameter with a non-finite gradient,
  /// before anything is modified.
  void step(std::span<Parameter* const> params);

  std::uint64_t steps() const { return step_; }
  const AdamOptions& options() const { return options_; }

  /// First and second moment buffers for a parameter; null before its first update.
  const Matrix* first_moment(const Parameter& p) const;
  const Matrix* second_moment(const Parameter& p) const;

 private:
  struct Moments {
    Matrix m;
    Matrix v;
  };
  AdamOptions options_;
  std::uint64_t step_ = 0;
  std::unordered_map<const Parameter*, Moments> moments_;
};

}  // namespace ontoweak
