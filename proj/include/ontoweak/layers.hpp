#pragma once

#include <string>

#include "ontoweak/ops.hpp"
#include "ontoweak/random.hpp"
#include "ontoweak/tape.hpp"

namespace ontoweak {

enum class Mode { kTrain, kEval };

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;
inline constexpr double kDefaultDropout = 0.5;

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

/// x * W (+ b). Parameters live in a ParameterSet owned by the model.
struct Linear {
  Parameter* weight = nullptr;
  Parameter* bias = nullptr;

  static Linear create(ParameterSet& params, const std::string& name, std::size_t in,
                       std::size_t out, bool with_bias, Rng& rng);
  /// Rebinds to parameters already present in `params` (checkpoint loading).
  static Linear bind(ParameterSet& params, const std::string& name, bool with_bias);

  std::size_t in_features() const { return weight->value.rows(); }
  std::size_t out_features() const { return weight->value.cols(); }
  Var forward(Tape& tape, Var x) const;
};

/// Per-column batch normalization with learned scale and shift. Running
/// statistics are non-trainable parameters so they travel with checkpoints.
struct BatchNorm {
  Parameter* gamma = nullptr;
  Parameter* beta = nullptr;
  Parameter* running_mean = nullptr;
  Parameter* running_var = nullptr;
  double momentum = kBatchNormMomentum;
  double eps = kBatchNormEps;

  static BatchNorm create(ParameterSet& params, const std::string& name, std::size_t width);
  static BatchNorm bind(ParameterSet& params, const std::string& name);

  /// Train mode normalizes with batch statistics (biased variance) and folds
  /// them into the running estimates (unbiased variance). Eval mode uses the
  /// running estimates only.
  Var forward(Tape& tape, Var x, Mode mode) const;
};

/// Inverted dropout: survivors are scaled by 1 / (1 - rate) in train mode;
/// eval mode is the identity.
Var dropout(Var x, double rate, Mode mode, Rng& rng);

/// Linear -> BatchNorm -> ReLU -> Dropout.
struct HiddenBlock {
  Linear linear;
  BatchNorm norm;
  double dropout_rate = kDefaultDropout;

  static HiddenBlock create(ParameterSet& params, const std::string& name, std::size_t in,
                            std::size_t out, double dropout_rate, Rng& rng);
  static HiddenBlock bind(ParameterSet& params, const std::string& name, double dropout_rate);

  Var forward(Tape& tape, Var x, Mode mode, Rng& rng) const;
};

}  // namespace ontoweak
