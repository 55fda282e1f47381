#include "ontoweak/layers.hpp"

#include <cmath>

#include "ontoweak/errors.hpp"

namespace ontoweak {

namespace {

Parameter& require(ParameterSet& params, const std::string& name) {
  Parameter* p = params.find(name);
  if (p == nullptr) throw FormatError("missing parameter " + name);
  return *p;
}

}  // namespace

Matrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix w(fan_in, fan_out);
  for (double& v : w.data()) v = uniform(rng, -limit, limit);
  return w;
}

Linear Linear::create(ParameterSet& params, const std::string& name, std::size_t in,
                      std::size_t out, bool with_bias, Rng& rng) {
  Linear layer;
  layer.weight = &params.add(name + ".weight", glorot_uniform(in, out, rng));
  if (with_bias) layer.bias = &params.add(name + ".bias", Matrix(1, out));
  return layer;
}

Linear Linear::bind(ParameterSet& params, const std::string& name, bool with_bias) {
  Linear layer;
  layer.weight = &require(params, name + ".weight");
  if (with_bias) layer.bias = &require(params, name + ".bias");
  return layer;
}

Var Linear::forward(Tape& tape, Var x) const {
  if (x.cols() != in_features())
    throw DimensionError("linear " + weight->name + ": input " + x.value().shape_string() +
                         " vs weight " + weight->value.shape_string());
  Var y = matmul(x, tape.parameter(*weight));
  if (bias != nullptr) y = add_row_bias(y, tape.parameter(*bias));
  return y;
}

BatchNorm BatchNorm::create(ParameterSet& params, const std::string& name, std::size_t width) {
  BatchNorm bn;
  bn.gamma = &params.add(name + ".gamma", Matrix(1, width, 1.0));
  bn.beta = &params.add(name + ".beta", Matrix(1, width, 0.0));
  bn.running_mean = &params.add(name + ".running_mean", Matrix(1, width, 0.0), false);
  bn.running_var = &params.add(name + ".running_var", Matrix(1, width, 1.0), false);
  return bn;
}

BatchNorm BatchNorm::bind(ParameterSet& params, const std::string& name) {
  BatchNorm bn;
  bn.gamma = &require(params, name + ".gamma");
  bn.beta = &require(params, name + ".beta");
  bn.running_mean = &require(params, name + ".running_mean");
  bn.running_var = &require(params, name + ".running_var");
  return bn;
}

Var BatchNorm::forward(Tape& tape, Var x, Mode mode) const {
  const Matrix& in = x.value();
  const std::size_t n = in.rows();
  const std::size_t width = in.cols();
  if (width != gamma->value.cols())
    throw DimensionError("batchnorm " + gamma->name + ": input " + in.shape_string());

  Matrix mean(1, width);
  Matrix inv_std(1, width);
  if (mode == Mode::kTrain) {
    if (n < 2) throw DimensionError("batchnorm in train mode needs a batch of at least 2");
    for (std::size_t c = 0; c < width; ++c) {
      double mu = 0.0;
      for (std::size_t r = 0; r < n; ++r) mu += in(r, c);
      mu /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t r = 0; r < n; ++r) var += (in(r, c) - mu) * (in(r, c) - mu);
      var /= static_cast<double>(n);
      mean(0, c) = mu;
      inv_std(0, c) = 1.0 / std::sqrt(var + eps);
      const double unbiased = var * static_cast<double>(n) / static_cast<double>(n - 1);
      running_mean->value(0, c) = (1.0 - momentum) * running_mean->value(0, c) + momentum * mu;
      running_var->value(0, c) = (1.0 - momentum) * running_var->value(0, c) + momentum * unbiased;
    }
  } else {
    for (std::size_t c = 0; c < width; ++c) {
      mean(0, c) = running_mean->value(0, c);
      inv_std(0, c) = 1.0 / std::sqrt(running_var->value(0, c) + eps);
    }
  }

  Matrix normalized(n, width);
  Matrix out(n, width);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < width; ++c) {
      normalized(r, c) = (in(r, c) - mean(0, c)) * inv_std(0, c);
      out(r, c) = gamma->value(0, c) * normalized(r, c) + beta->value(0, c);
    }

  const bool batch_stats = mode == Mode::kTrain;
  Var g = tape.parameter(*gamma);
  Var b = tape.parameter(*beta);
  return tape.record(
      std::move(out), {x, g, b},
      [normalized = std::move(normalized), inv_std = std::move(inv_std), batch_stats](
          const Matrix& dy, std::span<Matrix* const> gin, std::span<const Matrix* const> ins,
          const Matrix&) {
        const Matrix& gam = *ins[1];
        const std::size_t rows = dy.rows();
        const std::size_t cols = dy.cols();
        const double nd = static_cast<double>(rows);
        for (std::size_t c = 0; c < cols; ++c) {
          double sum_dy = 0.0;
          double sum_dy_xhat = 0.0;
          for (std::size_t r = 0; r < rows; ++r) {
            sum_dy += dy(r, c);
            sum_dy_xhat += dy(r, c) * normalized(r, c);
          }
          if (gin[1]) (*gin[1])(0, c) += sum_dy_xhat;
          if (gin[2]) (*gin[2])(0, c) += sum_dy;
          if (!gin[0]) continue;
          const double k = gam(0, c) * inv_std(0, c);
          for (std::size_t r = 0; r < rows; ++r) {
            if (batch_stats) {
              (*gin[0])(r, c) +=
                  k * (dy(r, c) - sum_dy / nd - normalized(r, c) * sum_dy_xhat / nd);
            } else {
              (*gin[0])(r, c) += k * dy(r, c);
            }
          }
        }
      });
}

Var dropout(Var x, double rate, Mode mode, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw ParameterError("dropout rate " + std::to_string(rate) + " outside [0, 1)");
  if (mode == Mode::kEval || rate == 0.0) return x;
  const Matrix& in = x.value();
  Matrix mask(in.rows(), in.cols());
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& m : mask.data()) m = bernoulli(rng, rate) ? 0.0 : keep_scale;
  Matrix out = in;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= mask.data()[i];
  return x.tape()->record(std::move(out), {x},
                          [mask = std::move(mask)](const Matrix& g, std::span<Matrix* const> gin,
                                                   std::span<const Matrix* const>,
                                                   const Matrix&) {
                            if (!gin[0]) return;
                            for (std::size_t i = 0; i < g.size(); ++i)
                              gin[0]->data()[i] += g.data()[i] * mask.data()[i];
                          });
}

HiddenBlock HiddenBlock::create(ParameterSet& params, const std::string& name, std::size_t in,
                                std::size_t out, double dropout_rate, Rng& rng) {
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw ParameterError("dropout rate outside [0, 1)");
  return HiddenBlock{Linear::create(params, name + ".linear", in, out, true, rng),
                     BatchNorm::create(params, name + ".bn", out), dropout_rate};
}

HiddenBlock HiddenBlock::bind(ParameterSet& params, const std::string& name,
                              double dropout_rate) {
  return HiddenBlock{Linear::bind(params, name + ".linear", true),
                     BatchNorm::bind(params, name + ".bn"), dropout_rate};
}

Var HiddenBlock::forward(Tape& tape, Var x, Mode mode, Rng& rng) const {
  Var h = linear.forward(tape, x);
  h = norm.forward(tape, h, mode);
  h = relu(h);
  return dropout(h, dropout_rate, mode, rng);
}

}  // namespace ontoweak
