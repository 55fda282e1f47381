#include "ontoweak/ops.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ontoweak/errors.hpp"

namespace ontoweak {

namespace {

[[noreturn]] void mismatch(const char* op, const Matrix& a, const Matrix& b) {
  throw DimensionError(std::string(op) + ": " + a.shape_string() + " vs " + b.shape_string());
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Elementwise op with a derivative expressed in terms of input and output.
template <typename F, typename D>
Var elementwise(Var x, F f, D df) {
  const Matrix& in = x.value();
  Matrix out(in.rows(), in.cols());
  for (std::size_t i = 0; i < in.size(); ++i) out.data()[i] = f(in.data()[i]);
  return x.tape()->record(std::move(out), {x},
                          [df](const Matrix& g, std::span<Matrix* const> gin,
                               std::span<const Matrix* const> ins, const Matrix& y) {
                            if (gin[0] == nullptr) return;
                            auto dst = gin[0]->data();
                            auto src = ins[0]->data();
                            for (std::size_t i = 0; i < dst.size(); ++i)
                              dst[i] += g.data()[i] * df(src[i], y.data()[i]);
                          });
}

}  // namespace

Var matmul(Var a, Var b) {
  Matrix out = ontoweak::matmul(a.value(), b.value());
  return a.tape()->record(std::move(out), {a, b},
                          [](const Matrix& g, std::span<Matrix* const> gin,
                             std::span<const Matrix* const> ins, const Matrix&) {
                            if (gin[0]) *gin[0] += matmul_nt(g, *ins[1]);
                            if (gin[1]) *gin[1] += matmul_tn(*ins[0], g);
                          });
}

Var matmul_nt(Var a, Var b) {
  Matrix out = ontoweak::matmul_nt(a.value(), b.value());
  return a.tape()->record(std::move(out), {a, b},
                          [](const Matrix& g, std::span<Matrix* const> gin,
                             std::span<const Matrix* const> ins, const Matrix&) {
                            if (gin[0]) *gin[0] += ontoweak::matmul(g, *ins[1]);
                            if (gin[1]) *gin[1] += matmul_tn(g, *ins[0]);
                          });
}

Var add_row_bias(Var x, Var bias) {
  const Matrix& xv = x.value();
  const Matrix& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != xv.cols()) mismatch("add_row_bias", xv, bv);
  Matrix out = xv;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bv(0, c);
  return x.tape()->record(std::move(out), {x, bias},
                          [](const Matrix& g, std::span<Matrix* const> gin,
                             std::span<const Matrix* const>, const Matrix&) {
                            if (gin[0]) *gin[0] += g;
                            if (gin[1]) {
                              Matrix& gb = *gin[1];
                              for (std::size_t r = 0; r < g.rows(); ++r)
                                for (std::size_t c = 0; c < g.cols(); ++c) gb(0, c) += g(r, c);
                            }
                          });
}

Var add(Var a, Var b) {
  if (!a.value().same_shape(b.value())) mismatch("add", a.value(), b.value());
  Matrix out = a.value();
  out += b.value();
  return a.tape()->record(std::move(out), {a, b},
                          [](const Matrix& g, std::span<Matrix* const> gin,
                             std::span<const Matrix* const>, const Matrix&) {
                            if (gin[0]) *gin[0] += g;
                            if (gin[1]) *gin[1] += g;
                          });
}

Var scale(Var a, double factor) {
  return elementwise(
      a, [factor](double v) { return factor * v; },
      [factor](double, double) { return factor; });
}

Var relu(Var x) {
  return elementwise(
      x, [](double v) { return v > 0 ? v : 0.0; },
      [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

Var leaky_relu(Var x, double slope) {
  return elementwise(
      x, [slope](double v) { return v > 0 ? v : slope * v; },
      [slope](double v, double) { return v > 0 ? 1.0 : slope; });
}

Var sigmoid(Var x) {
  return elementwise(
      x, [](double v) { return stable_sigmoid(v); },
      [](double, double y) { return y * (1.0 - y); });
}

Var softmax_rows(Var x) {
  const Matrix& in = x.value();
  Matrix out(in.rows(), in.cols());
  for (std::size_t r = 0; r < in.rows(); ++r) {
    auto src = in.row(r);
    auto dst = out.row(r);
    const double peak = *std::max_element(src.begin(), src.end());
    double total = 0.0;
    for (std::size_t c = 0; c < src.size(); ++c) total += dst[c] = std::exp(src[c] - peak);
    for (double& v : dst) v /= total;
  }
  return x.tape()->record(std::move(out), {x},
                          [](const Matrix& g, std::span<Matrix* const> gin,
                             std::span<const Matrix* const>, const Matrix& y) {
                            if (!gin[0]) return;
                            Matrix& dx = *gin[0];
                            for (std::size_t r = 0; r < y.rows(); ++r) {
                              double dot = 0.0;
                              for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
                              for (std::size_t c = 0; c < y.cols(); ++c)
                                dx(r, c) += y(r, c) * (g(r, c) - dot);
                            }
                          });
}

Var activation(Var x, Activation kind) {
  switch (kind) {
    case Activation::kRelu: return relu(x);
    case Activation::kLeakyRelu: return leaky_relu(x);
    case Activation::kSigmoid: return sigmoid(x);
    case Activation::kSoftmaxRows: return softmax_rows(x);
  }
  return x;
}

Var column_block(Var x, std::size_t begin, std::size_t count) {
  const Matrix& in = x.value();
  if (begin + count > in.cols())
    throw DimensionError("column_block [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") of " + in.shape_string());
  Matrix out(in.rows(), count);
  for (std::size_t r = 0; r < in.rows(); ++r)
    for (std::size_t c = 0; c < count; ++c) out(r, c) = in(r, begin + c);
  return x.tape()->record(std::move(out), {x},
                          [begin](const Matrix& g, std::span<Matrix* const> gin,
                                  std::span<const Matrix* const>, const Matrix&) {
                            if (!gin[0]) return;
                            for (std::size_t r = 0; r < g.rows(); ++r)
                              for (std::size_t c = 0; c < g.cols(); ++c)
                                (*gin[0])(r, begin + c) += g(r, c);
                          });
}

double bce_loss(const Matrix& probs, const Matrix& targets, double clamp) {
  if (!probs.same_shape(targets)) mismatch("bce_loss", probs, targets);
  if (probs.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs.data()[i], clamp, 1.0 - clamp);
    const double y = targets.data()[i];
    total -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
  }
  return total / static_cast<double>(probs.size());
}

Var bce_loss(Var probs, const Matrix& targets, double clamp) {
  const double loss = bce_loss(probs.value(), targets, clamp);
  return probs.tape()->record(
      Matrix(1, 1, loss), {probs},
      [targets, clamp](const Matrix& g, std::span<Matrix* const> gin,
                       std::span<const Matrix* const> ins, const Matrix&) {
        if (!gin[0]) return;
        const Matrix& p = *ins[0];
        const double n = static_cast<double>(p.size());
        auto dst = gin[0]->data();
        for (std::size_t i = 0; i < p.size(); ++i) {
          const double pi = p.data()[i];
          // Clamping is flat outside the interval.
          if (pi < clamp || pi > 1.0 - clamp) continue;
          const double y = targets.data()[i];
          dst[i] += g(0, 0) * (pi - y) / (pi * (1.0 - pi) * n);
        }
      });
}

Var row_distances(Var a, Var b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (!av.same_shape(bv)) mismatch("row_distances", av, bv);
  Matrix out(av.rows(), 1);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < av.cols(); ++c) {
      const double d = av(r, c) - bv(r, c);
      s += d * d;
    }
    out(r, 0) = std::sqrt(s);
  }
  return a.tape()->record(std::move(out), {a, b},
                          [](const Matrix& g, std::span<Matrix* const> gin,
                             std::span<const Matrix* const> ins, const Matrix& dist) {
                            const Matrix& x = *ins[0];
                            const Matrix& y = *ins[1];
                            for (std::size_t r = 0; r < x.rows(); ++r) {
                              // Subgradient 0 where the rows coincide.
                              if (dist(r, 0) == 0.0) continue;
                              const double k = g(r, 0) / dist(r, 0);
                              for (std::size_t c = 0; c < x.cols(); ++c) {
                                const double d = k * (x(r, c) - y(r, c));
                                if (gin[0]) (*gin[0])(r, c) += d;
                                if (gin[1]) (*gin[1])(r, c) -= d;
                              }
                            }
                          });
}

Var contrastive_loss(Var a, Var b, std::span<const double> targets) {
  Var dist = row_distances(a, b);
  if (targets.size() != dist.rows())
    throw DimensionError("contrastive_loss: " + std::to_string(dist.rows()) + " pairs vs " +
                         std::to_string(targets.size()) + " targets");
  std::vector<double> d(targets.begin(), targets.end());
  const Matrix& dv = dist.value();
  double total = 0.0;
  for (std::size_t r = 0; r < dv.rows(); ++r) {
    const double e = dv(r, 0) - d[r];
    total += e * e;
  }
  const double n = dv.rows() == 0 ? 1.0 : static_cast<double>(dv.rows());
  return a.tape()->record(Matrix(1, 1, total / n), {dist},
                          [d = std::move(d), n](const Matrix& g, std::span<Matrix* const> gin,
                                                std::span<const Matrix* const> ins,
                                                const Matrix&) {
                            if (!gin[0]) return;
                            const Matrix& dv = *ins[0];
                            for (std::size_t r = 0; r < dv.rows(); ++r)
                              (*gin[0])(r, 0) += g(0, 0) * 2.0 * (dv(r, 0) - d[r]) / n;
                          });
}

double l2_distance(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b) || a.rows() != 1) mismatch("l2_distance", a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace ontoweak
