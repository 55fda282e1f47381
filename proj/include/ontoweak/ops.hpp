#pragma once

#include <span>

#include "ontoweak/tape.hpp"

namespace ontoweak {

enum class Activation { kRelu, kLeakyRelu, kSigmoid, kSoftmaxRows };

inline constexpr double kLeakySlope = 0.01;
inline constexpr double kBceClamp = 1e-7;

Var matmul(Var a, Var b);
/// a * b^T, the similarity between every row of a and every row of b.
Var matmul_nt(Var a, Var b);
/// x + bias, with a 1 x n bias broadcast over the rows of x.
Var add_row_bias(Var x, Var bias);
Var add(Var a, Var b);
Var scale(Var a, double factor);

Var relu(Var x);
Var leaky_relu(Var x, double slope = kLeakySlope);
Var sigmoid(Var x);
Var softmax_rows(Var x);
Var activation(Var x, Activation kind);

/// Columns [begin, begin + count) of x.
Var column_block(Var x, std::size_t begin, std::size_t count);

/// Mean binary cross-entropy over all entries; probabilities are clamped to
/// [clamp, 1 - clamp] before the log. Returns a 1x1 node.
Var bce_loss(Var probs, const Matrix& targets, double clamp = kBceClamp);
/// Untaped BCE, same definition.
double bce_loss(const Matrix& probs, const Matrix& targets, double clamp = kBceClamp);

/// Euclidean distance between matching rows; n x 1.
Var row_distances(Var a, Var b);
/// mean_i (||a_i - b_i|| - d_i)^2 as a 1x1 node.
Var contrastive_loss(Var a, Var b, std::span<const double> targets);

/// Euclidean norm of a - b for two single-row matrices.
double l2_distance(const Matrix& a, const Matrix& b);

}  // namespace ontoweak
