#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ontoweak/matrix.hpp"

namespace ontoweak {

/// A named tensor owned by a model. Buffers (batch-norm running statistics)
/// are parameters with `trainable == false`; they are checkpointed but never
/// touched by the optimizer.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool trainable = true;
};

/// Owns parameters at stable addresses.
class ParameterSet {
 public:
  Parameter& add(std::string name, Matrix value, bool trainable = true);
  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;
  void zero_grad();

  std::size_t size() const { return items_.size(); }
  auto begin() { return items_.begin(); }
  auto end() { return items_.end(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  std::vector<Parameter*> trainable();

 private:
  std::deque<Parameter> items_;
};

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  /// Value of a 1x1 node.
  double scalar() const;
  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records operations in execution order so that backward() can replay
/// their adjoint rules in reverse. Operands always precede their users.
class Tape {
 public:
  /// grad_in[k] is the accumulator for operand k, or nullptr when that
  /// operand does not need a gradient. Rules must add into it.
  using Backward = std::function<void(const Matrix& grad_out, std::span<Matrix* const> grad_in,
                                      std::span<const Matrix* const> inputs,
                                      const Matrix& output)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var parameter(Parameter& p);
  Var record(Matrix value, std::initializer_list<Var> operands, Backward backward);

  /// Seeds d(loss)/d(loss) = 1 and accumulates into every reachable
  /// parameter's `grad`. The loss must be 1x1.
  void backward(Var loss);

  const Matrix& value(Var v) const { return nodes_.at(v.id_).value; }
  /// Gradient w.r.t. a node after backward(); empty if it was not reached.
  const Matrix& grad(Var v) const { return nodes_.at(v.id_).grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::vector<std::size_t> operands;
    Backward backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

}  // namespace ontoweak
