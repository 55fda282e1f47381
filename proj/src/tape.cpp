#include "ontoweak/tape.hpp"

#include "ontoweak/errors.hpp"

namespace ontoweak {

Parameter& ParameterSet::add(std::string name, Matrix value, bool trainable) {
  if (find(name) != nullptr) throw ConfigError("duplicate parameter name " + name);
  Matrix grad(value.rows(), value.cols());
  items_.push_back(Parameter{std::move(name), std::move(value), std::move(grad), trainable});
  return items_.back();
}

Parameter* ParameterSet::find(const std::string& name) {
  for (auto& p : items_)
    if (p.name == name) return &p;
  return nullptr;
}

const Parameter* ParameterSet::find(const std::string& name) const {
  for (const auto& p : items_)
    if (p.name == name) return &p;
  return nullptr;
}

void ParameterSet::zero_grad() {
  for (auto& p : items_) {
    if (!p.grad.same_shape(p.value)) p.grad = Matrix(p.value.rows(), p.value.cols());
    p.grad.fill(0.0);
  }
}

std::vector<Parameter*> ParameterSet::trainable() {
  std::vector<Parameter*> out;
  for (auto& p : items_)
    if (p.trainable) out.push_back(&p);
  return out;
}

const Matrix& Var::value() const { return tape_->value(*this); }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw DimensionError("scalar() on " + v.shape_string());
  return v(0, 0);
}

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, {}, {}, nullptr, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& p) {
  nodes_.push_back(Node{p.value, {}, {}, {}, &p, p.trainable});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::initializer_list<Var> operands, Backward backward) {
  Node node;
  node.value = std::move(value);
  for (Var v : operands) {
    if (v.tape_ != this) throw DimensionError("operand recorded on a different tape");
    node.operands.push_back(v.id_);
    node.requires_grad = node.requires_grad || nodes_[v.id_].requires_grad;
  }
  node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(Var loss) {
  if (loss.tape_ != this) throw DimensionError("loss recorded on a different tape");
  Node& root = nodes_.at(loss.id_);
  if (root.value.rows() != 1 || root.value.cols() != 1)
    throw DimensionError("backward() needs a 1x1 loss, got " + root.value.shape_string());

  for (auto& n : nodes_) n.grad = Matrix();
  root.grad = Matrix(1, 1, 1.0);

  std::vector<Matrix*> grad_in;
  std::vector<const Matrix*> inputs;
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.grad.empty() || !node.requires_grad) continue;
    if (node.param != nullptr) {
      Parameter& p = *node.param;
      if (!p.grad.same_shape(p.value)) p.grad = Matrix(p.value.rows(), p.value.cols());
      p.grad += node.grad;
      continue;
    }
    if (!node.backward) continue;
    grad_in.clear();
    inputs.clear();
    for (std::size_t op : node.operands) {
      Node& operand = nodes_[op];
      inputs.push_back(&operand.value);
      if (!operand.requires_grad) {
        grad_in.push_back(nullptr);
        continue;
      }
      if (operand.grad.empty()) operand.grad = Matrix(operand.value.rows(), operand.value.cols());
      grad_in.push_back(&operand.grad);
    }
    node.backward(node.grad, grad_in, inputs, node.value);
  }
}

}  // namespace ontoweak
