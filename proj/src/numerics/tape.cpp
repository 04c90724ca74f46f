#include "coseg/numerics/tape.hpp"

#include "coseg/error.hpp"

namespace coseg {

const Tensor& Var::value() const { return tape_->value(id_); }
const Tensor& Var::grad() const { return tape_->grad(id_); }

Var Tape::constant(Tensor value) { return record(std::move(value), nullptr); }

Var Tape::param(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Var(this, it->second);
  Node node;
  node.param = &p;
  nodes_.push_back(std::move(node));
  param_nodes_[&p] = nodes_.size() - 1;
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, Backprop backprop) {
  Node node;
  node.value = std::move(value);
  node.backprop = std::move(backprop);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.param ? n.param->value : n.value;
}

Tensor& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  return n.param ? n.param->grad : n.grad;
}

const Tensor& Tape::grad(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.param ? n.param->grad : n.grad;
}

void Tape::backward(Var loss, double seed) {
  if (loss.valid() && &loss.tape() != this) throw std::invalid_argument("backward: foreign Var");
  const Tensor& lv = value(loss.id());
  if (!lv.is_scalar()) throw ShapeError("backward: loss must be scalar, got " + lv.shape_string());
  for (std::size_t i = 0; i <= loss.id(); ++i) {
    Node& n = nodes_[i];
    if (!n.param) n.grad = Tensor(n.value.rows(), n.value.cols());
  }
  grad(loss.id())[0] += seed;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    if (nodes_[i].backprop) nodes_[i].backprop(*this, i);
  }
}

}  // namespace coseg
