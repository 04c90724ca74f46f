#pragma once

#include <cstddef>
#include <functional>
#include <unordered_map>
#include <vector>

#include "coseg/numerics/parameters.hpp"
#include "coseg/numerics/tensor.hpp"

namespace coseg {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid as long as
/// the tape is alive.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  const Tensor& grad() const;
  std::size_t size() const { return value().size(); }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Dynamically recorded reverse-mode autodiff tape. Every op appends a node
/// holding its forward value and a closure that pushes the node's gradient
/// to its inputs. Parameter leaves accumulate directly into
/// Parameter::grad, so several tapes may contribute to one optimizer step.
class Tape {
 public:
  using Backprop = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Leaf for a trainable parameter; repeated calls return the same node.
  Var param(Parameter& p);
  Var record(Tensor value, Backprop backprop);

  const Tensor& value(std::size_t id) const;
  /// Gradient buffer of a node; only meaningful during/after backward().
  Tensor& grad(std::size_t id);
  const Tensor& grad(std::size_t id) const;

  /// Seeds d(loss)/d(loss) = seed and propagates to every reachable node.
  /// Throws ShapeError for a non-scalar loss.
  void backward(Var loss, double seed = 1.0);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Parameter* param = nullptr;
    Backprop backprop;
  };
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
};

}  // namespace coseg
