#pragma once

#include <span>

#include "coseg/numerics/parameters.hpp"

namespace coseg {

/// Classical momentum on flat buffers:
///   v <- momentum * v + grad
///   theta <- theta - lr * v
/// Returns false without touching anything if a gradient is non-finite.
bool momentum_sgd_step(std::span<double> params, std::span<const double> grads,
                       std::span<double> velocity, double lr, double momentum);

/// Global L2 norm of all gradients in the store.
double grad_norm(const ParameterStore& store);

/// Rescales every gradient so the global norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_grad_norm(ParameterStore& store, double max_norm);

class MomentumSgd {
 public:
  MomentumSgd(double lr, double momentum);

  /// Applies one update from the accumulated Parameter::grad buffers.
  /// Returns false (and leaves values and velocities untouched) when any
  /// gradient is non-finite.
  bool step(ParameterStore& store) const;

  double lr() const { return lr_; }
  void set_lr(double lr);
  double momentum() const { return momentum_; }

 private:
  double lr_;
  double momentum_;
};

}  // namespace coseg
