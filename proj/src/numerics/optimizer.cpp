#include "coseg/numerics/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "coseg/error.hpp"

namespace coseg {

namespace {

void check_hyper(double lr, double momentum) {
  // lr == 0 is allowed so a frozen run can be expressed.
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("momentum sgd: lr must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw std::invalid_argument("momentum sgd: momentum must be in [0, 1)");
  }
}

bool all_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

bool momentum_sgd_step(std::span<double> params, std::span<const double> grads,
                       std::span<double> velocity, double lr, double momentum) {
  check_hyper(lr, momentum);
  if (params.size() != grads.size() || params.size() != velocity.size()) {
    throw ShapeError("momentum_sgd_step: buffer sizes differ");
  }
  if (!all_finite(grads)) return false;
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity[i] = momentum * velocity[i] + grads[i];
    params[i] -= lr * velocity[i];
  }
  return true;
}

double grad_norm(const ParameterStore& store) {
  double sq = 0.0;
  for (const auto& p : store) {
    for (double g : p->grad.data()) sq += g * g;
  }
  return std::sqrt(sq);
}

double clip_grad_norm(ParameterStore& store, double max_norm) {
  double norm = grad_norm(store);
  if (max_norm > 0.0 && std::isfinite(norm) && norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& p : store) {
      for (double& g : p->grad.data()) g *= factor;
    }
  }
  return norm;
}

MomentumSgd::MomentumSgd(double lr, double momentum) : lr_(lr), momentum_(momentum) {
  check_hyper(lr, momentum);
}

void MomentumSgd::set_lr(double lr) {
  check_hyper(lr, momentum_);
  lr_ = lr;
}

bool MomentumSgd::step(ParameterStore& store) const {
  for (const auto& p : store) {
    if (!p->grad.all_finite()) return false;
  }
  for (auto& p : store) {
    momentum_sgd_step(p->value.data(), p->grad.data(), p->velocity.data(), lr_, momentum_);
  }
  return true;
}

}  // namespace coseg
