#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "coseg/numerics/tape.hpp"

namespace coseg {

// Plain (non-recorded) helpers.

/// Max-shifted softmax. Throws ShapeError on empty input.
std::vector<double> softmax(std::span<const double> logits);
double log_sum_exp(std::span<const double> logits);
/// Index of the largest entry, lowest index on ties.
std::size_t argmax(std::span<const double> values);

// Differentiable ops. All vectors are column tensors; shape violations
// throw ShapeError.

Var matvec(Var w, Var x);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var sigmoid(Var a);
Var tanh(Var a);
Var concat(std::span<const Var> parts);
Var concat(Var a, Var b);
Var slice(Var a, std::size_t offset, std::size_t length);
/// Row `row` of a matrix, as a column vector.
Var lookup(Var table, std::size_t row);
Var softmax(Var logits);
/// -log softmax(logits)[target], a 1x1 tensor.
Var cross_entropy(Var logits, std::size_t target);
/// Sum of all entries, a 1x1 tensor.
Var sum(Var a);
/// Elementwise sum of same-shape values.
Var add_n(std::span<const Var> terms);
/// sum_k weights[k] * items[k]; weights has one entry per item.
Var weighted_sum(Var weights, std::span<const Var> items);

}  // namespace coseg
