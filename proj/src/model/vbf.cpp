#include "coseg/model/vbf.hpp"

#include <algorithm>
#include <string>

#include "coseg/error.hpp"
#include "coseg/numerics/ops.hpp"

namespace coseg::model {

namespace {

void check_position(std::size_t k, std::size_t n) {
  if (k > n) {
    throw ShapeError("breakpoint " + std::to_string(k) + " out of range for length " +
                     std::to_string(n));
  }
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> vector_break(std::span<const double> v,
                                                                 std::size_t k) {
  check_position(k, v.size());
  return {std::vector<double>(v.begin(), v.begin() + static_cast<long>(k)),
          std::vector<double>(v.begin() + static_cast<long>(k), v.end())};
}

std::vector<double> vector_form(std::span<const double> first, std::span<const double> second,
                                std::size_t k) {
  if (first.size() != second.size()) {
    throw ShapeError("vector_form: lengths " + std::to_string(first.size()) + " and " +
                     std::to_string(second.size()) + " differ");
  }
  auto [left, unused_right] = vector_break(first, k);
  auto [unused_left, right] = vector_break(second, k);
  left.insert(left.end(), right.begin(), right.end());
  return left;
}

std::vector<std::vector<double>> product_candidates(std::span<const double> first,
                                                    std::span<const double> second,
                                                    std::span<const std::size_t> breakpoints) {
  std::vector<std::vector<double>> out;
  out.reserve(breakpoints.size());
  for (auto k : breakpoints) out.push_back(vector_form(first, second, k));
  return out;
}

Var vector_form(Var first, Var second, std::size_t k) {
  const Tensor& a = first.value();
  const Tensor& b = second.value();
  if (!a.is_vector() || !a.same_shape(b)) {
    throw ShapeError("vector_form: shapes " + a.shape_string() + " and " + b.shape_string());
  }
  check_position(k, a.size());
  Tensor out(a.size(), 1);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = i < k ? a[i] : b[i];
  const std::size_t ai = first.id(), bi = second.id();
  return first.tape().record(std::move(out), [ai, bi, k](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad(ai);
    for (std::size_t i = 0; i < k; ++i) ga[i] += g[i];
    Tensor& gb = t.grad(bi);
    for (std::size_t i = k; i < g.size(); ++i) gb[i] += g[i];
  });
}

std::vector<Var> vbf_interact(Var character, Var context, std::span<const std::size_t> breakpoints) {
  std::vector<Var> out;
  out.reserve(breakpoints.size());
  for (auto k : breakpoints) out.push_back(vector_form(character, context, k));
  return out;
}

AttentionResult cca_attend(Var character, Var context, std::span<const Var> candidates,
                           Var attn_weight, Var attn_bias) {
  if (attn_weight.value().rows() != candidates.size()) {
    throw ShapeError("cca_attend: " + std::to_string(candidates.size()) +
                     " candidates but attention weight is " + attn_weight.value().shape_string());
  }
  Var scores = add(matvec(attn_weight, concat(character, context)), attn_bias);
  Var weights = softmax(scores);
  return {weighted_sum(weights, candidates), weights};
}

}  // namespace coseg::model
