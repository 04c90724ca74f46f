#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "coseg/numerics/tape.hpp"

namespace coseg::model {

// Vector Breaking/Forming on plain values.

/// Splits `v` at bond position k: (v[0..k), v[k..n)). Throws ShapeError
/// unless 0 <= k <= n.
std::pair<std::vector<double>, std::vector<double>> vector_break(std::span<const double> v,
                                                                 std::size_t k);

/// Left part of `first` broken at k joined to the right part of `second`.
/// Same length as the inputs. Throws ShapeError on length mismatch or k > n.
std::vector<double> vector_form(std::span<const double> first, std::span<const double> second,
                                std::size_t k);

/// One product candidate per breakpoint.
std::vector<std::vector<double>> product_candidates(std::span<const double> first,
                                                    std::span<const double> second,
                                                    std::span<const std::size_t> breakpoints);

// Differentiable versions.

Var vector_form(Var first, Var second, std::size_t k);

/// Candidate set from the character representation (first vector) and the
/// context state (second vector).
std::vector<Var> vbf_interact(Var character, Var context, std::span<const std::size_t> breakpoints);

struct AttentionResult {
  Var fused;    // r = sum_k a_k p_k
  Var weights;  // a = softmax(W_a [character; context] + b_a)
};

/// Character-context attention over the product candidates. `attn_weight`
/// is n_sel x 2H, `attn_bias` is n_sel.
AttentionResult cca_attend(Var character, Var context, std::span<const Var> candidates,
                           Var attn_weight, Var attn_bias);

}  // namespace coseg::model
