#pragma once

#include <cstddef>
#include <string>

#include "coseg/numerics/parameters.hpp"
#include "coseg/numerics/tape.hpp"

namespace coseg {

/// LSTM cell parameters: a 4H x (I+H) gate matrix and a 4H bias, gate rows
/// ordered input, forget, candidate, output.
class LstmCell {
 public:
  LstmCell() = default;
  /// Registers `<prefix>.W` and `<prefix>.b` in the store.
  LstmCell(ParameterStore& store, const std::string& prefix, std::size_t input_size,
           std::size_t hidden_size);

  std::size_t input_size() const { return input_size_; }
  std::size_t hidden_size() const { return hidden_size_; }
  std::size_t parameter_count() const {
    return 4 * hidden_size_ * (input_size_ + hidden_size_) + 4 * hidden_size_;
  }

  Parameter& weights() const { return *weights_; }
  Parameter& bias() const { return *bias_; }

 private:
  std::size_t input_size_ = 0;
  std::size_t hidden_size_ = 0;
  Parameter* weights_ = nullptr;
  Parameter* bias_ = nullptr;
};

struct LstmState {
  Var h;
  Var c;
};

/// One recurrence step:
///   [i f g o] = W [x; h_prev] + b
///   c = sigmoid(f) * c_prev + sigmoid(i) * tanh(g)
///   h = sigmoid(o) * tanh(c)
LstmState lstm_step(const LstmCell& cell, Var x, Var h_prev, Var c_prev);

/// Zero (h, c) recorded as constants on `tape`.
LstmState zero_state(Tape& tape, std::size_t hidden_size);

}  // namespace coseg
