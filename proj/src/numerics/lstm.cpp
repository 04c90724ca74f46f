#include "coseg/numerics/lstm.hpp"

#include "coseg/error.hpp"
#include "coseg/numerics/ops.hpp"

namespace coseg {

LstmCell::LstmCell(ParameterStore& store, const std::string& prefix, std::size_t input_size,
                   std::size_t hidden_size)
    : input_size_(input_size), hidden_size_(hidden_size) {
  weights_ = &store.add(prefix + ".W", 4 * hidden_size, input_size + hidden_size);
  bias_ = &store.add(prefix + ".b", 4 * hidden_size, 1);
}

LstmState lstm_step(const LstmCell& cell, Var x, Var h_prev, Var c_prev) {
  const std::size_t H = cell.hidden_size();
  if (x.value().size() != cell.input_size() || !x.value().is_vector()) {
    throw ShapeError("lstm_step: input " + x.value().shape_string() + ", cell expects " +
                     std::to_string(cell.input_size()));
  }
  if (h_prev.value().size() != H || c_prev.value().size() != H) {
    throw ShapeError("lstm_step: state " + h_prev.value().shape_string() + "/" +
                     c_prev.value().shape_string() + ", cell expects " + std::to_string(H));
  }
  Tape& tape = x.tape();
  Var gates = add(matvec(tape.param(cell.weights()), concat(x, h_prev)), tape.param(cell.bias()));
  Var in = sigmoid(slice(gates, 0, H));
  Var forget = sigmoid(slice(gates, H, H));
  Var cand = tanh(slice(gates, 2 * H, H));
  Var out = sigmoid(slice(gates, 3 * H, H));
  Var c = add(mul(forget, c_prev), mul(in, cand));
  Var h = mul(out, tanh(c));
  return {h, c};
}

LstmState zero_state(Tape& tape, std::size_t hidden_size) {
  return {tape.constant(Tensor(hidden_size, 1)), tape.constant(Tensor(hidden_size, 1))};
}

}  // namespace coseg
