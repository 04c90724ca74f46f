#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "coseg/error.hpp"
#include "coseg/numerics/checkpoint.hpp"
#include "coseg/numerics/lstm.hpp"
#include "coseg/numerics/ops.hpp"
#include "coseg/numerics/optimizer.hpp"
#include "coseg/numerics/parameters.hpp"
#include "coseg/numerics/rng.hpp"
#include "coseg/numerics/tape.hpp"
#include "test_support.hpp"

using namespace coseg;
using coseg::testing::check_gradients;

namespace {

double naive_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Parameter& random_param(ParameterStore& store, const std::string& name, std::size_t r, std::size_t c,
                        Rng& rng, double scale = 1.0) {
  Parameter& p = store.add(name, r, c);
  for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] = rng.uniform(-scale, scale);
  return p;
}

}  // namespace

// ---------------------------------------------------------------- tensor

TEST(Tensor, ShapeAndFill) {
  Tensor t(2, 3, 1.5);
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_FALSE(t.is_vector());
  t.at(1, 2) = 4.0;
  EXPECT_EQ(t[5], 4.0);
  EXPECT_TRUE(t.all_finite());
  t[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(t.all_finite());
}

TEST(Tensor, MatrixRejectsWrongCount) {
  EXPECT_THROW(Tensor::matrix(2, 2, {1, 2, 3}), ShapeError);
  EXPECT_TRUE(Tensor::vector({1, 2}).is_vector());
}

// ---------------------------------------------------------------- softmax / CE

TEST(Softmax, UniformOnEqualInputs) {
  for (double p : softmax(std::vector<double>{0, 0, 0})) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
}

TEST(Softmax, LargeInputsDoNotOverflow) {
  auto p = softmax(std::vector<double>{1000, 1000});
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
}

TEST(Softmax, MatchesDirectFormula) {
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  auto p = softmax(std::vector<double>{1, 2, 3});
  EXPECT_NEAR(p[0], std::exp(1.0) / z, 1e-15);
  EXPECT_NEAR(p[1], std::exp(2.0) / z, 1e-15);
  EXPECT_NEAR(p[2], std::exp(3.0) / z, 1e-15);
}

TEST(Softmax, EmptyThrows) { EXPECT_THROW(softmax(std::vector<double>{}), ShapeError); }

TEST(Softmax, NormalisedAndShiftInvariantOnRandomInputs) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(1 + trial % 9);
    for (auto& x : v) x = u(rng);
    const double shift = u(rng) * 10;
    std::vector<double> w = v;
    for (auto& x : w) x += shift;
    auto p = softmax(v), q = softmax(w);
    double total = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_GE(p[i], 0.0);
      EXPECT_NEAR(p[i], q[i], 1e-9);
      total += p[i];
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(LogSumExp, MatchesNaiveOnSmallValues) {
  std::vector<double> v{0.5, -1.0, 2.0};
  EXPECT_NEAR(log_sum_exp(v), std::log(std::exp(0.5) + std::exp(-1.0) + std::exp(2.0)), 1e-14);
}

TEST(Argmax, LowestIndexWinsTies) {
  EXPECT_EQ(argmax(std::vector<double>{1, 3, 3, 0}), 1u);
  EXPECT_EQ(argmax(std::vector<double>{2}), 0u);
}

TEST(CrossEntropy, UniformLogitsGiveLogV) {
  Tape tape;
  Var l = cross_entropy(tape.constant(Tensor(4, 1, 0.0)), 2);
  EXPECT_NEAR(l.value()[0], std::log(4.0), 1e-15);
}

TEST(CrossEntropy, MatchesDirectFormula) {
  Tape tape;
  Var l = cross_entropy(tape.constant(Tensor::vector({1, 2, 3})), 2);
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  EXPECT_NEAR(l.value()[0], -std::log(std::exp(3.0) / z), 1e-14);
}

TEST(CrossEntropy, VanishesAsMarginGrows) {
  double prev = std::numeric_limits<double>::infinity();
  for (double margin : {1.0, 5.0, 20.0, 100.0}) {
    Tape tape;
    const double l = cross_entropy(tape.constant(Tensor::vector({margin, 0, 0})), 0).value()[0];
    EXPECT_GE(l, 0.0);
    EXPECT_LT(l, prev);
    prev = l;
  }
  EXPECT_LT(prev, 1e-40);
}

TEST(CrossEntropy, OutOfRangeTargetThrows) {
  Tape tape;
  EXPECT_THROW(cross_entropy(tape.constant(Tensor(3, 1)), 3), ShapeError);
}

// ---------------------------------------------------------------- tape

TEST(Tape, QuadraticGradient) {
  ParameterStore store;
  Parameter& v = store.add("v", 2, 1);
  v.value[0] = 1;
  v.value[1] = 2;
  Tape tape;
  Var x = tape.param(v);
  tape.backward(sum(mul(x, x)));
  EXPECT_DOUBLE_EQ(v.grad[0], 2.0);
  EXPECT_DOUBLE_EQ(v.grad[1], 4.0);
}

TEST(Tape, DisconnectedParameterHasZeroGradient) {
  ParameterStore store;
  Parameter& a = store.add("a", 2, 1);
  Parameter& b = store.add("b", 2, 1);
  a.value.fill(1.0);
  b.value.fill(3.0);
  Tape tape;
  Var x = tape.param(a);
  tape.param(b);
  tape.backward(sum(x));
  EXPECT_EQ(b.grad, Tensor(2, 1, 0.0));
}

TEST(Tape, NonScalarLossThrows) {
  Tape tape;
  Var v = tape.constant(Tensor(2, 1, 1.0));
  EXPECT_THROW(tape.backward(v), ShapeError);
}

TEST(Tape, SharedNodeAccumulatesFromEveryConsumer) {
  ParameterStore store;
  Parameter& a = store.add("a", 1, 1);
  a.value[0] = 3.0;
  Tape tape;
  Var x = tape.param(a);
  Var y = add(mul(x, x), scale(x, 2.0));  // x^2 + 2x
  tape.backward(sum(y));
  EXPECT_DOUBLE_EQ(a.grad[0], 8.0);
}

TEST(Ops, ShapeMismatchesThrow) {
  Tape tape;
  Var a = tape.constant(Tensor(2, 1));
  Var b = tape.constant(Tensor(3, 1));
  Var m = tape.constant(Tensor(2, 2));
  EXPECT_THROW(add(a, b), ShapeError);
  EXPECT_THROW(mul(a, b), ShapeError);
  EXPECT_THROW(matvec(m, b), ShapeError);
  EXPECT_THROW(slice(a, 1, 2), ShapeError);
  EXPECT_THROW(lookup(m, 2), ShapeError);
}

class OpGradients : public ::testing::TestWithParam<int> {};

TEST_P(OpGradients, EveryOpMatchesFiniteDifferences) {
  const int seed = GetParam();
  Rng rng(seed);
  ParameterStore store;
  Parameter& w = random_param(store, "w", 3, 4, rng);
  Parameter& x = random_param(store, "x", 4, 1, rng);
  Parameter& y = random_param(store, "y", 3, 1, rng);
  Parameter& table = random_param(store, "table", 5, 3, rng);
  auto loss = [&](Tape& t) {
    Var W = t.param(w), X = t.param(x), Y = t.param(y), T = t.param(table);
    Var h = tanh(matvec(W, X));
    Var g = sigmoid(add(h, Y));
    Var e = mul(lookup(T, 2), g);
    Var cat = concat(e, sub(Y, scale(h, 0.5)));
    Var part = slice(cat, 1, 4);
    Var weights = softmax(slice(cat, 0, 3));
    std::vector<Var> items{h, g, e};
    Var ws = weighted_sum(weights, items);
    std::vector<Var> terms{ws, h, Y};
    Var total = add_n(terms);
    Var logits = concat(total, part);
    return add(cross_entropy(logits, static_cast<std::size_t>(seed) % 7), sum(mul(ws, ws)));
  };
  auto r = check_gradients(coseg::testing::all_params(store), loss);
  EXPECT_LT(r.worst, 1e-3) << r.worst_param;
}

INSTANTIATE_TEST_SUITE_P(Seeds, OpGradients, ::testing::Range(1, 11));

// ---------------------------------------------------------------- lstm

TEST(Lstm, ParameterCount) {
  ParameterStore store;
  LstmCell cell(store, "enc", 3, 5);
  EXPECT_EQ(cell.parameter_count(), 4u * 5 * (3 + 5) + 4 * 5);
  EXPECT_EQ(store.scalar_count(), cell.parameter_count());
  EXPECT_EQ(cell.weights().value.rows(), 20u);
  EXPECT_EQ(cell.weights().value.cols(), 8u);
}

TEST(Lstm, ZeroWeightsAndInputsGiveZeroState) {
  ParameterStore store;
  LstmCell cell(store, "c", 2, 3);
  Tape tape;
  auto s0 = zero_state(tape, 3);
  auto s1 = lstm_step(cell, tape.constant(Tensor(2, 1)), s0.h, s0.c);
  EXPECT_EQ(s1.h.value(), Tensor(3, 1, 0.0));
  EXPECT_EQ(s1.c.value(), Tensor(3, 1, 0.0));
}

TEST(Lstm, MatchesScalarGateFormulas) {
  // H=2, I=2, seed 42 parameters; gates recomputed with plain loops.
  const std::size_t I = 2, H = 2;
  ParameterStore store;
  LstmCell cell(store, "c", I, H);
  Rng rng(42);
  store.init_uniform(rng, 0.5);
  const std::vector<double> x{0.3, -0.7}, h0{0.1, 0.2}, c0{-0.4, 0.5};

  std::vector<double> z(4 * H);
  const Tensor& W = cell.weights().value;
  const Tensor& b = cell.bias().value;
  for (std::size_t r = 0; r < 4 * H; ++r) {
    z[r] = b[r];
    for (std::size_t k = 0; k < I; ++k) z[r] += W.at(r, k) * x[k];
    for (std::size_t k = 0; k < H; ++k) z[r] += W.at(r, I + k) * h0[k];
  }
  std::vector<double> h_expect(H), c_expect(H);
  for (std::size_t j = 0; j < H; ++j) {
    const double i = naive_sigmoid(z[j]);
    const double f = naive_sigmoid(z[H + j]);
    const double g = std::tanh(z[2 * H + j]);
    const double o = naive_sigmoid(z[3 * H + j]);
    c_expect[j] = f * c0[j] + i * g;
    h_expect[j] = o * std::tanh(c_expect[j]);
  }

  Tape tape;
  auto s = lstm_step(cell, tape.constant(Tensor::vector(x)), tape.constant(Tensor::vector(h0)),
                     tape.constant(Tensor::vector(c0)));
  for (std::size_t j = 0; j < H; ++j) {
    EXPECT_NEAR(s.h.value()[j], h_expect[j], 1e-14);
    EXPECT_NEAR(s.c.value()[j], c_expect[j], 1e-14);
  }
}

TEST(Lstm, FixedPointIsStable) {
  // Iterate to the fixed point, then two more steps stay within 1e-6.
  ParameterStore store;
  LstmCell cell(store, "c", 2, 3);
  Rng rng(5);
  store.init_uniform(rng, 0.3);
  Tape tape;
  Var x = tape.constant(Tensor::vector({0.2, -0.1}));
  auto s = zero_state(tape, 3);
  for (int i = 0; i < 400; ++i) s = lstm_step(cell, x, s.h, s.c);
  const Tensor h = s.h.value(), c = s.c.value();
  for (int i = 0; i < 2; ++i) s = lstm_step(cell, x, s.h, s.c);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(s.h.value()[j], h[j], 1e-6);
    EXPECT_NEAR(s.c.value()[j], c[j], 1e-6);
  }
}

TEST(Lstm, ShapeMismatchThrows) {
  ParameterStore store;
  LstmCell cell(store, "c", 2, 3);
  Tape tape;
  auto s = zero_state(tape, 3);
  EXPECT_THROW(lstm_step(cell, tape.constant(Tensor(3, 1)), s.h, s.c), ShapeError);
  EXPECT_THROW(lstm_step(cell, tape.constant(Tensor(2, 1)), tape.constant(Tensor(2, 1)), s.c), ShapeError);
}

class LstmGradients : public ::testing::TestWithParam<std::size_t> {};

TEST_P(LstmGradients, StepSoftmaxCrossEntropy) {
  const std::size_t H = GetParam();
  for (int seed = 1; seed <= 5; ++seed) {
    Rng rng(seed * 17 + H);
    ParameterStore store;
    LstmCell cell(store, "c", 3, H);
    store.init_uniform(rng, 0.5);
    Parameter& x = random_param(store, "x", 3, 1, rng);
    Parameter& h0 = random_param(store, "h0", H, 1, rng);
    Parameter& c0 = random_param(store, "c0", H, 1, rng);
    auto loss = [&](Tape& t) {
      auto s = lstm_step(cell, t.param(x), t.param(h0), t.param(c0));
      s = lstm_step(cell, t.param(x), s.h, s.c);
      return cross_entropy(concat(s.h, s.c), 1);
    };
    auto r = check_gradients(coseg::testing::all_params(store), loss);
    EXPECT_LT(r.worst, 1e-3) << "H=" << H << " seed=" << seed << " " << r.worst_param;
  }
}

INSTANTIATE_TEST_SUITE_P(Sizes, LstmGradients, ::testing::Values(2u, 3u, 5u));

// ---------------------------------------------------------------- optimizer

TEST(Momentum, SecondVelocityIsOnePointNineG) {
  std::vector<double> theta{1.0, -2.0}, v{0.0, 0.0};
  const std::vector<double> g{0.5, -0.25};
  ASSERT_TRUE(momentum_sgd_step(theta, g, v, 0.1, 0.9));
  ASSERT_TRUE(momentum_sgd_step(theta, g, v, 0.1, 0.9));
  EXPECT_DOUBLE_EQ(v[0], 1.9 * 0.5);
  EXPECT_DOUBLE_EQ(v[1], 1.9 * -0.25);
  EXPECT_NEAR(theta[0], 1.0 - 0.1 * 0.5 - 0.1 * 0.95, 1e-15);
}

TEST(Momentum, ZeroMomentumIsPlainSgd) {
  std::vector<double> theta{1.0}, v{7.0};
  ASSERT_TRUE(momentum_sgd_step(theta, std::vector<double>{2.0}, v, 0.25, 0.0));
  EXPECT_DOUBLE_EQ(theta[0], 0.5);
}

TEST(Momentum, ZeroGradientsLeaveParamsUnchanged) {
  std::vector<double> theta{1.0, 2.0}, v{0.0, 0.0};
  ASSERT_TRUE(momentum_sgd_step(theta, std::vector<double>{0.0, 0.0}, v, 0.5, 0.9));
  EXPECT_EQ(theta, (std::vector<double>{1.0, 2.0}));
}

TEST(Momentum, NonFiniteGradientAbortsStep) {
  std::vector<double> theta{1.0, 2.0}, v{0.3, 0.4};
  const std::vector<double> g{0.1, std::numeric_limits<double>::infinity()};
  EXPECT_FALSE(momentum_sgd_step(theta, g, v, 0.5, 0.9));
  EXPECT_EQ(theta, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(v, (std::vector<double>{0.3, 0.4}));
}

TEST(Momentum, RejectsBadHyperparameters) {
  std::vector<double> theta{1.0}, v{0.0};
  const std::vector<double> g{1.0};
  EXPECT_THROW(momentum_sgd_step(theta, g, v, 0.1, 1.0), std::invalid_argument);
  EXPECT_THROW(momentum_sgd_step(theta, g, v, -0.1, 0.5), std::invalid_argument);
}

TEST(Clip, RescalesToMaxNorm) {
  ParameterStore store;
  Parameter& p = store.add("p", 2, 1);
  p.grad[0] = 3.0;
  p.grad[1] = 4.0;
  EXPECT_DOUBLE_EQ(clip_grad_norm(store, 1.0), 5.0);
  EXPECT_NEAR(p.grad[0], 0.6, 1e-15);
  EXPECT_NEAR(p.grad[1], 0.8, 1e-15);
  EXPECT_NEAR(clip_grad_norm(store, 5.0), 1.0, 1e-15);
  EXPECT_NEAR(p.grad[0], 0.6, 1e-15);
}

TEST(Determinism, SameSeedSameTrajectory) {
  auto run = [](std::uint64_t seed) {
    ParameterStore store;
    LstmCell cell(store, "c", 2, 3);
    Rng rng(seed);
    store.init_uniform(rng, 0.1);
    MomentumSgd opt(0.1, 0.9);
    for (int step = 0; step < 5; ++step) {
      store.zero_grad();
      Tape tape;
      auto s = zero_state(tape, 3);
      s = lstm_step(cell, tape.constant(Tensor::vector({1.0, -1.0})), s.h, s.c);
      tape.backward(cross_entropy(s.h, 0));
      opt.step(store);
    }
    return store.get("c.W").value;
  };
  EXPECT_EQ(run(9), run(9));
  EXPECT_FALSE(run(9) == run(10));
}

// ---------------------------------------------------------------- checkpoint

TEST(Checkpoint, RoundTripIsExact) {
  coseg::testing::TempDir dir("ckpt");
  Checkpoint c;
  c.config_text = "hidden_dim = 4\n";
  c.blocks.push_back({"param/a", Tensor::matrix(2, 2, {1.0 / 3.0, -0.0, 1e-300, 7})});
  c.blocks.push_back({"trainer/state", Tensor::vector({1, 2, 3})});
  write_checkpoint(dir / "c.ckpt", c);
  Checkpoint back = read_checkpoint(dir / "c.ckpt");
  EXPECT_EQ(back.config_text, c.config_text);
  ASSERT_EQ(back.blocks.size(), 2u);
  EXPECT_EQ(back.blocks[0].first, "param/a");
  EXPECT_EQ(back.blocks[0].second, c.blocks[0].second);
  EXPECT_EQ(back.config_hash(), c.config_hash());
  ASSERT_NE(back.find("trainer/state"), nullptr);
  EXPECT_EQ(back.find("missing"), nullptr);
}

TEST(Checkpoint, HeaderLayoutIsLittleEndian) {
  coseg::testing::TempDir dir("ckpt");
  Checkpoint c;
  c.config_text = "x";
  write_checkpoint(dir / "c.ckpt", c);
  const std::string bytes = coseg::testing::read_file(dir / "c.ckpt");
  ASSERT_GE(bytes.size(), 12u);
  EXPECT_EQ(bytes.substr(0, 8), "COSEGCKP");
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), kCheckpointVersion);
  EXPECT_EQ(bytes[9], 0);
}

TEST(Checkpoint, CorruptFilesAreRejected) {
  coseg::testing::TempDir dir("ckpt");
  Checkpoint c;
  c.config_text = "lr = 0.1\n";
  c.blocks.push_back({"param/a", Tensor::vector({1, 2})});
  write_checkpoint(dir / "good.ckpt", c);
  const std::string good = coseg::testing::read_file(dir / "good.ckpt");

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  coseg::testing::write_file(dir / "magic.ckpt", bad_magic);
  EXPECT_THROW(read_checkpoint(dir / "magic.ckpt"), InputError);

  std::string bad_version = good;
  bad_version[8] = 9;
  coseg::testing::write_file(dir / "version.ckpt", bad_version);
  EXPECT_THROW(read_checkpoint(dir / "version.ckpt"), InputError);

  std::string bad_hash = good;
  bad_hash[bad_hash.find("0.1")] = '9';
  coseg::testing::write_file(dir / "hash.ckpt", bad_hash);
  EXPECT_THROW(read_checkpoint(dir / "hash.ckpt"), InputError);

  coseg::testing::write_file(dir / "short.ckpt", good.substr(0, good.size() - 3));
  EXPECT_THROW(read_checkpoint(dir / "short.ckpt"), InputError);

  coseg::testing::write_file(dir / "long.ckpt", good + "x");
  EXPECT_THROW(read_checkpoint(dir / "long.ckpt"), InputError);

  EXPECT_THROW(read_checkpoint(dir / "absent.ckpt"), InputError);
}
