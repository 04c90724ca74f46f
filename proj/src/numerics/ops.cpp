#include "coseg/numerics/ops.hpp"

#include <algorithm>
#include <cmath>

#include "coseg/error.hpp"

namespace coseg {

namespace {

void require_vector(const Tensor& t, const char* op) {
  if (!t.is_vector() || t.size() == 0) {
    throw ShapeError(std::string(op) + ": expected non-empty column vector, got " +
                     t.shape_string());
  }
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                     b.shape_string());
  }
}

Tape& tape_of(Var a, Var b) {
  if (&a.tape() != &b.tape()) throw std::invalid_argument("ops: operands on different tapes");
  return a.tape();
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw ShapeError("softmax: empty vector");
  double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

double log_sum_exp(std::span<const double> logits) {
  if (logits.empty()) throw ShapeError("log_sum_exp: empty vector");
  double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double v : logits) total += std::exp(v - mx);
  return mx + std::log(total);
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw ShapeError("argmax: empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

Var matvec(Var w, Var x) {
  Tape& tape = tape_of(w, x);
  const Tensor& W = w.value();
  const Tensor& X = x.value();
  if (!X.is_vector() || W.cols() != X.rows()) {
    throw ShapeError("matvec: " + W.shape_string() + " * " + X.shape_string());
  }
  Tensor out(W.rows(), 1);
  for (std::size_t r = 0; r < W.rows(); ++r) {
    const double* wr = &W.data()[r * W.cols()];
    double acc = 0.0;
    for (std::size_t c = 0; c < W.cols(); ++c) acc += wr[c] * X[c];
    out[r] = acc;
  }
  std::size_t wi = w.id(), xi = x.id();
  return tape.record(std::move(out), [wi, xi](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& Wv = t.value(wi);
    const Tensor& Xv = t.value(xi);
    Tensor& gw = t.grad(wi);
    Tensor& gx = t.grad(xi);
    const std::size_t cols = Wv.cols();
    for (std::size_t r = 0; r < Wv.rows(); ++r) {
      const double gr = g[r];
      if (gr == 0.0) continue;
      double* gwr = &gw.data()[r * cols];
      const double* wr = &Wv.data()[r * cols];
      for (std::size_t c = 0; c < cols; ++c) {
        gwr[c] += gr * Xv[c];
        gx[c] += gr * wr[c];
      }
    }
  });
}

Var add(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  require_same(a.value(), b.value(), "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  std::size_t ai = a.id(), bi = b.id();
  return tape.record(std::move(out), [ai, bi](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    Tensor& gb = t.grad(bi);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
  });
}

Var sub(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  require_same(a.value(), b.value(), "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  std::size_t ai = a.id(), bi = b.id();
  return tape.record(std::move(out), [ai, bi](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    Tensor& gb = t.grad(bi);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
  });
}

Var mul(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  require_same(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  std::size_t ai = a.id(), bi = b.id();
  return tape.record(std::move(out), [ai, bi](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& av = t.value(ai);
    const Tensor& bv = t.value(bi);
    Tensor& ga = t.grad(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    Tensor& gb = t.grad(bi);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
  });
}

Var scale(Var a, double factor) {
  Tensor out = a.value();
  for (double& v : out.data()) v *= factor;
  std::size_t ai = a.id();
  return a.tape().record(std::move(out), [ai, factor](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * factor;
  });
}

Var sigmoid(Var a) {
  Tensor out = a.value();
  for (double& v : out.data()) v = stable_sigmoid(v);
  std::size_t ai = a.id();
  return a.tape().record(std::move(out), [ai](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    Tensor& ga = t.grad(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var tanh(Var a) {
  Tensor out = a.value();
  for (double& v : out.data()) v = std::tanh(v);
  std::size_t ai = a.id();
  return a.tape().record(std::move(out), [ai](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    Tensor& ga = t.grad(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat: no parts");
  Tape& tape = parts.front().tape();
  std::size_t total = 0;
  std::vector<std::size_t> ids;
  ids.reserve(parts.size());
  for (const Var& p : parts) {
    if (&p.tape() != &tape) throw std::invalid_argument("concat: operands on different tapes");
    if (!p.value().is_vector() && p.value().size() != 0) {
      throw ShapeError("concat: expected column vectors, got " + p.value().shape_string());
    }
    total += p.value().size();
    ids.push_back(p.id());
  }
  Tensor out(total, 1);
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    std::copy(v.data().begin(), v.data().end(), out.data().begin() + static_cast<long>(off));
    off += v.size();
  }
  return tape.record(std::move(out), [ids = std::move(ids)](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    std::size_t off = 0;
    for (std::size_t id : ids) {
      Tensor& gp = t.grad(id);
      for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[off + i];
      off += gp.size();
    }
  });
}

Var concat(Var a, Var b) {
  const Var parts[] = {a, b};
  return concat(parts);
}

Var slice(Var a, std::size_t offset, std::size_t length) {
  const Tensor& v = a.value();
  if (!v.is_vector() || offset + length > v.size()) {
    throw ShapeError("slice: [" + std::to_string(offset) + ", " +
                     std::to_string(offset + length) + ") out of range for " +
                     v.shape_string());
  }
  Tensor out(length, 1);
  std::copy_n(v.data().begin() + static_cast<long>(offset), length, out.data().begin());
  std::size_t ai = a.id();
  return a.tape().record(std::move(out), [ai, offset](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[offset + i] += g[i];
  });
}

Var lookup(Var table, std::size_t row) {
  const Tensor& m = table.value();
  if (row >= m.rows()) {
    throw ShapeError("lookup: row " + std::to_string(row) + " out of range for " +
                     m.shape_string());
  }
  auto src = m.row(row);
  Tensor out = Tensor::vector(std::vector<double>(src.begin(), src.end()));
  std::size_t ti = table.id();
  return table.tape().record(std::move(out), [ti, row](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    auto gr = t.grad(ti).row(row);
    for (std::size_t i = 0; i < g.size(); ++i) gr[i] += g[i];
  });
}

Var softmax(Var logits) {
  require_vector(logits.value(), "softmax");
  Tensor out = Tensor::vector(softmax(logits.value().data()));
  std::size_t li = logits.id();
  return logits.tape().record(std::move(out), [li](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    double dot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * y[i];
    Tensor& gl = t.grad(li);
    for (std::size_t i = 0; i < g.size(); ++i) gl[i] += y[i] * (g[i] - dot);
  });
}

Var cross_entropy(Var logits, std::size_t target) {
  const Tensor& l = logits.value();
  require_vector(l, "cross_entropy");
  if (target >= l.size()) {
    throw ShapeError("cross_entropy: target " + std::to_string(target) + " out of range for " +
                     std::to_string(l.size()) + " classes");
  }
  double loss = log_sum_exp(l.data()) - l[target];
  std::size_t li = logits.id();
  return logits.tape().record(Tensor(1, 1, loss), [li, target](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    std::vector<double> p = softmax(t.value(li).data());
    p[target] -= 1.0;
    Tensor& gl = t.grad(li);
    for (std::size_t i = 0; i < p.size(); ++i) gl[i] += g * p[i];
  });
}

Var sum(Var a) {
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  std::size_t ai = a.id();
  return a.tape().record(Tensor(1, 1, total), [ai](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    for (double& v : t.grad(ai).data()) v += g;
  });
}

Var add_n(std::span<const Var> terms) {
  if (terms.empty()) throw ShapeError("add_n: no terms");
  Tape& tape = terms.front().tape();
  Tensor out = terms.front().value();
  std::vector<std::size_t> ids{terms.front().id()};
  for (std::size_t k = 1; k < terms.size(); ++k) {
    require_same(out, terms[k].value(), "add_n");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += terms[k].value()[i];
    ids.push_back(terms[k].id());
  }
  return tape.record(std::move(out), [ids = std::move(ids)](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    for (std::size_t id : ids) {
      Tensor& gi = t.grad(id);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
  });
}

Var weighted_sum(Var weights, std::span<const Var> items) {
  const Tensor& w = weights.value();
  if (!w.is_vector() || w.size() != items.size() || items.empty()) {
    throw ShapeError("weighted_sum: " + std::to_string(items.size()) + " items for weights " +
                     w.shape_string());
  }
  Tensor out(items.front().value().rows(), items.front().value().cols());
  std::vector<std::size_t> ids;
  ids.reserve(items.size());
  for (std::size_t k = 0; k < items.size(); ++k) {
    const Tensor& v = items[k].value();
    require_same(out, v, "weighted_sum");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w[k] * v[i];
    ids.push_back(items[k].id());
  }
  std::size_t wi = weights.id();
  return weights.tape().record(
      std::move(out), [wi, ids = std::move(ids)](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        const Tensor& wv = t.value(wi);
        Tensor& gw = t.grad(wi);
        for (std::size_t k = 0; k < ids.size(); ++k) {
          const Tensor& v = t.value(ids[k]);
          Tensor& gv = t.grad(ids[k]);
          double dot = 0.0;
          for (std::size_t i = 0; i < g.size(); ++i) {
            dot += g[i] * v[i];
            gv[i] += g[i] * wv[k];
          }
          gw[k] += dot;
        }
      });
}

}  // namespace coseg
