#include "coseg/numerics/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "coseg/error.hpp"

namespace coseg {

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor Tensor::vector(std::vector<double> values) {
  Tensor t;
  t.rows_ = values.size();
  t.cols_ = 1;
  t.data_ = std::move(values);
  return t;
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  if (values.size() != rows * cols) {
    throw ShapeError("matrix: " + std::to_string(values.size()) + " values for shape " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
  Tensor t;
  t.rows_ = rows;
  t.cols_ = cols;
  t.data_ = std::move(values);
  return t;
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

bool operator==(const Tensor& a, const Tensor& b) {
  return a.same_shape(b) && std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

}  // namespace coseg
