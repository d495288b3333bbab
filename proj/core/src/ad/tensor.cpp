#include "rumi/ad/tensor.hpp"

#include <functional>
#include <numeric>

namespace rumi::ad {

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

namespace {
std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}
}  // namespace

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (element_count(shape_) != data_.size()) {
    throw ShapeError("tensor: shape " + shape_string(shape_) + " does not hold " +
                     std::to_string(data_.size()) + " elements");
  }
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, double fill) {
  return Tensor({rows, cols}, fill);
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::initializer_list<double> values) {
  return Tensor({rows, cols}, std::vector<double>(values));
}

Tensor Tensor::column(std::initializer_list<double> values) {
  return Tensor({values.size(), 1}, std::vector<double>(values));
}

Tensor Tensor::column(std::span<const double> values) {
  return Tensor({values.size(), 1}, std::vector<double>(values.begin(), values.end()));
}

Tensor Tensor::scalar(double v) { return Tensor({1, 1}, std::vector<double>{v}); }

std::size_t Tensor::rows() const {
  if (shape_.size() != 2) throw ShapeError("tensor: rank-2 expected, got " + shape_string(shape_));
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (shape_.size() != 2) throw ShapeError("tensor: rank-2 expected, got " + shape_string(shape_));
  return shape_[1];
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("tensor: item() on " + shape_string(shape_));
  return data_[0];
}

std::vector<double> Tensor::column_values(std::size_t c) const {
  const std::size_t r = rows();
  std::vector<double> out(r);
  for (std::size_t i = 0; i < r; ++i) out[i] = at(i, c);
  return out;
}

}  // namespace rumi::ad
