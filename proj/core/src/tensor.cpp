/*
 * Copyright 2026 The MCRD Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mcrd/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "mcrd/errors.hpp"

namespace mcrd {

std::string ShapeToString(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t ShapeSize(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  for (std::size_t d : shape_) {
    if (d == 0) throw DimensionError("zero dimension in " + ShapeToString(shape_));
  }
  values_.assign(ShapeSize(shape_), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  for (std::size_t d : shape_) {
    if (d == 0) throw DimensionError("zero dimension in " + ShapeToString(shape_));
  }
  if (ShapeSize(shape_) != values_.size()) {
    throw DimensionError("shape " + ShapeToString(shape_) + " needs " +
                         std::to_string(ShapeSize(shape_)) + " values, got " +
                         std::to_string(values_.size()));
  }
}

Tensor Tensor::Scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::Vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::Matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

double Tensor::item() const {
  if (values_.size() != 1) {
    throw DimensionError("item() on non-scalar " + ShapeToString(shape_));
  }
  return values_[0];
}

bool Tensor::AllFinite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::Fill(double value) {
  std::fill(values_.begin(), values_.end(), value);
}

void SparseBuilder::Add(std::size_t col, double value) {
  if (col >= matrix_.cols) {
    throw RangeError("sparse column " + std::to_string(col) + " >= " +
                     std::to_string(matrix_.cols));
  }
  matrix_.col_indices.push_back(col);
  matrix_.values.push_back(value);
}

void SparseBuilder::EndRow() {
  matrix_.row_offsets.push_back(matrix_.col_indices.size());
  ++matrix_.rows;
}

SparseMatrix SparseBuilder::Build() && { return std::move(matrix_); }

}  // namespace mcrd
