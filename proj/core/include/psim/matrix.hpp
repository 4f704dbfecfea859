#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace psim {

/// Dense row-major matrix of doubles. Just enough for h-matrices and
/// probability tables; rows are exposed as contiguous spans.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative dimension");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  std::span<double> row(int r) { return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)}; }
  std::span<const double> row(int r) const { return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)}; }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// Row-normalized copy: each row scaled to sum 1. Rows must have positive sum.
Matrix row_normalized(const Matrix& m);

}  // namespace psim
