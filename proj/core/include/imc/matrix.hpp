#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace imc {

// Dense row-major matrix of doubles. Transition matrices here are small
// (|E| x |E| with |E| around 5), so no linear-algebra backend is needed.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix uniform(std::size_t n) { return Matrix(n, n, 1.0 / static_cast<double>(n)); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double row_sum(std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j);
    return s;
  }

  bool is_stochastic(double tol = 1e-9) const {
    if (rows_ == 0 || rows_ != cols_) return false;
    for (double v : data_)
      if (!(v >= 0.0) || !std::isfinite(v)) return false;
    for (std::size_t i = 0; i < rows_; ++i)
      if (std::abs(row_sum(i) - 1.0) > tol) return false;
    return true;
  }

  // Rows summing to zero are left untouched.
  void normalize_rows() {
    for (std::size_t i = 0; i < rows_; ++i) {
      const double s = row_sum(i);
      if (s > 0.0)
        for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) /= s;
    }
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

// Integer-valued companion used for transition counts.
class Counts {
 public:
  Counts() = default;
  Counts(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

  std::int64_t& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  std::int64_t operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::int64_t row_sum(std::size_t i) const {
    std::int64_t s = 0;
    for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j);
    return s;
  }

  std::int64_t total() const {
    std::int64_t s = 0;
    for (auto v : data_) s += v;
    return s;
  }

  void add(const Counts& o) {
    for (std::size_t t = 0; t < data_.size(); ++t) data_[t] += o.data_[t];
  }
  void subtract(const Counts& o) {
    for (std::size_t t = 0; t < data_.size(); ++t) data_[t] -= o.data_[t];
  }

  friend bool operator==(const Counts&, const Counts&) = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<std::int64_t> data_;
};

}  // namespace imc
