#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "smdma/core/error.hpp"

namespace smdma::nn {

/// Dense row-major real tensor of rank 1 or 2. The shape is fixed at construction;
/// only element values are mutable.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::size_t n, double fill = 0.0) : data_(n, fill), rows_(n), cols_(1), rank_(1) {}
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : data_(rows * cols, fill), rows_(rows), cols_(cols), rank_(2) {}
  Tensor(std::initializer_list<double> values) : data_(values), rows_(values.size()), cols_(1), rank_(1) {}
  explicit Tensor(std::vector<double> values) : data_(std::move(values)), rows_(data_.size()), cols_(1), rank_(1) {}
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> values)
      : data_(std::move(values)), rows_(rows), cols_(cols), rank_(2) {
    if (data_.size() != rows * cols) fail(ErrorKind::shape, "tensor data does not match shape");
  }

  std::size_t rank() const noexcept { return rank_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  const std::vector<double>& values() const noexcept { return data_; }

  void fill(double v) noexcept { std::fill(data_.begin(), data_.end(), v); }

  bool same_shape(const Tensor& o) const noexcept { return rank_ == o.rank_ && rows_ == o.rows_ && cols_ == o.cols_; }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Tensor& a, const Tensor& b) noexcept {
    return a.same_shape(b) && a.data_ == b.data_;
  }

 private:
  std::vector<double> data_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 1;
  std::size_t rank_ = 1;
};

inline Tensor to_tensor(std::span<const double> values) { return Tensor(std::vector<double>(values.begin(), values.end())); }

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace smdma::nn
