#pragma once

#include <span>

#include "smdma/core/error.hpp"
#include "smdma/nnkit/tensor.hpp"

namespace smdma::nn {

inline double mse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    fail(ErrorKind::shape, "mse: length mismatch " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  if (a.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

inline double mse(const Tensor& a, const Tensor& b) { return mse(a.span(), b.span()); }

/// d mse(output, target) / d output.
inline Tensor mse_gradient(const Tensor& output, const Tensor& target) {
  if (output.size() != target.size()) fail(ErrorKind::shape, "mse_gradient: length mismatch");
  Tensor g(output.size());
  const double scale = output.empty() ? 0.0 : 2.0 / static_cast<double>(output.size());
  for (std::size_t i = 0; i < output.size(); ++i) g[i] = scale * (output[i] - target[i]);
  return g;
}

/// Squared-error loss against a fixed target, usable by grad_check.
struct MseLoss {
  Tensor target;
  double value(const Tensor& out) const { return mse(out, target); }
  Tensor gradient(const Tensor& out) const { return mse_gradient(out, target); }
};

}  // namespace smdma::nn
