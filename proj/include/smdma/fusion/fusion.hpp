#pragma once

#include <cmath>
#include <span>
#include <utility>

#include "smdma/core/error.hpp"
#include "smdma/nnkit/tensor.hpp"

namespace smdma::fusion {

struct FusionConfig {
  double tau = 0.05;

  void validate() const { require(tau >= 0.0 && std::isfinite(tau), ErrorKind::config, "fusion.tau must be finite and >= 0"); }
};

/// Shared features (the first source verbatim) plus the thresholded difference.
struct FusionPair {
  nn::Tensor shared;
  nn::Tensor delta;

  std::size_t dim() const noexcept { return shared.size(); }
};

/// delta_i = f2_i - f1_i where |f2_i - f1_i| > tau, else 0.
inline FusionPair fuse(const nn::Tensor& f1, const nn::Tensor& f2, const FusionConfig& cfg) {
  cfg.validate();
  if (f1.size() != f2.size())
    fail(ErrorKind::shape, "fuse: feature lengths differ (" + std::to_string(f1.size()) + " vs " + std::to_string(f2.size()) + ")");
  FusionPair p{f1, nn::Tensor(f1.size())};
  for (std::size_t i = 0; i < f1.size(); ++i) {
    const double d = f2[i] - f1[i];
    p.delta[i] = std::abs(d) > cfg.tau ? d : 0.0;
  }
  return p;
}

/// Receiver-side inverse: (shared, shared + delta).
inline std::pair<nn::Tensor, nn::Tensor> defuse(const FusionPair& pair) {
  if (pair.shared.size() != pair.delta.size()) fail(ErrorKind::shape, "defuse: component lengths differ");
  nn::Tensor second = pair.shared;
  for (std::size_t i = 0; i < second.size(); ++i) second[i] += pair.delta[i];
  return {pair.shared, std::move(second)};
}

}  // namespace smdma::fusion
