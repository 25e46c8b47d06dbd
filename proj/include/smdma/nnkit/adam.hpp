#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "smdma/core/error.hpp"
#include "smdma/nnkit/model.hpp"

namespace smdma::nn {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam over a fixed list of parameter blocks.
class Adam {
 public:
  Adam() = default;
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  const AdamConfig& config() const noexcept { return cfg_; }
  std::uint64_t step_count() const noexcept { return step_; }
  const std::vector<std::vector<double>>& first_moments() const noexcept { return m_; }
  const std::vector<std::vector<double>>& second_moments() const noexcept { return v_; }

  void step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads) {
    if (params.size() != grads.size()) fail(ErrorKind::shape, "adam: parameter/gradient block count mismatch");
    if (m_.empty()) {
      for (const auto& p : params) {
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
      }
    }
    if (m_.size() != params.size()) fail(ErrorKind::shape, "adam: parameter layout changed between steps");
    for (std::size_t b = 0; b < params.size(); ++b)
      if (params[b].size() != grads[b].size() || params[b].size() != m_[b].size())
        fail(ErrorKind::shape, "adam: block " + std::to_string(b) + " shape mismatch");

    ++step_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t b = 0; b < params.size(); ++b) {
      auto p = params[b];
      auto g = grads[b];
      auto& m = m_[b];
      auto& v = v_[b];
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
        v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
        const double mh = m[i] / c1;
        const double vh = v[i] / c2;
        p[i] -= cfg_.learning_rate * mh / (std::sqrt(vh) + cfg_.epsilon);
      }
    }
  }

  void step(Model& model, const Gradients& grads) {
    auto params = model.parameter_blocks();
    auto g = grads.blocks();
    step(params, g);
  }

 private:
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  std::uint64_t step_ = 0;
};

}  // namespace smdma::nn
