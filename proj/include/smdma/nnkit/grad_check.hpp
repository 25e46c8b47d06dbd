#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <string>

#include "smdma/core/error.hpp"
#include "smdma/nnkit/model.hpp"

namespace smdma::nn {

template <class L>
concept Loss = requires(const L& l, const Tensor& t) {
  { l.value(t) } -> std::convertible_to<double>;
  { l.gradient(t) } -> std::convertible_to<Tensor>;
};

inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
  return std::abs(analytic - numeric) / denom;
}

/// Max relative error between backprop gradients and central differences over
/// every parameter of `model`. A model without parameters yields 0.
template <Loss L>
double grad_check(const Model& model, const L& loss, const Tensor& input, double eps) {
  require(eps > 0.0 && eps <= 1e-2, ErrorKind::usage, "grad_check: eps must lie in (0, 1e-2]");

  Tape tape;
  const Tensor out = forward(model, input, tape);
  Gradients grads = model.zero_gradients();
  backward(model, tape, loss.gradient(out), grads);

  Model probe = model;
  double worst = 0.0;
  for (std::size_t l = 0; l < probe.size(); ++l) {
    for (int which = 0; which < 2; ++which) {
      const std::size_t n = which == 0 ? probe.layer(l).weight.size() : probe.layer(l).bias.size();
      for (std::size_t i = 0; i < n; ++i) {
        auto& layer = probe.mutable_layer(l);
        double& p = which == 0 ? layer.weight[i] : layer.bias[i];
        const double saved = p;
        p = saved + eps;
        const double up = loss.value(forward(probe, input));
        p = saved - eps;
        const double down = loss.value(forward(probe, input));
        p = saved;
        const double numeric = (up - down) / (2.0 * eps);
        const double analytic = which == 0 ? grads.weight[l][i] : grads.bias[l][i];
        if (!std::isfinite(numeric) || !std::isfinite(analytic))
          fail(ErrorKind::numeric, "grad_check: non-finite value at layer " + std::to_string(l) +
                                       (which == 0 ? " weight[" : " bias[") + std::to_string(i) + "]");
        worst = std::max(worst, relative_error(analytic, numeric));
      }
    }
  }
  return worst;
}

}  // namespace smdma::nn
