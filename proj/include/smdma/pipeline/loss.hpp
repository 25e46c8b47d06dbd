#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "smdma/core/error.hpp"
#include "smdma/pipeline/config.hpp"

namespace smdma::pipeline {

struct LossReport {
  std::vector<double> losses;    // L_1..L_M
  double combined = 0.0;         // L_all
  std::vector<double> gradient;  // dL_all / dL_i
};

inline constexpr double loss_guard = 1e-12;

/// Geometric: L_all = (prod L_i)^(1/M), dL_all/dL_i = L_all / (M max(L_i, guard)).
/// Arithmetic: mean, with constant 1/M gradients.
inline LossReport combined_loss(std::span<const double> losses, Combiner combiner) {
  require(!losses.empty(), ErrorKind::usage, "combined_loss: no user losses");
  const double m = static_cast<double>(losses.size());
  LossReport r{{losses.begin(), losses.end()}, 0.0, {}};
  for (double l : losses) {
    if (!(l >= 0.0)) fail(ErrorKind::numeric, "combined_loss: negative or NaN user loss");
  }
  if (combiner == Combiner::arithmetic) {
    for (double l : losses) r.combined += l;
    r.combined /= m;
    r.gradient.assign(losses.size(), 1.0 / m);
    return r;
  }
  bool any_zero = false;
  double log_sum = 0.0;
  for (double l : losses) {
    if (l == 0.0) any_zero = true;
    else log_sum += std::log(l);
  }
  if (any_zero) r.combined = 0.0;
  else if (losses.size() == 2) r.combined = std::sqrt(losses[0] * losses[1]);
  else r.combined = std::exp(log_sum / m);
  for (double l : losses) r.gradient.push_back(r.combined / (m * std::max(l, loss_guard)));
  return r;
}

}  // namespace smdma::pipeline
