#pragma once

#include <cmath>
#include <string>

#include "smdma/core/error.hpp"

namespace smdma::channel {

class SeriesError : public Error {
 public:
  SeriesError(double partial, const std::string& what) : Error(ErrorKind::numeric, what), partial_(partial) {}
  double partial() const noexcept { return partial_; }

 private:
  double partial_;
};

/// Kummer's confluent hypergeometric 1F1(a; b; x) by direct power series, for x >= 0.
/// Terms are summed until |term| < 1e-15 |sum|; 10^4 terms without convergence throws.
inline double hyp1f1(double a, double b, double x) {
  if (b <= 0.0 && b == std::floor(b)) fail(ErrorKind::usage, "hyp1f1: b must not be a non-positive integer");
  require(x >= 0.0, ErrorKind::usage, "hyp1f1: x must be non-negative");
  double term = 1.0;
  double sum = 1.0;
  for (int k = 0; k < 10000; ++k) {
    term *= (a + k) / (b + k) * x / (k + 1);
    sum += term;
    if (!std::isfinite(sum)) throw SeriesError(sum, "hyp1f1: series overflow");
    if (std::abs(term) < 1e-15 * std::abs(sum)) return sum;
    if (term == 0.0) return sum;
  }
  throw SeriesError(sum, "hyp1f1: no convergence after 10000 terms (partial " + std::to_string(sum) + ")");
}

}  // namespace smdma::channel
