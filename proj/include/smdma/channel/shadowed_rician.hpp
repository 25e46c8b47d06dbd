#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "smdma/channel/hyp1f1.hpp"
#include "smdma/core/error.hpp"
#include "smdma/core/rng.hpp"

namespace smdma::channel {

/// Shadowed-Rician parameters: scatter power b0 (per real dimension), Nakagami
/// shadowing m, and line-of-sight power omega.
struct SrParams {
  double b0 = 0.158;
  double m = 19.4;
  double omega = 1.29;

  void validate() const {
    require(b0 > 0.0 && m > 0.0 && omega >= 0.0 && std::isfinite(b0) && std::isfinite(m) && std::isfinite(omega),
            ErrorKind::config, "Shadowed-Rician parameters need b0 > 0, m > 0, omega >= 0");
  }

  double mean_power() const noexcept { return 2.0 * b0 + omega; }
};

/// Density of the channel power gain r >= 0, evaluated in the log domain.
inline double sr_pdf(double r, const SrParams& p) {
  p.validate();
  require(r >= 0.0, ErrorKind::usage, "sr_pdf: r must be non-negative");
  const double two_b0 = 2.0 * p.b0;
  const double denom = two_b0 * p.m + p.omega;
  const double x = p.omega * r / (two_b0 * denom);
  const double log_pdf = p.m * std::log(two_b0 * p.m / denom) - std::log(two_b0) - r / two_b0 + std::log(hyp1f1(p.m, 1.0, x));
  return std::exp(log_pdf);
}

/// Tabulated CDF from composite Simpson integration of sr_pdf on [0, r_max].
class SrCdf {
 public:
  explicit SrCdf(const SrParams& p, std::size_t intervals = 20000) : params_(p) {
    p.validate();
    r_max_ = std::max(1.0, p.mean_power());
    while (!(sr_pdf(r_max_, p) * r_max_ < 1e-16 && r_max_ > 4.0 * p.mean_power())) r_max_ *= 2.0;
    const std::size_t n = intervals + (intervals % 2);
    step_ = r_max_ / static_cast<double>(n);
    std::vector<double> f(n + 1);
    for (std::size_t i = 0; i <= n; ++i) f[i] = sr_pdf(step_ * static_cast<double>(i), p);
    // Simpson over each pair of sub-intervals; the odd node in between takes the
    // integral of the same interpolating quadratic over the first half.
    cdf_.assign(n + 1, 0.0);
    for (std::size_t i = 0; i + 2 <= n; i += 2) {
      const double a = f[i], b = f[i + 1], c = f[i + 2];
      cdf_[i + 1] = cdf_[i] + step_ / 12.0 * (5.0 * a + 8.0 * b - c);
      cdf_[i + 2] = cdf_[i] + step_ / 3.0 * (a + 4.0 * b + c);
    }
  }

  double operator()(double r) const noexcept {
    if (r <= 0.0) return 0.0;
    const double pos = r / step_;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= cdf_.size()) return std::min(1.0, cdf_.back());
    const double t = pos - static_cast<double>(i);
    return cdf_[i] + t * (cdf_[i + 1] - cdf_[i]);
  }

  double total() const noexcept { return cdf_.back(); }
  double r_max() const noexcept { return r_max_; }

 private:
  SrParams params_;
  double r_max_ = 0.0;
  double step_ = 0.0;
  std::vector<double> cdf_;
};

/// One power-gain draw: |sqrt(G) + Z|^2 with G ~ Gamma(m, omega/m) and Z a
/// circular complex Gaussian with E|Z|^2 = 2 b0. Draw order: gamma, then the real
/// and imaginary scatter components.
inline double sr_draw(const SrParams& p, Rng& rng) {
  const double g = p.omega > 0.0 ? rng.gamma(p.m, p.omega / p.m) : 0.0;
  const double los = std::sqrt(g);
  const double sd = std::sqrt(p.b0);
  const double re = los + sd * rng.normal();
  const double im = sd * rng.normal();
  return re * re + im * im;
}

inline std::vector<double> sr_sample(std::size_t n, const SrParams& p, std::uint64_t seed) {
  require(n >= 1, ErrorKind::usage, "sr_sample: n must be at least 1");
  p.validate();
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& r : out) r = sr_draw(p, rng);
  return out;
}

/// Two-sided Kolmogorov-Smirnov statistic of samples against a CDF.
template <class Cdf>
double ks_statistic(std::vector<double> samples, const Cdf& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Asymptotic alpha = 0.01 critical value.
inline double ks_critical_001(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

}  // namespace smdma::channel
