#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "smdma/media/image.hpp"

namespace smdma::media {

struct MetricConfig {
  double dynamic_range = 255.0;  // L
  double k1 = 0.01;
  double k2 = 0.03;
  double psnr_max = 255.0;

  double c1() const noexcept { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const noexcept { return (k2 * dynamic_range) * (k2 * dynamic_range); }
};

/// Mean squared error on the [0, 255] scale after clamping both images to [0, 1].
inline double mse_255(const Image& a, const Image& b) {
  require_same_shape(a, b, "mse");
  const auto sa = a.samples(), sb = b.samples();
  double s = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const double d = 255.0 * std::clamp(sa[i], 0.0, 1.0) - 255.0 * std::clamp(sb[i], 0.0, 1.0);
    s += d * d;
  }
  return s / static_cast<double>(sa.size());
}

inline double psnr_from_mse(double mse, double max = 255.0) {
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(max * max / mse);
}

/// PSNR in dB; +infinity for identical images.
inline double psnr(const Image& a, const Image& b, const MetricConfig& cfg = {}) {
  return psnr_from_mse(mse_255(a, b), cfg.psnr_max);
}

/// Global-statistics SSIM per channel (one window covering the whole image,
/// population moments), averaged over channels.
inline double ssim(const Image& a, const Image& b, const MetricConfig& cfg = {}) {
  require_same_shape(a, b, "ssim");
  const std::size_t channels = a.channels();
  const std::size_t n = a.height() * a.width();
  const double scale = cfg.dynamic_range;
  const double c1 = cfg.c1(), c2 = cfg.c2();
  double total = 0.0;
  for (std::size_t c = 0; c < channels; ++c) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += scale * std::clamp(a.samples()[i * channels + c], 0.0, 1.0);
      my += scale * std::clamp(b.samples()[i * channels + c], 0.0, 1.0);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double vx = 0.0, vy = 0.0, cxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = scale * std::clamp(a.samples()[i * channels + c], 0.0, 1.0) - mx;
      const double dy = scale * std::clamp(b.samples()[i * channels + c], 0.0, 1.0) - my;
      vx += dx * dx;
      vy += dy * dy;
      cxy += dx * dy;
    }
    vx /= static_cast<double>(n);
    vy /= static_cast<double>(n);
    cxy /= static_cast<double>(n);
    total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(channels);
}

}  // namespace smdma::media
