#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "smdma/core/error.hpp"
#include "smdma/core/rng.hpp"
#include "smdma/media/image.hpp"
#include "smdma/media/pnm.hpp"

namespace smdma::media {

struct PairSpec {
  std::size_t size = 32;
  std::size_t channels = 1;
  double edit_fraction = 0.25;
  std::size_t shape_count = 3;
};

/// Axis-aligned edited rectangle [y0, y0+h) x [x0, x0+w).
struct EditRegion {
  std::size_t y0 = 0, x0 = 0, h = 0, w = 0;
  std::size_t area() const noexcept { return h * w; }
  bool contains(std::size_t y, std::size_t x) const noexcept { return y >= y0 && y < y0 + h && x >= x0 && x < x0 + w; }
};

struct ImagePair {
  Image first;
  Image second;
  EditRegion region;
};

namespace detail {

struct Blob {
  bool disc;
  double cy, cx, ry, rx, level;
};

// Smooth background: a tilted ramp plus two low-frequency sinusoids, then flat
// shapes composited on top. Every sample is snapped to the 8-bit grid.
inline void paint_scene(Image& img, Rng& rng, std::size_t shapes, std::size_t y_lo, std::size_t y_hi, std::size_t x_lo,
                        std::size_t x_hi) {
  const double n = static_cast<double>(img.width());
  const double gy = rng.uniform(-0.4, 0.4), gx = rng.uniform(-0.4, 0.4), base = rng.uniform(0.3, 0.7);
  const double f1 = rng.uniform(1.0, 3.0), f2 = rng.uniform(1.0, 3.0);
  const double p1 = rng.uniform(0.0, 2.0 * std::numbers::pi), p2 = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double a1 = rng.uniform(0.05, 0.15), a2 = rng.uniform(0.05, 0.15);
  std::vector<Blob> blobs;
  for (std::size_t s = 0; s < shapes; ++s) {
    blobs.push_back({rng.uniform() < 0.5, rng.uniform(0.0, n), rng.uniform(0.0, n), rng.uniform(0.1 * n, 0.3 * n),
                     rng.uniform(0.1 * n, 0.3 * n), rng.uniform(0.0, 1.0)});
  }
  std::vector<double> tint(img.channels());
  for (auto& t : tint) t = rng.uniform(-0.1, 0.1);
  for (std::size_t y = y_lo; y < y_hi; ++y) {
    for (std::size_t x = x_lo; x < x_hi; ++x) {
      const double u = static_cast<double>(y) / n, v = static_cast<double>(x) / n;
      double value = base + gy * (u - 0.5) + gx * (v - 0.5) + a1 * std::sin(2.0 * std::numbers::pi * f1 * u + p1) +
                     a2 * std::sin(2.0 * std::numbers::pi * f2 * v + p2);
      for (const auto& b : blobs) {
        const double dy = (static_cast<double>(y) - b.cy) / b.ry, dx = (static_cast<double>(x) - b.cx) / b.rx;
        const bool inside = b.disc ? dy * dy + dx * dx <= 1.0 : std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0;
        if (inside) value = b.level;
      }
      for (std::size_t c = 0; c < img.channels(); ++c) img.at(y, x, c) = value + tint[c];
    }
  }
}

inline void snap(Image& img) {
  for (auto& v : img.samples()) v = static_cast<double>(quantize(v)) / 255.0;
}

}  // namespace detail

/// Choose a rectangle whose area approximates edit_fraction * size^2.
inline EditRegion edit_region(std::size_t size, double edit_fraction, Rng& rng) {
  const double target = edit_fraction * static_cast<double>(size * size);
  if (target < 0.5) return {};
  std::size_t h = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(std::sqrt(target))), 1, size);
  std::size_t w = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(target / static_cast<double>(h))), 1, size);
  if (w == size) h = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(target / static_cast<double>(size))), 1, size);
  EditRegion r;
  r.h = h;
  r.w = w;
  r.y0 = static_cast<std::size_t>(rng.below(size - h + 1));
  r.x0 = static_cast<std::size_t>(rng.below(size - w + 1));
  return r;
}

/// Correlated pair: `second` equals `first` outside the edit region and carries
/// different content (every sample moved by at least 0.1) inside it.
inline ImagePair gen_pair(const PairSpec& spec, std::uint64_t seed) {
  require(spec.size >= 8, ErrorKind::usage, "image size " + std::to_string(spec.size) + " too small (minimum 8)");
  require(spec.edit_fraction >= 0.0 && spec.edit_fraction <= 1.0, ErrorKind::usage, "edit_fraction must lie in [0, 1]");
  Rng rng(seed);
  Rng scene_rng = rng.split(1), edit_rng = rng.split(2), region_rng = rng.split(3);

  ImagePair pair;
  pair.first = Image(spec.size, spec.size, spec.channels);
  detail::paint_scene(pair.first, scene_rng, spec.shape_count, 0, spec.size, 0, spec.size);
  detail::snap(pair.first);

  pair.region = edit_region(spec.size, spec.edit_fraction, region_rng);
  pair.second = pair.first;
  if (pair.region.area() == 0) return pair;

  Image patch(spec.size, spec.size, spec.channels);
  const auto& r = pair.region;
  detail::paint_scene(patch, edit_rng, spec.shape_count, r.y0, r.y0 + r.h, r.x0, r.x0 + r.w);
  for (std::size_t y = r.y0; y < r.y0 + r.h; ++y)
    for (std::size_t x = r.x0; x < r.x0 + r.w; ++x)
      for (std::size_t c = 0; c < spec.channels; ++c) {
        const double orig = pair.first.at(y, x, c);
        double v = std::clamp(patch.at(y, x, c), 0.0, 1.0);
        if (std::abs(v - orig) < 0.1) v = orig > 0.5 ? orig - 0.3 : orig + 0.3;
        pair.second.at(y, x, c) = v;
      }
  detail::snap(pair.second);
  return pair;
}

}  // namespace smdma::media
