#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "smdma/core/error.hpp"

namespace smdma::media {

/// Interleaved (row, column, channel) image with samples in [0, 1].
class Image {
 public:
  Image() = default;
  Image(std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0)
      : h_(height), w_(width), c_(channels), samples_(height * width * channels, fill) {
    require(channels == 1 || channels == 3, ErrorKind::usage, "image channels must be 1 or 3");
  }
  Image(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> samples)
      : Image(height, width, channels) {
    require(samples.size() == samples_.size(), ErrorKind::shape, "image sample count does not match H*W*C");
    samples_ = std::move(samples);
  }

  std::size_t height() const noexcept { return h_; }
  std::size_t width() const noexcept { return w_; }
  std::size_t channels() const noexcept { return c_; }
  std::size_t size() const noexcept { return samples_.size(); }

  double& at(std::size_t y, std::size_t x, std::size_t ch = 0) noexcept { return samples_[(y * w_ + x) * c_ + ch]; }
  double at(std::size_t y, std::size_t x, std::size_t ch = 0) const noexcept { return samples_[(y * w_ + x) * c_ + ch]; }

  std::span<double> samples() noexcept { return samples_; }
  std::span<const double> samples() const noexcept { return samples_; }

  bool same_shape(const Image& o) const noexcept { return h_ == o.h_ && w_ == o.w_ && c_ == o.c_; }

  Image clamped() const {
    Image out = *this;
    for (auto& v : out.samples_) v = std::clamp(v, 0.0, 1.0);
    return out;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t h_ = 0, w_ = 0, c_ = 1;
  std::vector<double> samples_;
};

inline void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) fail(ErrorKind::shape, std::string(what) + ": image shapes differ");
}

}  // namespace smdma::media
