#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>

#include "smdma/core/bytes.hpp"
#include "smdma/media/image.hpp"

namespace smdma::media {

namespace detail {

inline bool pnm_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

// Skips whitespace and '#' comments; returns the next unsigned decimal field.
inline std::size_t pnm_field(std::span<const std::uint8_t> in, std::size_t& pos, const char* name) {
  for (;;) {
    if (pos >= in.size()) throw ParseError(pos, std::string("malformed header: missing ") + name);
    if (pnm_space(in[pos])) {
      ++pos;
    } else if (in[pos] == '#') {
      while (pos < in.size() && in[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  if (in[pos] < '0' || in[pos] > '9') throw ParseError(pos, std::string("malformed header: expected digits for ") + name);
  std::size_t value = 0;
  while (pos < in.size() && in[pos] >= '0' && in[pos] <= '9') {
    value = value * 10 + (in[pos] - '0');
    if (value > (1u << 24)) throw ParseError(pos, std::string("malformed header: ") + name + " too large");
    ++pos;
  }
  return value;
}

}  // namespace detail

/// Decode binary PGM (P5) or PPM (P6) with maxval 255.
inline Image decode_pnm(std::span<const std::uint8_t> in) {
  if (in.size() < 2 || in[0] != 'P' || (in[1] != '5' && in[1] != '6'))
    throw ParseError(0, "malformed header: expected P5 or P6 magic");
  const std::size_t channels = in[1] == '5' ? 1 : 3;
  std::size_t pos = 2;
  if (pos >= in.size() || !detail::pnm_space(in[pos])) throw ParseError(pos, "malformed header: expected whitespace after magic");
  const std::size_t width = detail::pnm_field(in, pos, "width");
  const std::size_t height = detail::pnm_field(in, pos, "height");
  const std::size_t maxval_at = pos;
  const std::size_t maxval = detail::pnm_field(in, pos, "maxval");
  if (width == 0 || height == 0) throw ParseError(maxval_at, "zero dimensions");
  if (maxval != 255) throw ParseError(maxval_at, "unsupported maxval " + std::to_string(maxval));
  if (pos >= in.size() || !detail::pnm_space(in[pos])) throw ParseError(pos, "malformed header: expected single whitespace before raster");
  ++pos;
  const std::size_t count = width * height * channels;
  if (in.size() - pos < count)
    throw ParseError(in.size(), "truncated payload: expected " + std::to_string(count) + " bytes, found " + std::to_string(in.size() - pos));
  std::vector<double> samples(count);
  for (std::size_t i = 0; i < count; ++i) samples[i] = static_cast<double>(in[pos + i]) / 255.0;
  return Image(height, width, channels, std::move(samples));
}

inline std::uint8_t quantize(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

/// Encode with a minimal header ("P5\n<w> <h>\n255\n"); samples are clamped and rounded.
inline Bytes encode_pnm(const Image& img) {
  const std::string header = std::string(img.channels() == 1 ? "P5" : "P6") + "\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.reserve(out.size() + img.size());
  for (double v : img.samples()) out.push_back(quantize(v));
  return out;
}

inline Image load_pnm(const std::string& path) { return decode_pnm(read_file(path)); }
inline void save_pnm(const Image& img, const std::string& path) { write_file(path, encode_pnm(img)); }

}  // namespace smdma::media
