#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "smdma/core/bytes.hpp"
#include "smdma/nnkit/model.hpp"

namespace smdma::nn {

// "SMDMA-NN" followed by a NUL byte.
inline constexpr std::string_view model_magic{"SMDMA-NN\0", 9};
inline constexpr std::uint16_t model_format_version = 1;

/// Flat little-endian model file:
///   magic[9] version:u16 layers:u16
///   per layer: kind:u8, dims:u32... (dense: in,out; conv1d: in,out,kernel; relu: none),
///              weights:f64..., biases:f64...
inline Bytes serialize(const Model& model) {
  ByteWriter w;
  w.raw(model_magic);
  w.put<std::uint16_t>(model_format_version);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(model.size()));
  for (const auto& l : model.layers()) {
    w.put<std::uint8_t>(static_cast<std::uint8_t>(l.spec.kind));
    if (l.spec.kind == LayerKind::dense) {
      w.put<std::uint32_t>(static_cast<std::uint32_t>(l.spec.in));
      w.put<std::uint32_t>(static_cast<std::uint32_t>(l.spec.out));
    } else if (l.spec.kind == LayerKind::conv1d) {
      w.put<std::uint32_t>(static_cast<std::uint32_t>(l.spec.in));
      w.put<std::uint32_t>(static_cast<std::uint32_t>(l.spec.out));
      w.put<std::uint32_t>(static_cast<std::uint32_t>(l.spec.kernel));
    }
    for (double v : l.weight) w.put<double>(v);
    for (double v : l.bias) w.put<double>(v);
  }
  return std::move(w).take();
}

inline Model deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect(model_magic, "model file");
  const auto version = r.get<std::uint16_t>("version");
  if (version != model_format_version)
    throw ParseError(r.offset() - 2, "unsupported model format version " + std::to_string(version));
  const auto count = r.get<std::uint16_t>("layer count");
  Model model;
  for (std::uint16_t i = 0; i < count; ++i) {
    const std::size_t at = r.offset();
    const auto kind = r.get<std::uint8_t>("layer kind");
    Layer l;
    if (kind == static_cast<std::uint8_t>(LayerKind::dense)) {
      const auto in = r.get<std::uint32_t>("dense in"), out = r.get<std::uint32_t>("dense out");
      l.spec = LayerSpec::dense(in, out);
      if (in == 0 || out == 0) throw ParseError(at, "dense layer with zero dimension");
    } else if (kind == static_cast<std::uint8_t>(LayerKind::conv1d)) {
      const auto in = r.get<std::uint32_t>("conv in"), out = r.get<std::uint32_t>("conv out");
      const auto k = r.get<std::uint32_t>("conv kernel");
      if (in == 0 || out == 0 || k % 2 == 0) throw ParseError(at, "invalid conv1d dimensions");
      l.spec = LayerSpec::conv1d(in, out, k);
    } else if (kind == static_cast<std::uint8_t>(LayerKind::relu)) {
      l.spec = LayerSpec::relu();
    } else {
      throw ParseError(at, "unknown layer kind " + std::to_string(kind));
    }
    if (l.spec.kind != LayerKind::relu) {
      const std::size_t rows = l.spec.out, cols = l.spec.kind == LayerKind::dense ? l.spec.in : l.spec.in * l.spec.kernel;
      if (rows > r.remaining() / 8 / (cols + 1)) throw ParseError(r.offset(), "truncated layer parameters");
      l.weight = Tensor(rows, cols);
      l.bias = Tensor(rows);
      for (auto& v : l.weight) v = r.get<double>("weight");
      for (auto& v : l.bias) v = r.get<double>("bias");
    }
    model.append(std::move(l));
  }
  if (r.remaining() != 0) throw ParseError(r.offset(), "trailing bytes after model");
  return model;
}

inline void save_model(const Model& model, const std::string& path) { write_file(path, serialize(model)); }
inline Model load_model(const std::string& path) { return deserialize(read_file(path)); }

}  // namespace smdma::nn
