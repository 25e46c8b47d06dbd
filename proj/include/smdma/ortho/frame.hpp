#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include "smdma/core/bytes.hpp"
#include "smdma/nnkit/tensor.hpp"
#include "smdma/ranking/ranking.hpp"

namespace smdma::ortho {

inline constexpr std::string_view frame_magic{"SMDMA-FR"};
inline constexpr std::uint16_t frame_format_version = 1;

/// Noiseless side-channel metadata. In per-frame ranking mode both stream
/// permutations travel here (shared stream first).
struct FrameHeader {
  std::uint32_t dim = 0;   // d
  std::uint32_t kept = 0;  // K
  std::uint16_t q = 4;
  ranking::RankingMode mode = ranking::RankingMode::calibrated;
  ranking::Permutation shared_perm;
  ranking::Permutation delta_perm;
  double norm_scale = 1.0;

  friend bool operator==(const FrameHeader&, const FrameHeader&) = default;
};

struct Frame {
  FrameHeader header;
  nn::Tensor payload;  // q*K channel symbols
};

/// Throws ErrorKind::data describing the first inconsistency.
inline void validate(const FrameHeader& h, std::size_t payload_size) {
  auto bad = [](const std::string& what) { fail(ErrorKind::data, "frame error: " + what); };
  if (h.dim == 0) bad("zero feature dimension");
  if (h.kept == 0 || h.kept > h.dim) bad("preserved count " + std::to_string(h.kept) + " outside [1, " + std::to_string(h.dim) + "]");
  if (h.q == 0) bad("zero embedding length");
  if (!(h.norm_scale > 0.0) || !std::isfinite(h.norm_scale)) bad("norm_scale must be finite and positive");
  if (h.mode == ranking::RankingMode::per_frame) {
    if (!ranking::is_permutation(h.shared_perm, h.dim)) bad("invalid shared-stream permutation");
    if (!ranking::is_permutation(h.delta_perm, h.dim)) bad("invalid difference-stream permutation");
  } else if (!h.shared_perm.empty() || !h.delta_perm.empty()) {
    bad("calibrated frames carry no permutation");
  }
  if (payload_size != static_cast<std::size_t>(h.q) * h.kept)
    bad("payload length " + std::to_string(payload_size) + " != q*K = " + std::to_string(static_cast<std::size_t>(h.q) * h.kept));
}

/// magic[8] version:u16 d:u32 K:u32 q:u16 mode:u8 [perm_s:u32*d perm_d:u32*d] norm_scale:f64 payload:f64*(q*K)
inline Bytes encode_frame(const Frame& f) {
  validate(f.header, f.payload.size());
  ByteWriter w;
  w.raw(frame_magic);
  w.put<std::uint16_t>(frame_format_version);
  w.put<std::uint32_t>(f.header.dim);
  w.put<std::uint32_t>(f.header.kept);
  w.put<std::uint16_t>(f.header.q);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(f.header.mode));
  if (f.header.mode == ranking::RankingMode::per_frame) {
    for (auto p : f.header.shared_perm) w.put<std::uint32_t>(p);
    for (auto p : f.header.delta_perm) w.put<std::uint32_t>(p);
  }
  w.put<double>(f.header.norm_scale);
  for (double v : f.payload) w.put<double>(v);
  return std::move(w).take();
}

inline Frame decode_frame(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect(frame_magic, "frame");
  const auto version = r.get<std::uint16_t>("frame version");
  if (version != frame_format_version) throw ParseError(r.offset() - 2, "unsupported frame version");
  Frame f;
  f.header.dim = r.get<std::uint32_t>("d");
  f.header.kept = r.get<std::uint32_t>("K");
  f.header.q = r.get<std::uint16_t>("q");
  const auto mode_at = r.offset();
  const auto mode = r.get<std::uint8_t>("ranking mode");
  if (mode > 1) throw ParseError(mode_at, "unknown ranking mode");
  f.header.mode = static_cast<ranking::RankingMode>(mode);
  if (f.header.mode == ranking::RankingMode::per_frame) {
    if (static_cast<std::uint64_t>(f.header.dim) * 8 > r.remaining()) throw ParseError(r.offset(), "truncated permutations");
    f.header.shared_perm.resize(f.header.dim);
    f.header.delta_perm.resize(f.header.dim);
    for (auto& p : f.header.shared_perm) p = r.get<std::uint32_t>("permutation");
    for (auto& p : f.header.delta_perm) p = r.get<std::uint32_t>("permutation");
  }
  f.header.norm_scale = r.get<double>("norm_scale");
  const std::uint64_t n = static_cast<std::uint64_t>(f.header.q) * f.header.kept;
  if (n * 8 != r.remaining()) throw ParseError(r.offset(), "payload length does not match q*K");
  f.payload = nn::Tensor(static_cast<std::size_t>(n));
  for (auto& v : f.payload) v = r.get<double>("payload");
  validate(f.header, f.payload.size());
  return f;
}

}  // namespace smdma::ortho
