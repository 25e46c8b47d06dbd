#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "smdma/channel/shadowed_rician.hpp"
#include "smdma/core/error.hpp"
#include "smdma/core/rng.hpp"
#include "smdma/nnkit/tensor.hpp"

namespace smdma::channel {

enum class ChannelMode { sr_fading, awgn_only, ideal };

inline const char* to_string(ChannelMode m) {
  switch (m) {
    case ChannelMode::sr_fading: return "sr_fading";
    case ChannelMode::awgn_only: return "awgn_only";
    case ChannelMode::ideal: return "ideal";
  }
  return "?";
}

inline ChannelMode parse_channel_mode(const std::string& s) {
  if (s == "sr_fading") return ChannelMode::sr_fading;
  if (s == "awgn_only") return ChannelMode::awgn_only;
  if (s == "ideal") return ChannelMode::ideal;
  fail(ErrorKind::config, "unknown channel mode '" + s + "'");
}

/// Noise variance at unit transmit power: 10^(-snr/10).
inline double noise_variance(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

/// One block-fading use of the channel by one user.
struct ChannelRealization {
  ChannelMode mode = ChannelMode::awgn_only;
  double snr_db = 0.0;
  double gain = 1.0;            // power gain r
  double noise_var = 1.0;       // sigma^2
  std::uint64_t noise_seed = 0;

  /// SNR after fading, 10 log10(r / sigma^2).
  double post_fading_snr_db() const {
    if (noise_var == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(gain / noise_var);
  }
};

/// Draw the frame's fading gain (sr mode) and reserve a noise stream. The ideal
/// mode has unit gain and no noise regardless of snr_db.
inline ChannelRealization draw_realization(ChannelMode mode, double snr_db, const SrParams& params, Rng& rng) {
  ChannelRealization r;
  r.mode = mode;
  r.snr_db = snr_db;
  r.noise_var = mode == ChannelMode::ideal ? 0.0 : noise_variance(snr_db);
  r.gain = mode == ChannelMode::sr_fading ? sr_draw(params, rng) : 1.0;
  r.noise_seed = rng.next_u64();
  return r;
}

/// sqrt(gain) * y + n, n ~ N(0, noise_var) i.i.d., drawn from Rng(noise_seed).
inline nn::Tensor apply_channel(const nn::Tensor& y, const ChannelRealization& real) {
  require(!y.empty(), ErrorKind::usage, "apply_channel: empty transmit sequence");
  require(real.gain > 0.0, ErrorKind::numeric, "apply_channel: gain must be positive");
  nn::Tensor out = y;
  const double amp = std::sqrt(real.gain);
  const double sd = std::sqrt(real.noise_var);
  Rng rng(real.noise_seed);
  for (auto& v : out) {
    v *= amp;
    if (sd > 0.0) v += sd * rng.normal();
  }
  return out;
}

/// Genie-CSI equalization: divide by sqrt(gain).
inline nn::Tensor equalize(nn::Tensor rx, const ChannelRealization& real) {
  const double amp = std::sqrt(real.gain);
  for (auto& v : rx) v /= amp;
  return rx;
}

}  // namespace smdma::channel
