#pragma once

#include <cmath>
#include <vector>

#include "smdma/core/error.hpp"
#include "smdma/core/rng.hpp"
#include "smdma/nnkit.hpp"

namespace smdma::codecs {

struct ChannelCodecConfig {
  std::vector<std::size_t> encoder_widths{64, 128};
  std::vector<std::size_t> decoder_widths{64, 1};
  std::size_t kernel_size = 3;

  void validate() const {
    require(encoder_widths.size() == 2, ErrorKind::config, "channel encoder needs exactly two conv widths");
    require(encoder_widths[0] > 0 && encoder_widths[1] >= encoder_widths[0], ErrorKind::config,
            "channel encoder widths must be positive and non-decreasing");
    require(decoder_widths.size() == 2 && decoder_widths[0] > 0 && decoder_widths[1] == 1, ErrorKind::config,
            "channel decoder widths must be {w, 1}");
    require(kernel_size % 2 == 1, ErrorKind::config, "channel codec kernel size must be odd");
  }
};

/// Length-preserving 1-D convolutional channel codec. The encoder output is scaled
/// to unit average power before it reaches the channel. One decoder is shared by
/// all users unless `per_user` is set, in which case user 2 owns `decoder_user2`.
struct ChannelCodec {
  nn::Model encoder;
  nn::Model decoder;
  nn::Model decoder_user2;
  bool per_user = false;
  bool identity = false;

  const nn::Model& decoder_for(std::size_t user) const { return per_user && user == 2 ? decoder_user2 : decoder; }
  nn::Model& decoder_for(std::size_t user) { return per_user && user == 2 ? decoder_user2 : decoder; }

  /// Pre-normalization encoder output.
  nn::Tensor encode_raw(const nn::Tensor& z) const { return identity ? z : nn::forward(encoder, z); }

  nn::Tensor encode(const nn::Tensor& z) const {
    if (identity) return z;
    return normalize_power(nn::forward(encoder, z)).first;
  }

  nn::Tensor decode(const nn::Tensor& y, std::size_t user = 1) const { return identity ? y : nn::forward(decoder_for(user), y); }

  /// y / sqrt(mean(y^2)), with the scale floored at 1e-12.
  static std::pair<nn::Tensor, double> normalize_power(nn::Tensor y) {
    double p = 0.0;
    for (double v : y) p += v * v;
    const double scale = std::max(std::sqrt(p / static_cast<double>(std::max<std::size_t>(y.size(), 1))), 1e-12);
    for (auto& v : y) v /= scale;
    return {std::move(y), scale};
  }

  /// Backward of normalize_power: g_raw = (g - n * mean(g . n)) / scale.
  static nn::Tensor normalize_power_backward(const nn::Tensor& normalized, double scale, const nn::Tensor& grad) {
    const double n = static_cast<double>(normalized.size());
    double proj = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) proj += grad[i] * normalized[i];
    proj /= n;
    nn::Tensor out(grad.size());
    for (std::size_t i = 0; i < grad.size(); ++i) out[i] = (grad[i] - normalized[i] * proj) / scale;
    return out;
  }

  friend bool operator==(const ChannelCodec& a, const ChannelCodec& b) {
    return a.identity == b.identity && a.per_user == b.per_user && a.encoder == b.encoder && a.decoder == b.decoder &&
           a.decoder_user2 == b.decoder_user2;
  }
};

inline ChannelCodec build_channel_codec(const ChannelCodecConfig& cfg, Rng& rng, bool per_user_decoders = false) {
  cfg.validate();
  const std::size_t k = cfg.kernel_size;
  const auto& e = cfg.encoder_widths;
  const auto& d = cfg.decoder_widths;
  Rng enc_rng = rng.split(21), dec_rng = rng.split(22);
  ChannelCodec codec;
  codec.encoder = nn::Model::build({nn::LayerSpec::conv1d(1, e[0], k), nn::LayerSpec::relu(), nn::LayerSpec::conv1d(e[0], e[1], k),
                                    nn::LayerSpec::relu(), nn::LayerSpec::conv1d(e[1], 1, 1)},
                                   enc_rng);
  codec.decoder =
      nn::Model::build({nn::LayerSpec::conv1d(1, d[0], k), nn::LayerSpec::relu(), nn::LayerSpec::conv1d(d[0], d[1], k)}, dec_rng);
  if (per_user_decoders) {
    Rng dec2_rng = rng.split(23);
    codec.per_user = true;
    codec.decoder_user2 =
        nn::Model::build({nn::LayerSpec::conv1d(1, d[0], k), nn::LayerSpec::relu(), nn::LayerSpec::conv1d(d[0], d[1], k)}, dec2_rng);
  }
  return codec;
}

inline ChannelCodec identity_channel_codec() {
  ChannelCodec c;
  c.identity = true;
  return c;
}

}  // namespace smdma::codecs
