#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "smdma/core/error.hpp"
#include "smdma/core/rng.hpp"
#include "smdma/media/image.hpp"
#include "smdma/nnkit.hpp"

namespace smdma::codecs {

struct SemanticCodecConfig {
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t channels = 1;
  std::size_t hidden = 256;
  std::size_t feature_dim = 64;

  std::size_t pixels() const noexcept { return height * width * channels; }

  void validate() const {
    require(feature_dim >= 8 && feature_dim % 2 == 0, ErrorKind::config, "feature dimension must be even and >= 8");
    require(height > 0 && width > 0 && (channels == 1 || channels == 3), ErrorKind::config, "invalid image shape");
    require(hidden > 0, ErrorKind::config, "hidden width must be positive");
  }
};

/// Dense autoencoder: pixels -> hidden -> relu -> d, and the mirror image back.
struct SemanticCodec {
  SemanticCodecConfig config;
  nn::Model encoder;
  nn::Model decoder;

  nn::Tensor encode(const media::Image& img) const {
    if (img.size() != config.pixels())
      fail(ErrorKind::shape, "image has " + std::to_string(img.size()) + " samples, codec expects " +
                                 std::to_string(config.pixels()));
    return nn::forward(encoder, nn::to_tensor(img.samples()));
  }

  /// Raw decoder output (unclamped), the differentiable path.
  nn::Tensor decode_raw(const nn::Tensor& features) const { return nn::forward(decoder, features); }

  /// Evaluation-time reconstruction clamped to [0, 1].
  media::Image decode(const nn::Tensor& features) const {
    auto raw = decode_raw(features);
    std::vector<double> s(raw.begin(), raw.end());
    for (auto& v : s) v = std::clamp(v, 0.0, 1.0);
    return media::Image(config.height, config.width, config.channels, std::move(s));
  }

  friend bool operator==(const SemanticCodec& a, const SemanticCodec& b) {
    return a.encoder == b.encoder && a.decoder == b.decoder;
  }
};

inline SemanticCodec build_semantic_codec(const SemanticCodecConfig& cfg, Rng& rng) {
  cfg.validate();
  SemanticCodec codec{cfg, {}, {}};
  Rng enc_rng = rng.split(11), dec_rng = rng.split(12);
  codec.encoder = nn::Model::build(
      {nn::LayerSpec::dense(cfg.pixels(), cfg.hidden), nn::LayerSpec::relu(), nn::LayerSpec::dense(cfg.hidden, cfg.feature_dim)},
      enc_rng);
  codec.decoder = nn::Model::build(
      {nn::LayerSpec::dense(cfg.feature_dim, cfg.hidden), nn::LayerSpec::relu(), nn::LayerSpec::dense(cfg.hidden, cfg.pixels())},
      dec_rng);
  return codec;
}

}  // namespace smdma::codecs
