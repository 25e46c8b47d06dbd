#pragma once

#include <optional>
#include <span>
#include <vector>
#include <utility>

#include "smdma/channel/channel.hpp"
#include "smdma/codecs/channel_codec.hpp"
#include "smdma/codecs/semantic.hpp"
#include "smdma/fusion/fusion.hpp"
#include "smdma/media/image.hpp"
#include "smdma/ortho/frame.hpp"
#include "smdma/ortho/ortho.hpp"
#include "smdma/pipeline/config.hpp"
#include "smdma/ranking/ranking.hpp"

namespace smdma::pipeline {

/// Permutations for the shared and difference streams.
struct StreamRanking {
  ranking::Permutation shared;
  ranking::Permutation delta;
};

struct SystemModels {
  codecs::SemanticCodec semantic;
  codecs::ChannelCodec channel;
  std::optional<StreamRanking> calibrated;  // offline ranking known to both ends
};

/// Transmit-side intermediate values, kept for inspection and tests.
struct Transmission {
  ortho::Frame frame;
  fusion::FusionPair features;
  StreamRanking ranking;
  ortho::MixedFrame mixed;  // before channel encoding
};

inline auto semantic_decoder(const codecs::SemanticCodec& codec) {
  return [&codec](const nn::Tensor& f) { return codec.decode_raw(f); };
}

/// Per-frame rankings: the shared stream is scored against s1 through f1, the
/// difference stream against s2 through f2 = f1 + delta.
inline StreamRanking per_frame_ranking(const codecs::SemanticCodec& codec, const nn::Tensor& f1, const nn::Tensor& f2,
                                       const media::Image& s1, const media::Image& s2, double eps) {
  const auto dec = semantic_decoder(codec);
  return {ranking::rank(ranking::sensitivity_scores(f1, dec, s1.samples(), eps)),
          ranking::rank(ranking::sensitivity_scores(f2, dec, s2.samples(), eps))};
}

/// Offline calibration of both streams over a set of image pairs: the shared
/// ranking is averaged over (f1, s1) and the difference ranking over (f2, s2).
inline StreamRanking calibrate_streams(std::span<const std::pair<media::Image, media::Image>> pairs, const codecs::SemanticCodec& codec,
                                       double eps) {
  require(!pairs.empty(), ErrorKind::data, "calibration needs at least one image pair");
  std::vector<nn::Tensor> f1, f2, t1, t2;
  for (const auto& [s1, s2] : pairs) {
    f1.push_back(codec.encode(s1));
    f2.push_back(codec.encode(s2));
    t1.push_back(nn::to_tensor(s1.samples()));
    t2.push_back(nn::to_tensor(s2.samples()));
  }
  const auto dec = semantic_decoder(codec);
  return {ranking::calibrate_ranking(f1, t1, dec, eps).perm, ranking::calibrate_ranking(f2, t2, dec, eps).perm};
}

/// Semantic encoding, fusion, sorting and cropping, orthogonal embedding and
/// power normalization, all before the channel codec.
inline Transmission prepare(const media::Image& s1, const media::Image& s2, const PipelineConfig& cfg, const SystemModels& models) {
  Transmission tx;
  const auto f1 = models.semantic.encode(s1);
  const auto f2 = models.semantic.encode(s2);
  tx.features = fusion::fuse(f1, f2, cfg.fusion);
  if (cfg.ranking_mode == ranking::RankingMode::per_frame) {
    tx.ranking = per_frame_ranking(models.semantic, f1, f2, s1, s2, cfg.ranking_epsilon);
  } else {
    if (!models.calibrated) fail(ErrorKind::config, "calibrated ranking mode requires a calibrated ranking");
    tx.ranking = *models.calibrated;
  }
  const auto shared = ranking::crop(tx.features.shared, tx.ranking.shared, cfg.ratio);
  const auto delta = ranking::crop(tx.features.delta, tx.ranking.delta, cfg.ratio);
  tx.mixed = ortho::mix(ortho::embed(shared.payload.span(), cfg.basis.u1), ortho::embed(delta.payload.span(), cfg.basis.u2),
                        cfg.basis.q(), cfg.normalize);

  auto& h = tx.frame.header;
  h.dim = static_cast<std::uint32_t>(f1.size());
  h.kept = static_cast<std::uint32_t>(shared.spec.kept);
  h.q = static_cast<std::uint16_t>(cfg.basis.q());
  h.mode = cfg.ranking_mode;
  if (h.mode == ranking::RankingMode::per_frame) {
    h.shared_perm = tx.ranking.shared;
    h.delta_perm = tx.ranking.delta;
  }
  h.norm_scale = tx.mixed.norm_scale;
  return tx;
}

/// Full transmitter: prepare() followed by channel encoding of the payload.
inline Transmission transmit(const media::Image& s1, const media::Image& s2, const PipelineConfig& cfg, const SystemModels& models) {
  Transmission tx = prepare(s1, s2, cfg, models);
  tx.frame.payload = models.channel.encode(tx.mixed.payload);
  ortho::validate(tx.frame.header, tx.frame.payload.size());
  return tx;
}

/// Receiver for `user` (1 or 2). `realization` is consulted only for genie CSI.
inline media::Image receive(const ortho::Frame& frame, std::size_t user, const PipelineConfig& cfg, const SystemModels& models,
                            const channel::ChannelRealization* realization = nullptr) {
  require(user == 1 || user == 2, ErrorKind::usage, "user index must be 1 or 2");
  const auto& h = frame.header;
  ortho::validate(h, frame.payload.size());
  if (h.q != cfg.basis.q()) fail(ErrorKind::data, "frame error: embedding length does not match the configured basis");
  if (h.dim != models.semantic.config.feature_dim) fail(ErrorKind::data, "frame error: feature dimension does not match the codec");

  nn::Tensor rx = frame.payload;
  if (cfg.genie_csi && realization) rx = channel::equalize(std::move(rx), *realization);
  const nn::Tensor z = models.channel.decode(rx, user);

  const ranking::Permutation* shared_perm = &h.shared_perm;
  const ranking::Permutation* delta_perm = &h.delta_perm;
  if (h.mode == ranking::RankingMode::calibrated) {
    if (!models.calibrated) fail(ErrorKind::config, "calibrated frame received without a calibrated ranking");
    shared_perm = &models.calibrated->shared;
    delta_perm = &models.calibrated->delta;
  }
  fusion::FusionPair pair;
  pair.shared = ranking::restore(ortho::separate(z.span(), h.norm_scale, cfg.basis.u1), *shared_perm, h.dim);
  if (user == 1) return models.semantic.decode(pair.shared);
  pair.delta = ranking::restore(ortho::separate(z.span(), h.norm_scale, cfg.basis.u2), *delta_perm, h.dim);
  return models.semantic.decode(fusion::defuse(pair).second);
}

/// Reference path without the multiple-access chain: encode, fuse, defuse, decode.
inline std::pair<media::Image, media::Image> semantic_bypass(const media::Image& s1, const media::Image& s2, const PipelineConfig& cfg,
                                                             const SystemModels& models) {
  const auto pair = fusion::fuse(models.semantic.encode(s1), models.semantic.encode(s2), cfg.fusion);
  const auto [f1, f2] = fusion::defuse(pair);
  return {models.semantic.decode(f1), models.semantic.decode(f2)};
}

}  // namespace smdma::pipeline
