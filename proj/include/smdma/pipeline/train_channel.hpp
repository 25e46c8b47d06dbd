#pragma once

#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "smdma/channel/channel.hpp"
#include "smdma/codecs/channel_codec.hpp"
#include "smdma/core/error.hpp"
#include "smdma/core/rng.hpp"
#include "smdma/media/image.hpp"
#include "smdma/nnkit.hpp"
#include "smdma/pipeline/config.hpp"
#include "smdma/pipeline/loss.hpp"
#include "smdma/pipeline/system.hpp"

namespace smdma::pipeline {

inline constexpr std::size_t user_count = 2;

using LinkPair = std::array<channel::ChannelRealization, user_count>;

/// One training batch: mixed vectors and the two users' channel uses for each.
struct ChannelBatch {
  std::vector<nn::Tensor> z;
  std::vector<LinkPair> links;
};

struct ChannelGradients {
  nn::Gradients encoder;
  nn::Gradients decoder;
  nn::Gradients decoder_user2;
};

struct ChannelBatchResult {
  LossReport report;
  ChannelGradients grads;
};

/// Batch losses L_i = mean_b MSE(z_hat_i, z), combined by `combiner`. With
/// `want_grads` the parameter gradients of L_all are returned as well.
inline ChannelBatchResult channel_batch_loss(const codecs::ChannelCodec& codec, const ChannelBatch& batch, Combiner combiner,
                                             bool genie_csi, bool want_grads = true) {
  require(!codec.identity, ErrorKind::config, "the identity channel codec has nothing to train");
  require(!batch.z.empty() && batch.z.size() == batch.links.size(), ErrorKind::usage, "channel batch is empty or inconsistent");
  const std::size_t n = batch.z.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  struct Pass {
    nn::Tape enc;
    nn::Tensor normalized;
    double scale = 1.0;
    std::array<nn::Tape, user_count> dec;
    std::array<nn::Tensor, user_count> out;
  };
  std::vector<Pass> passes(n);
  std::array<double, user_count> losses{};
  for (std::size_t b = 0; b < n; ++b) {
    auto& p = passes[b];
    auto [normalized, scale] = codecs::ChannelCodec::normalize_power(nn::forward(codec.encoder, batch.z[b], p.enc));
    p.normalized = std::move(normalized);
    p.scale = scale;
    for (std::size_t u = 0; u < user_count; ++u) {
      nn::Tensor rx = channel::apply_channel(p.normalized, batch.links[b][u]);
      if (genie_csi) rx = channel::equalize(std::move(rx), batch.links[b][u]);
      p.out[u] = nn::forward(codec.decoder_for(u + 1), rx, p.dec[u]);
      losses[u] += nn::mse(p.out[u], batch.z[b]) * inv_n;
    }
  }

  ChannelBatchResult result{combined_loss(losses, combiner), {}};
  if (!want_grads) return result;
  auto& g = result.grads;
  g.encoder = codec.encoder.zero_gradients();
  g.decoder = codec.decoder.zero_gradients();
  if (codec.per_user) g.decoder_user2 = codec.decoder_user2.zero_gradients();
  for (std::size_t b = 0; b < n; ++b) {
    auto& p = passes[b];
    nn::Tensor g_tx(p.normalized.size());
    for (std::size_t u = 0; u < user_count; ++u) {
      auto g_out = nn::mse_gradient(p.out[u], batch.z[b]);
      const double w = result.report.gradient[u] * inv_n;
      for (auto& v : g_out) v *= w;
      auto& dg = codec.per_user && u == 1 ? g.decoder_user2 : g.decoder;
      const auto g_rx = nn::backward(codec.decoder_for(u + 1), p.dec[u], g_out, dg);
      // d rx / d tx = sqrt(gain), or 1 after genie equalization
      const double amp = genie_csi ? 1.0 : std::sqrt(batch.links[b][u].gain);
      for (std::size_t i = 0; i < g_tx.size(); ++i) g_tx[i] += amp * g_rx[i];
    }
    nn::backward(codec.encoder, p.enc, codecs::ChannelCodec::normalize_power_backward(p.normalized, p.scale, g_tx), g.encoder);
  }
  return result;
}

/// Mixed vectors at r = 1 with identity orderings, the input of channel training.
inline std::vector<nn::Tensor> channel_training_set(std::span<const std::pair<media::Image, media::Image>> pairs,
                                                    const PipelineConfig& cfg, const codecs::SemanticCodec& semantic) {
  PipelineConfig c = cfg;
  c.ratio = 1.0;
  c.ranking_mode = ranking::RankingMode::calibrated;
  const auto id = ranking::identity_permutation(semantic.config.feature_dim);
  const SystemModels models{semantic, codecs::identity_channel_codec(), StreamRanking{id, id}};
  std::vector<nn::Tensor> out;
  out.reserve(pairs.size());
  for (const auto& [s1, s2] : pairs) out.push_back(prepare(s1, s2, c, models).mixed.payload);
  return out;
}

struct ChannelEpoch {
  double combined = 0.0;
  double user1 = 0.0;
  double user2 = 0.0;
};

/// Draw a batch's SNRs (one per user) and per-sample block-fading links.
inline std::vector<LinkPair> draw_links(std::size_t n, const PipelineConfig& cfg, Rng& rng) {
  const double snr1 = rng.uniform(cfg.train.user1.min_db, cfg.train.user1.max_db);
  const double snr2 = rng.uniform(cfg.train.user2.min_db, cfg.train.user2.max_db);
  std::vector<LinkPair> links(n);
  for (auto& l : links) {
    l[0] = channel::draw_realization(cfg.channel_mode, snr1, cfg.sr, rng);
    l[1] = channel::draw_realization(cfg.channel_mode, snr2, cfg.sr, rng);
  }
  return links;
}

/// Multi-user channel codec training with Adam on the combined loss. Returns one
/// entry per epoch holding the batch-averaged losses.
inline std::vector<ChannelEpoch> train_channel(codecs::ChannelCodec& codec, std::span<const nn::Tensor> dataset,
                                               const PipelineConfig& cfg, std::uint64_t seed) {
  require(!codec.identity, ErrorKind::config, "the identity channel codec has nothing to train");
  require(!dataset.empty(), ErrorKind::data, "channel training needs a nonempty dataset");
  const std::size_t bs = cfg.train.batch_size;
  require(bs > 0, ErrorKind::config, "train.batch_size must be positive");

  Rng root(seed);
  Rng order_rng = root.split(41), link_rng = root.split(42);
  const nn::AdamConfig adam{cfg.train.learning_rate};
  nn::Adam enc_opt(adam), dec_opt(adam), dec2_opt(adam);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<ChannelEpoch> curve;
  for (std::size_t epoch = 0; epoch < cfg.train.epochs; ++epoch) {
    order_rng.shuffle(std::span(order));
    ChannelEpoch acc;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t stop = std::min(order.size(), start + bs);
      ChannelBatch batch;
      for (std::size_t i = start; i < stop; ++i) batch.z.push_back(dataset[order[i]]);
      batch.links = draw_links(batch.z.size(), cfg, link_rng);
      const std::string where = "channel training diverged at epoch " + std::to_string(epoch + 1) + ", batch " + std::to_string(batches + 1);
      ChannelBatchResult res;
      try {
        res = channel_batch_loss(codec, batch, cfg.train.combiner, cfg.genie_csi);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::numeric) throw;
        fail(ErrorKind::numeric, where + ": " + e.what());
      }
      const auto& rep = res.report;
      if (!std::isfinite(rep.combined) || !std::isfinite(rep.losses[0]) || !std::isfinite(rep.losses[1])) fail(ErrorKind::numeric, where);
      enc_opt.step(codec.encoder, res.grads.encoder);
      dec_opt.step(codec.decoder, res.grads.decoder);
      if (codec.per_user) dec2_opt.step(codec.decoder_user2, res.grads.decoder_user2);
      acc.combined += rep.combined;
      acc.user1 += rep.losses[0];
      acc.user2 += rep.losses[1];
      ++batches;
    }
    const double inv = 1.0 / static_cast<double>(batches);
    curve.push_back({acc.combined * inv, acc.user1 * inv, acc.user2 * inv});
  }
  return curve;
}

/// Per-user feature MSE of a trained codec without updates. Each vector is sent
/// `repeats` times with its own SNR pair drawn from the training ranges.
inline std::array<double, user_count> channel_feature_mse(const codecs::ChannelCodec& codec, std::span<const nn::Tensor> dataset,
                                                          const PipelineConfig& cfg, std::uint64_t seed, std::size_t repeats = 4) {
  Rng rng(seed);
  ChannelBatch batch;
  for (std::size_t r = 0; r < repeats; ++r) {
    for (const auto& z : dataset) {
      batch.z.push_back(z);
      batch.links.push_back(draw_links(1, cfg, rng)[0]);
    }
  }
  const auto rep = channel_batch_loss(codec, batch, Combiner::arithmetic, cfg.genie_csi, false).report;
  return {rep.losses[0], rep.losses[1]};
}

}  // namespace smdma::pipeline
