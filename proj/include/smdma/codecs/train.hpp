#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "smdma/codecs/semantic.hpp"
#include "smdma/core/error.hpp"
#include "smdma/core/rng.hpp"
#include "smdma/media/image.hpp"
#include "smdma/nnkit.hpp"

namespace smdma::codecs {

struct TrainOptions {
  std::size_t epochs = 100;
  std::size_t batch_size = 8;
  double learning_rate = 1e-4;
  std::uint64_t seed = 1;
};

struct SemanticTrainResult {
  SemanticCodec codec;
  std::vector<double> loss_curve;  // mean per-sample MSE of each epoch
};

/// Noiseless autoencoder pretraining with Adam on per-sample MSE.
inline void train_semantic(SemanticCodec& codec, std::span<const media::Image> dataset, const TrainOptions& opt,
                           std::vector<double>& loss_curve) {
  require(!dataset.empty(), ErrorKind::data, "semantic training needs a nonempty dataset");
  require(opt.batch_size > 0, ErrorKind::config, "batch size must be positive");
  for (const auto& img : dataset)
    require(img.size() == codec.config.pixels(), ErrorKind::shape, "dataset image does not match codec shape");

  Rng order_rng = Rng(opt.seed).split(31);
  nn::Adam enc_opt({opt.learning_rate}), dec_opt({opt.learning_rate});
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  nn::Tape enc_tape, dec_tape;
  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    order_rng.shuffle(std::span(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
      const std::size_t stop = std::min(order.size(), start + opt.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(stop - start);
      auto enc_grads = codec.encoder.zero_gradients();
      auto dec_grads = codec.decoder.zero_gradients();
      for (std::size_t b = start; b < stop; ++b) {
        const auto target = nn::to_tensor(dataset[order[b]].samples());
        const auto z = nn::forward(codec.encoder, target, enc_tape);
        const auto recon = nn::forward(codec.decoder, z, dec_tape);
        const double loss = nn::mse(recon, target);
        if (!std::isfinite(loss))
          fail(ErrorKind::numeric, "semantic training diverged at epoch " + std::to_string(epoch + 1) + ", sample " +
                                       std::to_string(order[b]));
        epoch_loss += loss;
        auto g = nn::mse_gradient(recon, target);
        for (auto& v : g) v *= inv_batch;
        const auto gz = nn::backward(codec.decoder, dec_tape, g, dec_grads);
        nn::backward(codec.encoder, enc_tape, gz, enc_grads);
      }
      enc_opt.step(codec.encoder, enc_grads);
      dec_opt.step(codec.decoder, dec_grads);
    }
    loss_curve.push_back(epoch_loss / static_cast<double>(dataset.size()));
  }
}

inline SemanticTrainResult train_semantic(std::span<const media::Image> dataset, const SemanticCodecConfig& cfg,
                                          const TrainOptions& opt) {
  Rng init(opt.seed);
  SemanticTrainResult result{build_semantic_codec(cfg, init), {}};
  train_semantic(result.codec, dataset, opt, result.loss_curve);
  return result;
}

/// Mean reconstruction MSE (sample domain, unclamped) over a dataset.
inline double reconstruction_mse(const SemanticCodec& codec, std::span<const media::Image> dataset) {
  double s = 0.0;
  for (const auto& img : dataset) {
    const auto target = nn::to_tensor(img.samples());
    s += nn::mse(codec.decode_raw(codec.encode(img)), target);
  }
  return dataset.empty() ? 0.0 : s / static_cast<double>(dataset.size());
}

}  // namespace smdma::codecs
