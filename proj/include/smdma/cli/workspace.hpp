#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "smdma/codecs/channel_codec.hpp"
#include "smdma/codecs/semantic.hpp"
#include "smdma/core/bytes.hpp"
#include "smdma/core/error.hpp"
#include "smdma/nnkit/serialize.hpp"
#include "smdma/pipeline/config.hpp"
#include "smdma/pipeline/system.hpp"
#include "smdma/ranking/ranking_io.hpp"

namespace smdma::cli {

namespace fs = std::filesystem;

inline constexpr const char* semantic_encoder_file = "semantic_encoder.nn";
inline constexpr const char* semantic_decoder_file = "semantic_decoder.nn";
inline constexpr const char* channel_encoder_file = "channel_encoder.nn";
inline constexpr const char* channel_decoder_file = "channel_decoder.nn";
inline constexpr const char* channel_decoder2_file = "channel_decoder_user2.nn";
inline constexpr const char* ranking_file = "ranking.txt";

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string file_hash(const fs::path& p) { return hex64(fnv1a64(read_file(p.string()))); }

/// Companion file of a ranking path for the difference stream: a.txt -> a.delta.txt.
inline fs::path delta_ranking_path(const fs::path& p) {
  fs::path out = p;
  out.replace_extension();
  out += ".delta";
  out += p.extension();
  return out;
}

inline void expect_specs(const nn::Model& m, const nn::Model& reference, const std::string& what) {
  if (m.specs() != reference.specs()) fail(ErrorKind::config, what + " does not match the configured architecture");
}

inline nn::Model load_required(const fs::path& p, const std::string& hint) {
  if (!fs::exists(p)) fail(ErrorKind::data, p.string() + " not found (" + hint + ")");
  return nn::load_model(p.string());
}

inline codecs::SemanticCodec load_semantic(const fs::path& dir, const pipeline::PipelineConfig& cfg) {
  Rng probe(0);
  auto codec = codecs::build_semantic_codec(cfg.semantic, probe);
  const std::string hint = "run `train --stage semantic` first";
  auto enc = load_required(dir / semantic_encoder_file, hint);
  auto dec = load_required(dir / semantic_decoder_file, hint);
  expect_specs(enc, codec.encoder, semantic_encoder_file);
  expect_specs(dec, codec.decoder, semantic_decoder_file);
  codec.encoder = std::move(enc);
  codec.decoder = std::move(dec);
  return codec;
}

inline void save_semantic(const fs::path& dir, const codecs::SemanticCodec& codec) {
  nn::save_model(codec.encoder, (dir / semantic_encoder_file).string());
  nn::save_model(codec.decoder, (dir / semantic_decoder_file).string());
}

inline codecs::ChannelCodec load_channel(const fs::path& dir, const pipeline::PipelineConfig& cfg) {
  if (cfg.identity_channel_codec) return codecs::identity_channel_codec();
  Rng probe(0);
  auto codec = codecs::build_channel_codec(cfg.channel_codec, probe, cfg.train.per_user_decoders);
  const std::string hint = "run `train --stage channel` first";
  auto enc = load_required(dir / channel_encoder_file, hint);
  auto dec = load_required(dir / channel_decoder_file, hint);
  expect_specs(enc, codec.encoder, channel_encoder_file);
  expect_specs(dec, codec.decoder, channel_decoder_file);
  codec.encoder = std::move(enc);
  codec.decoder = std::move(dec);
  if (codec.per_user) {
    auto dec2 = load_required(dir / channel_decoder2_file, hint);
    expect_specs(dec2, codec.decoder_user2, channel_decoder2_file);
    codec.decoder_user2 = std::move(dec2);
  }
  return codec;
}

inline std::vector<std::string> save_channel(const fs::path& dir, const codecs::ChannelCodec& codec) {
  std::vector<std::string> files{channel_encoder_file, channel_decoder_file};
  nn::save_model(codec.encoder, (dir / channel_encoder_file).string());
  nn::save_model(codec.decoder, (dir / channel_decoder_file).string());
  if (codec.per_user) {
    nn::save_model(codec.decoder_user2, (dir / channel_decoder2_file).string());
    files.push_back(channel_decoder2_file);
  }
  return files;
}

inline void save_stream_ranking(const fs::path& path, const pipeline::StreamRanking& r, double eps) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  ranking::save_ranking(path.string(), r.shared, eps);
  ranking::save_ranking(delta_ranking_path(path).string(), r.delta, eps);
}

inline pipeline::StreamRanking load_stream_ranking(const fs::path& path, std::size_t d) {
  if (!fs::exists(path)) fail(ErrorKind::data, path.string() + " not found (run `calibrate` first)");
  pipeline::StreamRanking r{ranking::load_ranking(path.string()).perm, ranking::load_ranking(delta_ranking_path(path).string()).perm};
  if (r.shared.size() != d || r.delta.size() != d)
    fail(ErrorKind::data, path.string() + ": ranking dimension does not match semantic.feature_dim");
  return r;
}

}  // namespace smdma::cli
