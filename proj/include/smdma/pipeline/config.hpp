#pragma once

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "smdma/channel/channel.hpp"
#include "smdma/codecs/channel_codec.hpp"
#include "smdma/codecs/semantic.hpp"
#include "smdma/core/error.hpp"
#include "smdma/fusion/fusion.hpp"
#include "smdma/ortho/ortho.hpp"
#include "smdma/ranking/ranking.hpp"

namespace smdma::pipeline {

enum class Combiner { geometric, arithmetic };

inline const char* to_string(Combiner c) { return c == Combiner::geometric ? "geometric" : "arithmetic"; }

struct SnrRange {
  double min_db = 0.0;
  double max_db = 0.0;
  void validate(const char* who) const {
    require(std::isfinite(min_db) && std::isfinite(max_db) && min_db <= max_db, ErrorKind::config,
            std::string(who) + " SNR range must be a finite interval");
  }
};

struct DataConfig {
  std::size_t pairs = 32;
  std::size_t size = 32;
  std::size_t channels = 1;
  double edit_fraction = 0.25;
  std::size_t shapes = 3;
  std::size_t eval_pairs = 8;
  std::string dir;  // directory written by gen-data; empty = synthesize
};

struct TrainConfig {
  std::size_t batch_size = 8;
  std::size_t epochs = 100;  // E_p
  double learning_rate = 1e-4;
  Combiner combiner = Combiner::geometric;
  SnrRange user1{-10.0, 0.0};
  SnrRange user2{0.0, 10.0};
  bool per_user_decoders = false;
};

/// Every tunable of one experiment. Defaults follow the simulation table.
struct PipelineConfig {
  std::uint64_t seed = 1;
  DataConfig data;
  codecs::SemanticCodecConfig semantic;
  std::size_t semantic_epochs = 100;
  double semantic_learning_rate = 1e-4;
  codecs::ChannelCodecConfig channel_codec;
  bool identity_channel_codec = false;
  fusion::FusionConfig fusion;
  ranking::RankingMode ranking_mode = ranking::RankingMode::calibrated;
  double ranking_epsilon = 0.01;
  double ratio = 1.0;
  ortho::OrthoBasis basis;
  bool normalize = true;
  channel::ChannelMode channel_mode = channel::ChannelMode::sr_fading;
  channel::SrParams sr;
  bool genie_csi = false;
  TrainConfig train;

  void validate() const {
    semantic.validate();
    if (!identity_channel_codec) channel_codec.validate();
    fusion.validate();
    basis.validate();
    sr.validate();
    train.user1.validate("user1");
    train.user2.validate("user2");
    require(ranking_epsilon > 0.0, ErrorKind::config, "ranking.epsilon must be positive");
    require(ratio > 0.0 && ratio <= 1.0, ErrorKind::config, "crop.ratio must lie in (0, 1]");
    require(train.batch_size > 0, ErrorKind::config, "train.batch_size must be positive");
    require(train.learning_rate > 0.0 && semantic_learning_rate > 0.0, ErrorKind::config, "learning rates must be positive");
    require(data.pairs > 0 && data.eval_pairs > 0, ErrorKind::config, "data.pairs and data.eval_pairs must be positive");
    require(data.size == semantic.height && data.size == semantic.width && data.channels == semantic.channels, ErrorKind::config,
            "data.size/channels must match the semantic codec image shape");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') fail(ErrorKind::config, "config key '" + key + "': expected a number, got '" + v + "'");
  return x;
}

inline std::size_t to_count(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || v[0] == '-') fail(ErrorKind::config, "config key '" + key + "': expected a count, got '" + v + "'");
  return static_cast<std::size_t>(x);
}

inline bool to_switch(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  fail(ErrorKind::config, "config key '" + key + "': expected on/off, got '" + v + "'");
}

inline std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) fail(ErrorKind::config, "config key '" + key + "': empty list");
  return out;
}

inline std::vector<std::size_t> to_counts(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_count(key, trim(item)));
  return out;
}

inline std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

inline std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

inline std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct Binding {
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

inline const std::map<std::string, Binding>& bindings() {
  using C = PipelineConfig;
  using S = const std::string&;
  static const std::map<std::string, Binding> table = {
      {"seed", {[](C& c, S v) { c.seed = to_count("seed", v); }, [](const C& c) { return std::to_string(c.seed); }}},
      {"data.pairs", {[](C& c, S v) { c.data.pairs = to_count("data.pairs", v); }, [](const C& c) { return std::to_string(c.data.pairs); }}},
      {"data.eval_pairs",
       {[](C& c, S v) { c.data.eval_pairs = to_count("data.eval_pairs", v); }, [](const C& c) { return std::to_string(c.data.eval_pairs); }}},
      {"data.size",
       {[](C& c, S v) { c.data.size = c.semantic.height = c.semantic.width = to_count("data.size", v); },
        [](const C& c) { return std::to_string(c.data.size); }}},
      {"data.channels",
       {[](C& c, S v) { c.data.channels = c.semantic.channels = to_count("data.channels", v); },
        [](const C& c) { return std::to_string(c.data.channels); }}},
      {"data.edit_fraction",
       {[](C& c, S v) { c.data.edit_fraction = to_double("data.edit_fraction", v); }, [](const C& c) { return num(c.data.edit_fraction); }}},
      {"data.shapes", {[](C& c, S v) { c.data.shapes = to_count("data.shapes", v); }, [](const C& c) { return std::to_string(c.data.shapes); }}},
      {"data.dir", {[](C& c, S v) { c.data.dir = v; }, [](const C& c) { return c.data.dir; }}},
      {"semantic.hidden",
       {[](C& c, S v) { c.semantic.hidden = to_count("semantic.hidden", v); }, [](const C& c) { return std::to_string(c.semantic.hidden); }}},
      {"semantic.feature_dim",
       {[](C& c, S v) { c.semantic.feature_dim = to_count("semantic.feature_dim", v); },
        [](const C& c) { return std::to_string(c.semantic.feature_dim); }}},
      {"semantic.epochs",
       {[](C& c, S v) { c.semantic_epochs = to_count("semantic.epochs", v); }, [](const C& c) { return std::to_string(c.semantic_epochs); }}},
      {"semantic.learning_rate",
       {[](C& c, S v) { c.semantic_learning_rate = to_double("semantic.learning_rate", v); },
        [](const C& c) { return num(c.semantic_learning_rate); }}},
      {"channel_codec.kind",
       {[](C& c, S v) {
          if (v != "learned" && v != "identity") fail(ErrorKind::config, "channel_codec.kind must be learned or identity");
          c.identity_channel_codec = v == "identity";
        },
        [](const C& c) { return std::string(c.identity_channel_codec ? "identity" : "learned"); }}},
      {"channel_codec.encoder_widths",
       {[](C& c, S v) { c.channel_codec.encoder_widths = to_counts("channel_codec.encoder_widths", v); },
        [](const C& c) { return join(c.channel_codec.encoder_widths); }}},
      {"channel_codec.decoder_widths",
       {[](C& c, S v) { c.channel_codec.decoder_widths = to_counts("channel_codec.decoder_widths", v); },
        [](const C& c) { return join(c.channel_codec.decoder_widths); }}},
      {"channel_codec.kernel_size",
       {[](C& c, S v) { c.channel_codec.kernel_size = to_count("channel_codec.kernel_size", v); },
        [](const C& c) { return std::to_string(c.channel_codec.kernel_size); }}},
      {"fusion.tau", {[](C& c, S v) { c.fusion.tau = to_double("fusion.tau", v); }, [](const C& c) { return num(c.fusion.tau); }}},
      {"ranking.mode",
       {[](C& c, S v) {
          if (v == "calibrated") c.ranking_mode = ranking::RankingMode::calibrated;
          else if (v == "per_frame") c.ranking_mode = ranking::RankingMode::per_frame;
          else fail(ErrorKind::config, "ranking.mode must be calibrated or per_frame");
        },
        [](const C& c) { return std::string(ranking::to_string(c.ranking_mode)); }}},
      {"ranking.epsilon",
       {[](C& c, S v) { c.ranking_epsilon = to_double("ranking.epsilon", v); }, [](const C& c) { return num(c.ranking_epsilon); }}},
      {"crop.ratio", {[](C& c, S v) { c.ratio = to_double("crop.ratio", v); }, [](const C& c) { return num(c.ratio); }}},
      {"ortho.u1", {[](C& c, S v) { c.basis.u1 = to_list("ortho.u1", v); }, [](const C& c) { return join(c.basis.u1); }}},
      {"ortho.u2", {[](C& c, S v) { c.basis.u2 = to_list("ortho.u2", v); }, [](const C& c) { return join(c.basis.u2); }}},
      {"ortho.normalization",
       {[](C& c, S v) { c.normalize = to_switch("ortho.normalization", v); }, [](const C& c) { return std::string(c.normalize ? "on" : "off"); }}},
      {"channel.mode",
       {[](C& c, S v) { c.channel_mode = channel::parse_channel_mode(v); }, [](const C& c) { return std::string(channel::to_string(c.channel_mode)); }}},
      {"channel.b0", {[](C& c, S v) { c.sr.b0 = to_double("channel.b0", v); }, [](const C& c) { return num(c.sr.b0); }}},
      {"channel.m", {[](C& c, S v) { c.sr.m = to_double("channel.m", v); }, [](const C& c) { return num(c.sr.m); }}},
      {"channel.omega", {[](C& c, S v) { c.sr.omega = to_double("channel.omega", v); }, [](const C& c) { return num(c.sr.omega); }}},
      {"channel.csi",
       {[](C& c, S v) {
          if (v != "none" && v != "genie") fail(ErrorKind::config, "channel.csi must be none or genie");
          c.genie_csi = v == "genie";
        },
        [](const C& c) { return std::string(c.genie_csi ? "genie" : "none"); }}},
      {"train.batch_size",
       {[](C& c, S v) { c.train.batch_size = to_count("train.batch_size", v); }, [](const C& c) { return std::to_string(c.train.batch_size); }}},
      {"train.epochs", {[](C& c, S v) { c.train.epochs = to_count("train.epochs", v); }, [](const C& c) { return std::to_string(c.train.epochs); }}},
      {"train.learning_rate",
       {[](C& c, S v) { c.train.learning_rate = to_double("train.learning_rate", v); }, [](const C& c) { return num(c.train.learning_rate); }}},
      {"train.combiner",
       {[](C& c, S v) {
          if (v == "geometric") c.train.combiner = Combiner::geometric;
          else if (v == "arithmetic") c.train.combiner = Combiner::arithmetic;
          else fail(ErrorKind::config, "train.combiner must be geometric or arithmetic");
        },
        [](const C& c) { return std::string(to_string(c.train.combiner)); }}},
      {"train.decoders",
       {[](C& c, S v) {
          if (v != "shared" && v != "per_user") fail(ErrorKind::config, "train.decoders must be shared or per_user");
          c.train.per_user_decoders = v == "per_user";
        },
        [](const C& c) { return std::string(c.train.per_user_decoders ? "per_user" : "shared"); }}},
      {"train.user1_snr_min",
       {[](C& c, S v) { c.train.user1.min_db = to_double("train.user1_snr_min", v); }, [](const C& c) { return num(c.train.user1.min_db); }}},
      {"train.user1_snr_max",
       {[](C& c, S v) { c.train.user1.max_db = to_double("train.user1_snr_max", v); }, [](const C& c) { return num(c.train.user1.max_db); }}},
      {"train.user2_snr_min",
       {[](C& c, S v) { c.train.user2.min_db = to_double("train.user2_snr_min", v); }, [](const C& c) { return num(c.train.user2.min_db); }}},
      {"train.user2_snr_max",
       {[](C& c, S v) { c.train.user2.max_db = to_double("train.user2_snr_max", v); }, [](const C& c) { return num(c.train.user2.max_db); }}},
  };
  return table;
}

}  // namespace detail

/// Apply one `key = value` setting. Unknown keys are config errors.
inline void set_option(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = detail::bindings();
  const auto it = table.find(key);
  if (it == table.end()) fail(ErrorKind::config, "unknown config key '" + key + "'");
  it->second.set(cfg, value);
}

/// Parse flat `section.key = value` text over `base`. '#' starts a comment.
inline PipelineConfig parse_config(const std::string& text, PipelineConfig base = {}) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::config, "config line " + std::to_string(lineno) + ": expected key = value");
    set_option(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return base;
}

/// Canonical dump of every effective value, one `key = value` per line, sorted by key.
inline std::string dump_config(const PipelineConfig& cfg) {
  std::string out;
  for (const auto& [key, b] : detail::bindings()) out += key + " = " + b.get(cfg) + "\n";
  return out;
}

}  // namespace smdma::pipeline
