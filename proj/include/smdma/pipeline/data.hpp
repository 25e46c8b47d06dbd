#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "smdma/core/bytes.hpp"
#include "smdma/core/error.hpp"
#include "smdma/core/rng.hpp"
#include "smdma/media/pnm.hpp"
#include "smdma/media/synth.hpp"
#include "smdma/pipeline/config.hpp"
#include "smdma/pipeline/sweep.hpp"

namespace smdma::pipeline {

inline constexpr const char* index_name = "index.txt";

inline media::PairSpec pair_spec(const DataConfig& d) { return {d.size, d.channels, d.edit_fraction, d.shapes}; }

inline std::string pair_file(std::size_t i, char member, std::size_t channels) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "pair_%04zu_%c.%s", i, member, channels == 3 ? "ppm" : "pgm");
  return buf;
}

/// Write `count` pairs and an index into `dir`. Existing files are only replaced
/// with `force`.
inline std::vector<std::string> write_pairs(const std::filesystem::path& dir, std::size_t count, const media::PairSpec& spec,
                                            std::uint64_t seed, bool force) {
  namespace fs = std::filesystem;
  require(count > 0, ErrorKind::usage, "--count must be positive");
  require(spec.size >= 8, ErrorKind::usage, "image size " + std::to_string(spec.size) + " too small (minimum 8)");
  if (!force && fs::exists(dir / index_name))
    fail(ErrorKind::usage, "refusing to overwrite " + (dir / index_name).string() + " (use --force)");
  fs::create_directories(dir);
  std::vector<media::ImagePair> pairs;
  for (std::size_t i = 0; i < count; ++i) pairs.push_back(media::gen_pair(spec, derive_seed(seed, {i})));
  std::vector<std::string> written;
  std::string index;
  for (std::size_t i = 0; i < count; ++i) {
    const auto a = pair_file(i, 'a', spec.channels), b = pair_file(i, 'b', spec.channels);
    if (!force && (fs::exists(dir / a) || fs::exists(dir / b)))
      fail(ErrorKind::usage, "refusing to overwrite " + (dir / a).string() + " (use --force)");
    media::save_pnm(pairs[i].first, (dir / a).string());
    media::save_pnm(pairs[i].second, (dir / b).string());
    written.push_back(a);
    written.push_back(b);
    index += a + " " + b + "\n";
  }
  write_file((dir / index_name).string(), index);
  written.push_back(index_name);
  return written;
}

inline ImagePairs read_pairs(const std::filesystem::path& dir) {
  const auto text = read_text((dir / index_name).string());
  ImagePairs out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a >> b) || (ls >> extra))
      fail(ErrorKind::data, (dir / index_name).string() + " line " + std::to_string(lineno) + ": expected two file names");
    out.emplace_back(media::load_pnm((dir / a).string()), media::load_pnm((dir / b).string()));
  }
  return out;
}

struct Datasets {
  ImagePairs train;
  ImagePairs eval;
};

/// Training pairs followed by held-out evaluation pairs, either read from
/// `data.dir` (index order) or synthesized from the config seed.
inline Datasets load_datasets(const PipelineConfig& cfg) {
  const std::size_t need = cfg.data.pairs + cfg.data.eval_pairs;
  ImagePairs all;
  if (!cfg.data.dir.empty()) {
    all = read_pairs(cfg.data.dir);
    if (all.size() < need)
      fail(ErrorKind::data, cfg.data.dir + " holds " + std::to_string(all.size()) + " pairs, config needs " + std::to_string(need));
    for (const auto& [a, b] : all)
      if (a.height() != cfg.data.size || a.width() != cfg.data.size || a.channels() != cfg.data.channels || !a.same_shape(b))
        fail(ErrorKind::data, cfg.data.dir + ": image shape does not match data.size/data.channels");
  } else {
    const auto spec = pair_spec(cfg.data);
    for (std::size_t i = 0; i < need; ++i) {
      auto p = media::gen_pair(spec, derive_seed(cfg.seed, {i}));
      all.emplace_back(std::move(p.first), std::move(p.second));
    }
  }
  Datasets d;
  d.train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(cfg.data.pairs));
  d.eval.assign(all.begin() + static_cast<std::ptrdiff_t>(cfg.data.pairs), all.begin() + static_cast<std::ptrdiff_t>(need));
  return d;
}

/// Both members of every pair, the semantic autoencoder's training images.
inline std::vector<media::Image> flatten(const ImagePairs& pairs) {
  std::vector<media::Image> out;
  for (const auto& [a, b] : pairs) {
    out.push_back(a);
    out.push_back(b);
  }
  return out;
}

}  // namespace smdma::pipeline
