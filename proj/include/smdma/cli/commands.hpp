#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "smdma/channel/shadowed_rician.hpp"
#include "smdma/cli/manifest.hpp"
#include "smdma/cli/plot.hpp"
#include "smdma/cli/workspace.hpp"
#include "smdma/codecs/train.hpp"
#include "smdma/core/bytes.hpp"
#include "smdma/core/error.hpp"
#include "smdma/pipeline/config.hpp"
#include "smdma/pipeline/data.hpp"
#include "smdma/pipeline/sweep.hpp"
#include "smdma/pipeline/system.hpp"
#include "smdma/pipeline/train_channel.hpp"

namespace smdma::cli {

/// Config file (optional) over built-in defaults, then `key=value` overrides.
inline pipeline::PipelineConfig load_config(const std::string& file, const std::vector<std::string>& overrides) {
  pipeline::PipelineConfig cfg;
  if (!file.empty()) {
    if (!fs::exists(file)) fail(ErrorKind::config, "config file " + file + " not found");
    cfg = pipeline::parse_config(read_text(file));
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) fail(ErrorKind::usage, "--set expects key=value, got '" + o + "'");
    pipeline::set_option(cfg, pipeline::detail::trim(o.substr(0, eq)), pipeline::detail::trim(o.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

inline std::uint64_t channel_init_seed(const pipeline::PipelineConfig& cfg) { return derive_seed(cfg.seed, {0x6368616eULL, 1}); }
inline std::uint64_t channel_train_seed(const pipeline::PipelineConfig& cfg) { return derive_seed(cfg.seed, {0x6368616eULL, 2}); }

inline RunManifest begin(const std::string& command, const pipeline::PipelineConfig* cfg) {
  RunManifest m;
  m.command = command;
  m.started = utc_now();
  if (cfg) {
    m.config = config_map(*cfg);
    m.seeds["seed"] = cfg->seed;
  }
  return m;
}

inline void finish(RunManifest& m, const fs::path& path) {
  m.finished = utc_now();
  save_manifest(path, m);
}

// gen-data

struct GenDataArgs {
  fs::path out;
  std::size_t count = 32;
  std::size_t size = 32;
  std::size_t channels = 1;
  double edit_fraction = 0.25;
  std::size_t shapes = 3;
  std::uint64_t seed = 1;
  bool force = false;
};

inline RunManifest gen_data(const GenDataArgs& a) {
  require(!a.out.empty(), ErrorKind::usage, "--out is required");
  require(a.channels == 1 || a.channels == 3, ErrorKind::usage, "--channels must be 1 or 3");
  auto m = begin("gen-data", nullptr);
  m.seeds["seed"] = a.seed;
  m.args = {{"count", std::to_string(a.count)}, {"size", std::to_string(a.size)},     {"channels", std::to_string(a.channels)},
            {"edit_fraction", pipeline::detail::num(a.edit_fraction)},              {"shapes", std::to_string(a.shapes)}};
  m.outputs = pipeline::write_pairs(a.out, a.count, {a.size, a.channels, a.edit_fraction, a.shapes}, a.seed, a.force);
  finish(m, a.out / "gen-data.manifest.json");
  return m;
}

// train

inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline RunManifest train_semantic_stage(const pipeline::PipelineConfig& cfg, const fs::path& out) {
  auto m = begin("train-semantic", &cfg);
  fs::create_directories(out);
  const auto data = pipeline::load_datasets(cfg);
  const auto images = pipeline::flatten(data.train);
  const codecs::TrainOptions opt{cfg.semantic_epochs, cfg.train.batch_size, cfg.semantic_learning_rate, cfg.seed};
  const auto result = codecs::train_semantic(images, cfg.semantic, opt);
  save_semantic(out, result.codec);
  std::string csv = "epoch,mse\n";
  for (std::size_t e = 0; e < result.loss_curve.size(); ++e) csv += std::to_string(e + 1) + "," + csv_number(result.loss_curve[e]) + "\n";
  write_file((out / "semantic_loss.csv").string(), csv);
  for (const char* f : {semantic_encoder_file, semantic_decoder_file}) m.model_hashes[f] = file_hash(out / f);
  m.outputs = {semantic_encoder_file, semantic_decoder_file, "semantic_loss.csv"};
  finish(m, out / "train-semantic.manifest.json");
  return m;
}

inline RunManifest train_channel_stage(const pipeline::PipelineConfig& cfg, const fs::path& out) {
  require(!cfg.identity_channel_codec, ErrorKind::config, "channel_codec.kind = identity has nothing to train");
  auto m = begin("train-channel", &cfg);
  m.seeds["channel_init"] = channel_init_seed(cfg);
  m.seeds["channel_train"] = channel_train_seed(cfg);
  const auto semantic = load_semantic(out, cfg);
  m.model_hashes[semantic_encoder_file] = file_hash(out / semantic_encoder_file);
  m.model_hashes[semantic_decoder_file] = file_hash(out / semantic_decoder_file);
  const auto data = pipeline::load_datasets(cfg);
  const auto z = pipeline::channel_training_set(data.train, cfg, semantic);
  Rng init(channel_init_seed(cfg));
  auto codec = codecs::build_channel_codec(cfg.channel_codec, init, cfg.train.per_user_decoders);
  const auto curve = pipeline::train_channel(codec, z, cfg, channel_train_seed(cfg));
  const auto files = save_channel(out, codec);
  std::string csv = "epoch,combined,user1,user2\n";
  for (std::size_t e = 0; e < curve.size(); ++e)
    csv += std::to_string(e + 1) + "," + csv_number(curve[e].combined) + "," + csv_number(curve[e].user1) + "," +
           csv_number(curve[e].user2) + "\n";
  write_file((out / "channel_loss.csv").string(), csv);
  for (const auto& f : files) m.model_hashes[f] = file_hash(out / f);
  m.outputs = files;
  m.outputs.push_back("channel_loss.csv");
  finish(m, out / "train-channel.manifest.json");
  return m;
}

inline RunManifest train(const std::string& stage, const pipeline::PipelineConfig& cfg, const fs::path& out) {
  require(!out.empty(), ErrorKind::usage, "--out is required");
  if (stage == "semantic") return train_semantic_stage(cfg, out);
  if (stage == "channel") return train_channel_stage(cfg, out);
  fail(ErrorKind::usage, "--stage must be semantic or channel, got '" + stage + "'");
}

// calibrate

inline RunManifest calibrate(const pipeline::PipelineConfig& cfg, const fs::path& out, fs::path models) {
  require(!out.empty(), ErrorKind::usage, "--out is required");
  if (models.empty()) models = out.has_parent_path() ? out.parent_path() : fs::path(".");
  auto m = begin("calibrate", &cfg);
  const auto semantic = load_semantic(models, cfg);
  m.model_hashes[semantic_encoder_file] = file_hash(models / semantic_encoder_file);
  m.model_hashes[semantic_decoder_file] = file_hash(models / semantic_decoder_file);
  const auto data = pipeline::load_datasets(cfg);
  const auto r = pipeline::calibrate_streams(data.train, semantic, cfg.ranking_epsilon);
  save_stream_ranking(out, r, cfg.ranking_epsilon);
  m.outputs = {out.filename().string(), delta_ranking_path(out).filename().string()};
  finish(m, (out.has_parent_path() ? out.parent_path() : fs::path(".")) / "calibrate.manifest.json");
  return m;
}

// sweep

struct SweepArgs {
  fs::path out;
  fs::path models;   // default: out
  fs::path ranking;  // default: models/ranking.txt
  std::string snr = "0";
  std::string ratio = "1";
  std::vector<std::string> sortings{"sensitivity"};
  std::vector<std::string> normalizations{"on"};
  std::size_t seeds = 1;
  std::size_t threads = 1;
};

inline std::map<std::string, std::string> sweep_arg_map(const SweepArgs& a) {
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
  };
  return {{"snr", a.snr}, {"ratio", a.ratio}, {"sorting", join(a.sortings)}, {"normalization", join(a.normalizations)},
          {"seeds", std::to_string(a.seeds)}};
}

inline pipeline::SweepGrid sweep_grid(const SweepArgs& a, const pipeline::PipelineConfig& cfg) {
  pipeline::SweepGrid g;
  g.snrs = pipeline::parse_range(a.snr);
  g.ratios = pipeline::parse_range(a.ratio);
  for (double r : g.ratios)
    if (!(r > 0.0 && r <= 1.0)) fail(ErrorKind::usage, "ratio " + pipeline::detail::num(r) + " outside (0, 1]");
  g.sortings.clear();
  for (const auto& s : a.sortings) {
    if (s == "sensitivity") g.sortings.push_back(pipeline::Sorting::sensitivity);
    else if (s == "random") g.sortings.push_back(pipeline::Sorting::random);
    else fail(ErrorKind::usage, "--sorting expects sensitivity or random, got '" + s + "'");
  }
  g.normalizations.clear();
  for (const auto& s : a.normalizations) {
    if (s == "on") g.normalizations.push_back(true);
    else if (s == "off") g.normalizations.push_back(false);
    else fail(ErrorKind::usage, "--normalization expects on or off, got '" + s + "'");
  }
  require(a.seeds > 0, ErrorKind::usage, "--seeds must be positive");
  g.seeds = a.seeds;
  g.base_seed = derive_seed(cfg.seed, {0x73776565ULL});
  return g;
}

inline RunManifest sweep(const pipeline::PipelineConfig& cfg, SweepArgs a) {
  require(!a.out.empty(), ErrorKind::usage, "--out is required");
  if (a.models.empty()) a.models = a.out;
  if (a.ranking.empty()) a.ranking = a.models / ranking_file;
  const auto grid = sweep_grid(a, cfg);
  auto m = begin("sweep", &cfg);
  m.args = sweep_arg_map(a);
  m.seeds["sweep_base"] = grid.base_seed;

  pipeline::SystemModels models{load_semantic(a.models, cfg), load_channel(a.models, cfg), std::nullopt};
  const bool needs_ranking = cfg.ranking_mode == ranking::RankingMode::calibrated &&
                             std::find(grid.sortings.begin(), grid.sortings.end(), pipeline::Sorting::sensitivity) != grid.sortings.end();
  if (needs_ranking) models.calibrated = load_stream_ranking(a.ranking, cfg.semantic.feature_dim);
  for (const auto& entry : fs::directory_iterator(a.models))
    if (entry.path().extension() == ".nn") m.model_hashes[entry.path().filename().string()] = file_hash(entry.path());

  const auto data = pipeline::load_datasets(cfg);
  const auto records = pipeline::evaluate_sweep(data.eval, cfg, models, grid, a.threads);
  fs::create_directories(a.out);
  write_file((a.out / "sweep.csv").string(), pipeline::format_sweep_csv(records));
  m.outputs = {"sweep.csv"};
  finish(m, a.out / "sweep.manifest.json");
  return m;
}

// plot

inline void plot(const fs::path& in, const fs::path& out, const PlotSpec& spec) {
  require(spec.x == "snr_db" || spec.x == "ratio", ErrorKind::usage, "--x must be snr_db or ratio");
  require(spec.y == "psnr_db" || spec.y == "ssim" || spec.y == "mse", ErrorKind::usage, "--y must be psnr_db, ssim or mse");
  if (!fs::exists(in)) fail(ErrorKind::data, in.string() + " not found");
  const auto table = parse_csv(read_text(in.string()));
  const auto svg = render_svg(build_series(table, spec), spec);
  write_file(out.string(), svg);
}

// sample-channel

inline channel::SrParams parse_sr_params(const std::string& text) {
  std::vector<double> v;
  try {
    v = pipeline::detail::to_list("--params", text);
  } catch (const Error& e) {
    fail(ErrorKind::usage, e.what());
  }
  if (v.size() != 3) fail(ErrorKind::usage, "--params expects b0,m,omega");
  channel::SrParams p{v[0], v[1], v[2]};
  try {
    p.validate();
  } catch (const Error& e) {
    fail(ErrorKind::usage, e.what());
  }
  return p;
}

struct ChannelSampleSummary {
  double mean = 0.0;
  double ks = 0.0;
  double critical = 0.0;
};

inline ChannelSampleSummary sample_channel(const channel::SrParams& p, std::size_t n, std::uint64_t seed, const fs::path& out) {
  require(n >= 1, ErrorKind::usage, "--n must be at least 1");
  require(!out.empty(), ErrorKind::usage, "--out is required");
  const auto draws = channel::sr_sample(n, p, seed);
  ChannelSampleSummary s;
  for (double g : draws) s.mean += g;
  s.mean /= static_cast<double>(n);
  s.ks = channel::ks_statistic(draws, channel::SrCdf(p));
  s.critical = channel::ks_critical_001(n);
  std::string csv = "index,gain\n";
  csv.reserve(n * 24);
  char buf[64];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, draws[i]);
    csv += buf;
  }
  std::snprintf(buf, sizeof buf, "# mean=%.6f ks=%.6f critical=%.6f\n", s.mean, s.ks, s.critical);
  csv += buf;
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_file(out.string(), csv);
  return s;
}

// run / replay

struct RunArgs {
  SweepArgs sweep;
  bool force = false;
};

/// gen-data -> train semantic -> train channel -> calibrate -> sweep in one workspace.
inline RunManifest run(const pipeline::PipelineConfig& cfg, const fs::path& out, RunArgs a) {
  require(!out.empty(), ErrorKind::usage, "--out is required");
  auto m = begin("run", &cfg);
  m.args = sweep_arg_map(a.sweep);
  if (a.force) m.args["force"] = "on";

  pipeline::PipelineConfig work = cfg;
  if (work.data.dir.empty()) {
    GenDataArgs g{out / "data", cfg.data.pairs + cfg.data.eval_pairs, cfg.data.size, cfg.data.channels, cfg.data.edit_fraction,
                  cfg.data.shapes, cfg.seed, a.force};
    gen_data(g);
    work.data.dir = (out / "data").string();
  }
  const auto sem = train_semantic_stage(work, out);
  std::vector<std::string> outputs = sem.outputs;
  if (!work.identity_channel_codec) {
    const auto ch = train_channel_stage(work, out);
    for (const auto& [k, v] : ch.model_hashes) m.model_hashes[k] = v;
    outputs.insert(outputs.end(), ch.outputs.begin(), ch.outputs.end());
  }
  for (const auto& [k, v] : sem.model_hashes) m.model_hashes[k] = v;
  calibrate(work, out / ranking_file, out);
  outputs.push_back(ranking_file);
  outputs.push_back(delta_ranking_path(ranking_file).string());
  a.sweep.out = out;
  a.sweep.models = out;
  const auto sw = sweep(work, a.sweep);
  m.seeds.insert(sw.seeds.begin(), sw.seeds.end());
  outputs.push_back("sweep.csv");
  m.outputs = outputs;
  finish(m, out / "run.manifest.json");
  return m;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

/// Repeat a recorded `run` into a new workspace.
inline RunManifest replay(const fs::path& manifest, const fs::path& out, bool force) {
  const auto rec = load_manifest(manifest);
  if (rec.command != "run") fail(ErrorKind::data, manifest.string() + ": only run manifests can be replayed (got '" + rec.command + "')");
  auto cfg = config_from_map(rec.config);
  cfg.validate();
  RunArgs a;
  auto get = [&](const char* k) {
    const auto it = rec.args.find(k);
    if (it == rec.args.end()) fail(ErrorKind::data, manifest.string() + ": missing run argument '" + k + "'");
    return it->second;
  };
  a.sweep.snr = get("snr");
  a.sweep.ratio = get("ratio");
  a.sweep.sortings = split_list(get("sorting"));
  a.sweep.normalizations = split_list(get("normalization"));
  a.sweep.seeds = pipeline::detail::to_count("seeds", get("seeds"));
  a.force = force;
  return run(cfg, out, a);
}

}  // namespace smdma::cli
