// smdma: data generation, training, calibration, sweeps and plots for the
// two-user S-MDMA simulator.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smdma/cli/commands.hpp"

namespace {

using namespace smdma;
namespace fs = std::filesystem;

std::string one_line(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

int report(ErrorKind kind, const std::string& what) {
  std::fprintf(stderr, "smdma: error[%s]: %s\n", to_string(kind), one_line(what).c_str());
  return exit_code(kind);
}

struct ConfigOpts {
  std::string file;
  std::vector<std::string> sets;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", file, "config file (section.key = value)");
    cmd->add_option("--set", sets, "override one config key, key=value (repeatable)");
  }
  pipeline::PipelineConfig load() const { return cli::load_config(file, sets); }
};

void attach_sweep(CLI::App* cmd, cli::SweepArgs& s) {
  cmd->add_option("--snr", s.snr, "SNR grid a:b:step or list (dB)");
  cmd->add_option("--ratio", s.ratio, "bandwidth ratio grid a:b:step or list");
  cmd->add_option("--sorting", s.sortings, "sensitivity and/or random")->delimiter(',');
  cmd->add_option("--normalization", s.normalizations, "on and/or off")->delimiter(',');
  cmd->add_option("--seeds", s.seeds, "seeds per grid point");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"S-MDMA semantic multiple-access simulator"};
  app.require_subcommand(1);

  cli::GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "write synthetic correlated image pairs");
  gen_cmd->add_option("--out", gen.out, "output directory")->required();
  gen_cmd->add_option("--count", gen.count, "number of pairs");
  gen_cmd->add_option("--size", gen.size, "image side length");
  gen_cmd->add_option("--channels", gen.channels, "1 (PGM) or 3 (PPM)");
  gen_cmd->add_option("--edit-fraction", gen.edit_fraction, "edited area fraction in [0, 1]");
  gen_cmd->add_option("--shapes", gen.shapes, "blobs per scene");
  gen_cmd->add_option("--seed", gen.seed, "seed");
  gen_cmd->add_flag("--force", gen.force, "overwrite existing files");

  ConfigOpts train_cfg;
  std::string stage;
  fs::path train_out;
  auto* train_cmd = app.add_subcommand("train", "train the semantic or the channel codec");
  train_cmd->add_option("--stage", stage, "semantic or channel")->required();
  train_cmd->add_option("--out", train_out, "workspace directory")->required();
  train_cfg.attach(train_cmd);

  ConfigOpts cal_cfg;
  fs::path cal_out, cal_models;
  auto* cal_cmd = app.add_subcommand("calibrate", "compute the calibrated sensitivity rankings");
  cal_cmd->add_option("--out", cal_out, "ranking file (the difference stream goes to <name>.delta<ext>)")->required();
  cal_cmd->add_option("--models", cal_models, "directory holding the semantic models (default: directory of --out)");
  cal_cfg.attach(cal_cmd);

  ConfigOpts sweep_cfg;
  cli::SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "evaluate a grid of SNRs, ratios and ablations");
  sweep_cmd->add_option("--out", sw.out, "output directory for sweep.csv")->required();
  sweep_cmd->add_option("--models", sw.models, "model directory (default: --out)");
  sweep_cmd->add_option("--ranking", sw.ranking, "ranking file (default: <models>/ranking.txt)");
  sweep_cmd->add_option("--threads", sw.threads, "worker threads");
  attach_sweep(sweep_cmd, sw);
  sweep_cfg.attach(sweep_cmd);

  fs::path plot_in, plot_out;
  cli::PlotSpec spec;
  auto* plot_cmd = app.add_subcommand("plot", "render a sweep CSV as SVG");
  plot_cmd->add_option("--in", plot_in, "sweep CSV")->required();
  plot_cmd->add_option("--out", plot_out, "SVG file")->required();
  plot_cmd->add_option("--x", spec.x, "snr_db or ratio");
  plot_cmd->add_option("--y", spec.y, "psnr_db, ssim or mse");
  plot_cmd->add_option("--group", spec.group, "column that splits the curves");

  std::string params = "0.158,19.4,1.29";
  std::size_t n = 100000;
  std::uint64_t sample_seed = 1;
  fs::path sample_out;
  auto* sample_cmd = app.add_subcommand("sample-channel", "draw Shadowed-Rician power gains");
  sample_cmd->add_option("--params", params, "b0,m,omega");
  sample_cmd->add_option("--n", n, "number of draws");
  sample_cmd->add_option("--seed", sample_seed, "seed");
  sample_cmd->add_option("--out", sample_out, "CSV file")->required();

  ConfigOpts run_cfg;
  fs::path run_out;
  cli::RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "gen-data, train, calibrate and sweep in one workspace");
  run_cmd->add_option("--out", run_out, "workspace directory")->required();
  run_cmd->add_flag("--force", run_args.force, "overwrite generated data");
  attach_sweep(run_cmd, run_args.sweep);
  run_cfg.attach(run_cmd);

  fs::path replay_manifest, replay_out;
  bool replay_force = false;
  auto* replay_cmd = app.add_subcommand("replay", "repeat a run from its manifest");
  replay_cmd->add_option("--manifest", replay_manifest, "run.manifest.json")->required();
  replay_cmd->add_option("--out", replay_out, "new workspace directory")->required();
  replay_cmd->add_flag("--force", replay_force, "overwrite generated data");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(ErrorKind::usage, e.what());
  }

  try {
    if (*gen_cmd) {
      cli::gen_data(gen);
    } else if (*train_cmd) {
      cli::train(stage, train_cfg.load(), train_out);
    } else if (*cal_cmd) {
      cli::calibrate(cal_cfg.load(), cal_out, cal_models);
    } else if (*sweep_cmd) {
      cli::sweep(sweep_cfg.load(), sw);
    } else if (*plot_cmd) {
      cli::plot(plot_in, plot_out, spec);
    } else if (*sample_cmd) {
      const auto s = cli::sample_channel(cli::parse_sr_params(params), n, sample_seed, sample_out);
      std::printf("mean=%.6f ks=%.6f critical=%.6f\n", s.mean, s.ks, s.critical);
    } else if (*run_cmd) {
      cli::run(run_cfg.load(), run_out, run_args);
    } else if (*replay_cmd) {
      cli::replay(replay_manifest, replay_out, replay_force);
    }
  } catch (const Error& e) {
    return report(e.kind(), e.what());
  } catch (const fs::filesystem_error& e) {
    return report(ErrorKind::data, e.what());
  } catch (const std::exception& e) {
    return report(ErrorKind::numeric, e.what());
  }
  return 0;
}
