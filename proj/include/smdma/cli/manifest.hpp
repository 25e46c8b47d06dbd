#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "smdma/core/bytes.hpp"
#include "smdma/core/error.hpp"
#include "smdma/pipeline/config.hpp"

namespace smdma::cli {

inline constexpr const char* tool_version = "smdma 0.1.0";

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Record of one command execution. `config` holds every effective setting and
/// `args` the command-specific options, so a run can be repeated from it alone.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::map<std::string, std::string> args;
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, std::string> model_hashes;
  std::vector<std::string> outputs;
  std::string tool = tool_version;
  std::string started;
  std::string finished;
};

inline std::map<std::string, std::string> config_map(const pipeline::PipelineConfig& cfg) {
  std::map<std::string, std::string> out;
  for (const auto& [key, b] : pipeline::detail::bindings()) out[key] = b.get(cfg);
  return out;
}

inline pipeline::PipelineConfig config_from_map(const std::map<std::string, std::string>& m) {
  pipeline::PipelineConfig cfg;
  for (const auto& [k, v] : m) pipeline::set_option(cfg, k, v);
  return cfg;
}

inline nlohmann::ordered_json to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["tool"] = m.tool;
  j["command"] = m.command;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["config"] = m.config;
  j["args"] = m.args;
  j["seeds"] = m.seeds;
  j["model_hashes"] = m.model_hashes;
  j["outputs"] = m.outputs;
  return j;
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  try {
    m.tool = j.at("tool").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.started = j.value("started", "");
    m.finished = j.value("finished", "");
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    m.args = j.value("args", std::map<std::string, std::string>{});
    m.seeds = j.value("seeds", std::map<std::string, std::uint64_t>{});
    m.model_hashes = j.value("model_hashes", std::map<std::string, std::string>{});
    m.outputs = j.value("outputs", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::data, std::string("malformed manifest: ") + e.what());
  }
  return m;
}

inline void save_manifest(const std::filesystem::path& p, const RunManifest& m) { write_file(p.string(), to_json(m).dump(2) + "\n"); }

inline RunManifest load_manifest(const std::filesystem::path& p) {
  const auto text = read_text(p.string());
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(ErrorKind::data, p.string() + ": manifest is not valid JSON");
  return manifest_from_json(j);
}

}  // namespace smdma::cli
