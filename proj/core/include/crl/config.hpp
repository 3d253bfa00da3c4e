#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "crl/runner.hpp"
#include "crl/sweep.hpp"

namespace crl::cli {

/// One dotted-key override, e.g. "optimizer.max_kl=0.02".
struct Override {
  std::string key;
  std::string value;
  /// Where it came from ("--set", "--bonus", "--seed-count", "--out-dir").
  std::string source;
};

/// Parses "a.b=value"; throws ConfigError when there is no '='.
Override parse_override(const std::string& text, const std::string& source = "--set");

/// Config file (or run manifest, whose "config" section is used) plus overrides.
///
/// The document is a JSON object with sections env, bonus, optimizer, run and
/// optionally sweep. Unknown keys are schema violations.
struct ConfigDocument {
  std::string json_text;

  static ConfigDocument load(const std::filesystem::path& path);
  static ConfigDocument parse(const std::string& text);

  /// Applies overrides in order. Values are parsed as JSON when possible and
  /// taken as strings otherwise.
  void apply(const std::vector<Override>& overrides);

  runner::ExperimentConfig experiment() const;
  runner::SweepSpec sweep() const;
};

/// Fully resolved config as JSON text; feeding it back through
/// ConfigDocument::parse reproduces an identical ExperimentConfig.
std::string to_json(const runner::ExperimentConfig& config, int indent = 2);

struct ManifestSeed {
  std::uint64_t seed = 0;
  std::string csv_path;
  bool failed = false;
  std::string error;
};

struct RunManifest {
  std::string code_version;
  std::string command;
  runner::ExperimentConfig config;
  std::vector<Override> overrides;
  std::vector<ManifestSeed> seeds;
  std::string summary_path;
  std::string status;
};

std::string to_json(const RunManifest& manifest);

std::string code_version();

}  // namespace crl::cli
