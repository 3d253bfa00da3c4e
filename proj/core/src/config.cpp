#include "crl/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#ifndef CRL_VERSION
#define CRL_VERSION "unknown"
#endif

namespace crl::cli {
namespace {

using nlohmann::json;

// Reads typed values out of a JSON object while tracking which keys were
// consumed, so leftovers can be reported as schema violations.
class Section {
 public:
  Section(const json& root, std::string path) : path_(std::move(path)) {
    if (root.is_null()) {
      node_ = json::object();
    } else if (!root.is_object()) {
      throw ConfigError(path_ + ": expected an object");
    } else {
      node_ = root;
    }
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  template <typename T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!node_.contains(key)) return fallback;
    return convert<T>(key);
  }

  template <typename T>
  T require(const std::string& key) {
    seen_.insert(key);
    if (!node_.contains(key) || node_.at(key).is_null()) throw ConfigError(name(key) + ": required key is missing");
    return convert<T>(key);
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(node_.contains(key) ? node_.at(key) : json(nullptr), name(key));
  }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(name(item.key()) + ": unknown key");
    }
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  template <typename T>
  T convert(const std::string& key) {
    try {
      return node_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(name(key) + ": value has the wrong type");
    }
  }

  json node_;
  std::string path_;
  std::set<std::string> seen_;
};

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

// A run manifest carries the resolved config under "config".
json config_root(const std::string& text) {
  json root = parse_json(text);
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  if (root.contains("manifest_version") && root.contains("config")) return root.at("config");
  return root;
}

json set_path(json root, const std::string& dotted, const json& value) {
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const auto part = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + dotted + "' is malformed");
    if (!node->is_object()) throw ConfigError("override key '" + dotted + "' does not address an object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return root;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

runner::ExperimentConfig read_experiment(Section& top) {
  runner::ExperimentConfig cfg;
  cfg.name = top.get<std::string>("name", cfg.name);

  auto env = top.child("env");
  cfg.env.id = env.require<std::string>("id");
  if (env.has("horizon")) cfg.env.horizon = env.get<std::size_t>("horizon", 0);
  if (env.has("size")) cfg.env.size = env.get<std::size_t>("size", 0);
  if (env.has("power")) cfg.env.power = env.get<double>("power", 0.0);
  env.finish();

  auto bonus = top.child("bonus");
  cfg.bonus.kind = runner::bonus_kind_from_string(bonus.get<std::string>("strategy", "crl"));
  auto crl = bonus.child("crl");
  cfg.bonus.crl.beta = crl.get<double>("beta", cfg.bonus.crl.beta);
  cfg.bonus.crl.eta = crl.get<double>("eta", cfg.bonus.crl.eta);
  cfg.bonus.crl.k = crl.get<std::size_t>("clusters", cfg.bonus.crl.k);
  cfg.bonus.kmeans_max_iters = crl.get<std::size_t>("kmeans_max_iters", cfg.bonus.kmeans_max_iters);
  cfg.bonus.standardize_states = crl.get<bool>("standardize", cfg.bonus.standardize_states);
  crl.finish();
  auto hash = bonus.child("hash");
  cfg.bonus.hash.beta = hash.get<double>("beta", cfg.bonus.hash.beta);
  cfg.bonus.hash.code_length = hash.get<std::size_t>("code_length", cfg.bonus.hash.code_length);
  cfg.bonus.hash.seed = hash.get<std::uint64_t>("seed", cfg.bonus.hash.seed);
  hash.finish();
  bonus.finish();

  auto opt = top.child("optimizer");
  auto& tr = cfg.optimizer;
  tr.max_kl = opt.get<double>("max_kl", tr.max_kl);
  tr.discount = opt.get<double>("discount", tr.discount);
  tr.cg_iterations = opt.get<std::size_t>("cg_iterations", tr.cg_iterations);
  tr.cg_damping = opt.get<double>("cg_damping", tr.cg_damping);
  tr.backtrack_steps = opt.get<std::size_t>("backtrack_steps", tr.backtrack_steps);
  tr.backtrack_ratio = opt.get<double>("backtrack_ratio", tr.backtrack_ratio);
  tr.kl_tolerance = opt.get<double>("kl_tolerance", tr.kl_tolerance);
  tr.normalize_advantages = opt.get<bool>("normalize_advantages", tr.normalize_advantages);
  if (opt.has("hidden")) cfg.hidden = opt.get<std::vector<std::size_t>>("hidden", {});
  cfg.activation = policy::activation_from_string(opt.get<std::string>("activation", "tanh"));
  opt.finish();

  auto run = top.child("run");
  cfg.batch_size = run.get<std::size_t>("batch_size", cfg.batch_size);
  cfg.iterations = run.get<std::size_t>("iterations", cfg.iterations);
  cfg.seeds = run.get<std::vector<std::uint64_t>>("seeds", cfg.seeds);
  cfg.output_dir = run.get<std::string>("out_dir", "");
  cfg.record_wall_clock = run.get<bool>("wall_clock", cfg.record_wall_clock);
  run.finish();
  return cfg;
}

}  // namespace

Override parse_override(const std::string& text, const std::string& source) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + text + "' must look like key=value");
  return {text.substr(0, eq), text.substr(eq + 1), source};
}

ConfigDocument ConfigDocument::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

ConfigDocument ConfigDocument::parse(const std::string& text) {
  return ConfigDocument{config_root(text).dump()};
}

void ConfigDocument::apply(const std::vector<Override>& overrides) {
  json root = parse_json(json_text);
  for (const auto& o : overrides) {
    json value;
    try {
      value = json::parse(o.value);
    } catch (const json::parse_error&) {
      value = o.value;
    }
    root = set_path(std::move(root), o.key, value);
  }
  json_text = root.dump();
}

runner::ExperimentConfig ConfigDocument::experiment() const {
  const json root = parse_json(json_text);
  Section top(root, "");
  auto cfg = read_experiment(top);
  top.child("sweep");  // tolerated; consumed by sweep()
  top.finish();
  cfg.validate();
  return cfg;
}

runner::SweepSpec ConfigDocument::sweep() const {
  const json root = parse_json(json_text);
  Section top(root, "");
  runner::SweepSpec spec;
  spec.base = read_experiment(top);
  if (!root.contains("sweep")) throw ConfigError("sweep: section is missing");
  auto sweep = top.child("sweep");
  spec.ks = sweep.get<std::vector<std::size_t>>("clusters", {spec.base.bonus.crl.k});
  spec.betas = sweep.get<std::vector<double>>("beta", {spec.base.bonus.crl.beta});
  spec.etas = sweep.get<std::vector<double>>("eta", {spec.base.bonus.crl.eta});
  sweep.finish();
  top.finish();
  spec.validate();
  return spec;
}

namespace {

json experiment_json(const runner::ExperimentConfig& cfg) {
  json env = {{"id", cfg.env.id}, {"horizon", cfg.resolved_horizon()}};
  if (cfg.env.size) env["size"] = *cfg.env.size;
  if (cfg.env.power) env["power"] = *cfg.env.power;
  return {
      {"name", cfg.name},
      {"env", env},
      {"bonus",
       {{"strategy", runner::to_string(cfg.bonus.kind)},
        {"crl",
         {{"beta", cfg.bonus.crl.beta},
          {"eta", cfg.bonus.crl.eta},
          {"clusters", cfg.bonus.crl.k},
          {"kmeans_max_iters", cfg.bonus.kmeans_max_iters},
          {"standardize", cfg.bonus.standardize_states}}},
        {"hash",
         {{"beta", cfg.bonus.hash.beta},
          {"code_length", cfg.bonus.hash.code_length},
          {"seed", cfg.bonus.hash.seed}}}}},
      {"optimizer",
       {{"max_kl", cfg.optimizer.max_kl},
        {"discount", cfg.optimizer.discount},
        {"cg_iterations", cfg.optimizer.cg_iterations},
        {"cg_damping", cfg.optimizer.cg_damping},
        {"backtrack_steps", cfg.optimizer.backtrack_steps},
        {"backtrack_ratio", cfg.optimizer.backtrack_ratio},
        {"kl_tolerance", cfg.optimizer.kl_tolerance},
        {"normalize_advantages", cfg.optimizer.normalize_advantages},
        {"hidden", cfg.resolved_hidden()},
        {"activation", policy::to_string(cfg.activation)}}},
      {"run",
       {{"batch_size", cfg.batch_size},
        {"iterations", cfg.iterations},
        {"seeds", cfg.seeds},
        {"out_dir", cfg.output_dir.string()},
        {"wall_clock", cfg.record_wall_clock}}},
  };
}

}  // namespace

std::string to_json(const runner::ExperimentConfig& config, int indent) {
  return experiment_json(config).dump(indent);
}

std::string to_json(const RunManifest& manifest) {
  json overrides = json::array();
  for (const auto& o : manifest.overrides) {
    overrides.push_back({{"key", o.key}, {"value", o.value}, {"source", o.source}});
  }
  json seeds = json::array();
  for (const auto& s : manifest.seeds) {
    json entry = {{"seed", s.seed}, {"csv", s.csv_path}, {"status", s.failed ? "failed" : "ok"}};
    if (s.failed) entry["error"] = s.error;
    seeds.push_back(entry);
  }
  const json root = {
      {"manifest_version", 1},
      {"code_version", manifest.code_version},
      {"command", manifest.command},
      {"config", experiment_json(manifest.config)},
      {"overrides", overrides},
      {"seeds", seeds},
      {"summary", manifest.summary_path},
      {"status", manifest.status},
  };
  return root.dump(2) + "\n";
}

std::string code_version() { return CRL_VERSION; }

}  // namespace crl::cli
