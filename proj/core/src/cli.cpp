#include "crl/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "crl/config.hpp"
#include "crl/plot.hpp"
#include "crl/sweep.hpp"

namespace crl::cli {
namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;
  std::size_t seed_count = 0;
  std::string bonus;
};

std::vector<Override> collect_overrides(const CommonOptions& opts) {
  std::vector<Override> overrides;
  if (!opts.bonus.empty()) overrides.push_back({"bonus.strategy", "\"" + opts.bonus + "\"", "--bonus"});
  if (opts.seed_count > 0) {
    std::string seeds = "[";
    for (std::size_t s = 0; s < opts.seed_count; ++s) seeds += (s ? "," : "") + std::to_string(s);
    overrides.push_back({"run.seeds", seeds + "]", "--seed-count"});
  }
  if (!opts.out_dir.empty()) overrides.push_back({"run.out_dir", "\"" + opts.out_dir + "\"", "--out-dir"});
  for (const auto& s : opts.sets) overrides.push_back(parse_override(s, "--set"));
  return overrides;
}

fs::path experiment_dir(const runner::ExperimentConfig& cfg) {
  const fs::path root = cfg.output_dir.empty() ? fs::path("runs") : cfg.output_dir;
  return root / cfg.name;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int cmd_run(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  auto doc = ConfigDocument::load(opts.config_path);
  const auto overrides = collect_overrides(opts);
  doc.apply(overrides);
  const auto cfg = doc.experiment();

  auto exec = cfg;
  exec.output_dir = experiment_dir(cfg);
  const auto result = runner::run_experiment(exec);

  RunManifest manifest;
  manifest.code_version = code_version();
  manifest.command = "run";
  manifest.config = cfg;
  manifest.overrides = overrides;
  manifest.summary_path = result.summary_path.string();
  for (const auto& c : result.curves) {
    manifest.seeds.push_back({c.seed, c.csv_path.string(), c.failed, c.error});
    if (c.failed) err << "seed " << c.seed << " failed: " << c.error << '\n';
  }
  manifest.status = result.failed_seeds() == 0 ? "complete" : "failed";
  write_text(exec.output_dir / "manifest.json", to_json(manifest));

  out << "experiment " << cfg.name << " (" << runner::to_string(cfg.bonus.kind) << "): " << cfg.seeds.size()
      << " seed(s), " << cfg.iterations << " iteration(s)\n";
  if (!result.mean_return.empty()) {
    out << "final mean extrinsic return " << result.mean_return.back() << " +/- " << result.std_return.back()
        << '\n';
  }
  out << "outputs in " << exec.output_dir.string() << '\n';
  return result.failed_seeds() == 0 ? Success : RuntimeFailure;
}

int cmd_sweep(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  auto doc = ConfigDocument::load(opts.config_path);
  const auto overrides = collect_overrides(opts);
  doc.apply(overrides);
  auto spec = doc.sweep();
  const auto cfg = spec.base;
  spec.base.output_dir = experiment_dir(cfg);
  fs::create_directories(spec.base.output_dir);

  const auto result = runner::run_sweep(spec);
  const auto k_table = runner::format_k_table(result);
  const auto grid_table = runner::format_beta_eta_table(result);
  write_text(spec.base.output_dir / "sweep_summary.csv", runner::format_sweep_csv(result));
  write_text(spec.base.output_dir / "sweep_tables.md",
             "Effect of the number of clusters K\n\n" + k_table + "\nEffect of beta and eta\n\n" + grid_table);

  RunManifest manifest;
  manifest.code_version = code_version();
  manifest.command = "sweep";
  manifest.config = cfg;
  manifest.overrides = overrides;
  manifest.summary_path = (spec.base.output_dir / "sweep_summary.csv").string();
  bool ok = true;
  for (const auto& c : result.cells) {
    if (!c.ok || c.failed_seeds > 0) {
      ok = false;
      err << "cell " << runner::cell_name(c.key) << " failed: " << (c.error.empty() ? "seed failure" : c.error)
          << '\n';
    }
  }
  manifest.status = ok ? "complete" : "failed";
  write_text(spec.base.output_dir / "manifest.json", to_json(manifest));

  out << k_table << '\n' << grid_table;
  return ok ? Success : RuntimeFailure;
}

int cmd_plot(const std::string& out_path, const std::vector<std::string>& inputs, const std::string& title,
             std::ostream& out, std::ostream& err) {
  std::vector<std::string> order;
  std::map<std::string, LabeledCurves> groups;
  for (const auto& input : inputs) {
    std::string label;
    fs::path path;
    const auto eq = input.find('=');
    if (eq != std::string::npos && !fs::exists(input)) {
      label = input.substr(0, eq);
      path = input.substr(eq + 1);
    } else {
      path = input;
      label = path.parent_path().filename().string();
      if (label.empty()) label = path.stem().string();
    }
    if (!groups.count(label)) {
      order.push_back(label);
      groups[label].label = label;
    }
    groups[label].seeds.push_back(read_curve_csv(path));
  }

  std::vector<CurveBand> bands;
  for (const auto& label : order) {
    auto band = summarize(groups[label]);
    if (band.truncated) {
      err << "warning: curves for '" << label << "' have different lengths; truncated to " << band.mean.size()
          << " iterations\n";
    }
    bands.push_back(std::move(band));
  }
  write_text(out_path, render_svg(bands, title));
  out << "wrote " << out_path << " (" << bands.size() << " series)\n";
  return Success;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Clustered exploration bonus laboratory"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "Train one experiment over its seeds");
  run->add_option("config", run_opts.config_path, "Experiment config (JSON) or run manifest")->required();
  run->add_option("--seed-count", run_opts.seed_count, "Use seeds 0..N-1");
  run->add_option("--out-dir", run_opts.out_dir, "Output root directory");
  run->add_option("--bonus", run_opts.bonus, "Bonus strategy")->check(CLI::IsMember({"crl", "hash", "none"}));
  run->add_option("--set", run_opts.sets, "Dotted-key override, e.g. optimizer.max_kl=0.02");

  CommonOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "Run a K / beta / eta grid");
  sweep->add_option("config", sweep_opts.config_path, "Sweep config (JSON)")->required();
  sweep->add_option("--seed-count", sweep_opts.seed_count, "Use seeds 0..N-1");
  sweep->add_option("--out-dir", sweep_opts.out_dir, "Output root directory");
  sweep->add_option("--set", sweep_opts.sets, "Dotted-key override");

  std::string plot_out;
  std::string plot_title;
  std::vector<std::string> plot_inputs;
  auto* plot = app.add_subcommand("plot", "Render mean +/- std learning curves to SVG");
  plot->add_option("output", plot_out, "Output SVG path")->required();
  plot->add_option("curves", plot_inputs, "Per-seed CSVs, optionally as LABEL=path")->required();
  plot->add_option("--title", plot_title, "Figure title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return Success;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return ConfigFailure;
  }

  try {
    if (*run) return cmd_run(run_opts, out, err);
    if (*sweep) return cmd_sweep(sweep_opts, out, err);
    return cmd_plot(plot_out, plot_inputs, plot_title, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return ConfigFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return RuntimeFailure;
  }
}

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("crl_lab");
  for (const auto& a : args) argv.push_back(a.c_str());
  return main(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace crl::cli
