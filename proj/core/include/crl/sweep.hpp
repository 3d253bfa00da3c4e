#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "crl/runner.hpp"

namespace crl::runner {

/// Grid over cluster count K, bonus coefficient beta and count coefficient eta.
struct SweepSpec {
  ExperimentConfig base;
  std::vector<std::size_t> ks;
  std::vector<double> betas;
  std::vector<double> etas;

  void validate() const;
};

struct SweepCellKey {
  std::size_t k = 0;
  double beta = 0.0;
  double eta = 0.0;

  friend bool operator==(const SweepCellKey&, const SweepCellKey&) = default;
};

struct SweepCell {
  SweepCellKey key;
  double beta_times_eta = 0.0;
  /// Final-iteration mean extrinsic return across successful seeds.
  double final_mean_return = 0.0;
  double final_std_return = 0.0;
  std::size_t failed_seeds = 0;
  bool ok = true;
  std::string error;
  /// Per-seed records of the cell's run.
  std::vector<SeedCurve> curves;
};

struct SweepResult {
  std::vector<SweepCell> cells;
};

/// Cartesian product in (K, beta, eta) order with duplicates dropped.
std::vector<SweepCellKey> sweep_grid(const SweepSpec& spec);

/// Directory name for one cell, e.g. "K16_beta0.01_eta0.0001".
std::string cell_name(const SweepCellKey& key);

/// Runs every cell with the CRL strategy. When the base config has an output
/// directory each cell writes into its own subdirectory. Failures are
/// recorded per cell and never abort the sweep.
SweepResult run_sweep(const SweepSpec& spec);

/// Compact scientific notation: 1e-05 -> "1e-5", 0.00025 -> "2.5e-4", 0 -> "0".
std::string format_scientific(double value);

/// K across the columns, one row per (beta, eta) pair.
std::string format_k_table(const SweepResult& result);

/// One table per K: rows beta, columns eta, cells "return (beta x eta)".
std::string format_beta_eta_table(const SweepResult& result);

/// k,beta,eta,beta_times_eta,final_mean_return,final_std_return,failed_seeds,status
std::string format_sweep_csv(const SweepResult& result);

}  // namespace crl::runner
