#include "crl/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace crl::runner {
namespace {

std::string format_general(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string format_return(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

template <typename T>
std::vector<T> unique_in_order(std::vector<T> values) {
  std::vector<T> out;
  for (const auto& v : values) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

const SweepCell* find_cell(const SweepResult& result, std::size_t k, double beta, double eta) {
  for (const auto& c : result.cells) {
    if (c.key.k == k && c.key.beta == beta && c.key.eta == eta) return &c;
  }
  return nullptr;
}

std::string cell_value(const SweepCell* cell) {
  if (!cell) return "-";
  if (!cell->ok) return "failed";
  return format_return(cell->final_mean_return);
}

}  // namespace

void SweepSpec::validate() const {
  if (ks.empty()) throw ConfigError("sweep.clusters: grid must be non-empty");
  if (betas.empty()) throw ConfigError("sweep.beta: grid must be non-empty");
  if (etas.empty()) throw ConfigError("sweep.eta: grid must be non-empty");
  for (const auto k : ks) {
    if (k < 1) throw ConfigError("sweep.clusters: values must be >= 1");
  }
  for (const auto b : betas) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw ConfigError("sweep.beta: values must be finite and >= 0");
  }
  for (const auto e : etas) {
    if (!(e >= 0.0) || !std::isfinite(e)) throw ConfigError("sweep.eta: values must be finite and >= 0");
  }
  base.validate();
}

std::vector<SweepCellKey> sweep_grid(const SweepSpec& spec) {
  std::vector<SweepCellKey> cells;
  for (const auto k : spec.ks) {
    for (const auto beta : spec.betas) {
      for (const auto eta : spec.etas) {
        const SweepCellKey key{k, beta, eta};
        if (std::find(cells.begin(), cells.end(), key) == cells.end()) cells.push_back(key);
      }
    }
  }
  return cells;
}

std::string cell_name(const SweepCellKey& key) {
  return "K" + std::to_string(key.k) + "_beta" + format_general(key.beta) + "_eta" + format_general(key.eta);
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  SweepResult result;
  for (const auto& key : sweep_grid(spec)) {
    SweepCell cell;
    cell.key = key;
    cell.beta_times_eta = key.beta * key.eta;
    try {
      ExperimentConfig cfg = spec.base;
      cfg.name = spec.base.name + "/" + cell_name(key);
      cfg.bonus.kind = BonusKind::Crl;
      cfg.bonus.crl.k = key.k;
      cfg.bonus.crl.beta = key.beta;
      cfg.bonus.crl.eta = key.eta;
      if (!spec.base.output_dir.empty()) cfg.output_dir = spec.base.output_dir / cell_name(key);
      const auto run = run_experiment(cfg);
      cell.failed_seeds = run.failed_seeds();
      cell.curves = run.curves;
      if (run.mean_return.empty()) {
        cell.ok = false;
        cell.error = "all seeds failed";
      } else {
        cell.final_mean_return = run.mean_return.back();
        cell.final_std_return = run.std_return.back();
      }
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
    }
    result.cells.push_back(std::move(cell));
  }
  return result;
}

std::string format_scientific(double value) {
  if (value == 0.0) return "0";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6e", value);
  std::string s(buf);
  const auto e = s.find('e');
  std::string mantissa = s.substr(0, e);
  std::string exponent = s.substr(e + 1);
  if (mantissa.find('.') != std::string::npos) {
    while (mantissa.back() == '0') mantissa.pop_back();
    if (mantissa.back() == '.') mantissa.pop_back();
  }
  const bool negative = exponent.front() == '-';
  std::size_t first = 1;
  while (first + 1 < exponent.size() && exponent[first] == '0') ++first;
  return mantissa + "e" + (negative ? "-" : "") + exponent.substr(first);
}

std::string format_k_table(const SweepResult& result) {
  std::vector<std::size_t> ks;
  std::vector<std::pair<double, double>> rows;
  for (const auto& c : result.cells) {
    ks.push_back(c.key.k);
    rows.emplace_back(c.key.beta, c.key.eta);
  }
  ks = unique_in_order(ks);
  rows = unique_in_order(rows);

  std::ostringstream out;
  out << "| K |";
  for (const auto k : ks) out << ' ' << k << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < ks.size(); ++i) out << "---|";
  out << '\n';
  for (const auto& [beta, eta] : rows) {
    out << "| beta=" << format_general(beta) << ", eta=" << format_general(eta) << " |";
    for (const auto k : ks) out << ' ' << cell_value(find_cell(result, k, beta, eta)) << " |";
    out << '\n';
  }
  return out.str();
}

std::string format_beta_eta_table(const SweepResult& result) {
  std::vector<std::size_t> ks;
  std::vector<double> betas;
  std::vector<double> etas;
  for (const auto& c : result.cells) {
    ks.push_back(c.key.k);
    betas.push_back(c.key.beta);
    etas.push_back(c.key.eta);
  }
  ks = unique_in_order(ks);
  betas = unique_in_order(betas);
  etas = unique_in_order(etas);

  std::ostringstream out;
  for (std::size_t t = 0; t < ks.size(); ++t) {
    if (t > 0) out << '\n';
    out << "K = " << ks[t] << " (cell: final return (beta x eta))\n\n";
    out << "| beta \\ eta |";
    for (const auto eta : etas) out << ' ' << format_general(eta) << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < etas.size(); ++i) out << "---|";
    out << '\n';
    for (const auto beta : betas) {
      out << "| " << format_general(beta) << " |";
      for (const auto eta : etas) {
        const auto* cell = find_cell(result, ks[t], beta, eta);
        out << ' ' << cell_value(cell);
        if (cell && eta != 0.0) out << " (" << format_scientific(beta * eta) << ')';
        out << " |";
      }
      out << '\n';
    }
  }
  return out.str();
}

std::string format_sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "k,beta,eta,beta_times_eta,final_mean_return,final_std_return,failed_seeds,status\n";
  for (const auto& c : result.cells) {
    char line[256];
    std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g,%s,%.17g,%.17g,%zu,%s\n", c.key.k, c.key.beta, c.key.eta,
                  format_scientific(c.beta_times_eta).c_str(), c.final_mean_return, c.final_std_return,
                  c.failed_seeds, c.ok ? "ok" : "failed");
    out << line;
  }
  return out.str();
}

}  // namespace crl::runner
