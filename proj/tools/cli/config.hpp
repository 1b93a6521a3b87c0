#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kolmo/grid.hpp"
#include "kolmo/solver.hpp"
#include "kolmo/tensors.hpp"

namespace kolmo::cli {

struct AnalysisConfig {
  std::vector<double> scales;  // empty: default dyadic scales
  std::vector<TensorKind> projections{TensorKind::I, TensorKind::L, TensorKind::T};
  int sphere_order = 0;  // 0: per-scale default
};

struct BalanceConfig {
  std::vector<double> ell;
  TensorKind projection = TensorKind::I;
  double alpha = 0.5;  // for the remainder audit
};

struct SweepConfig {
  std::vector<double> nu;     // strictly decreasing
  std::optional<double> alpha;  // empty: measured from the runs
  double L = 0.0;
  std::vector<double> ell_I;  // strictly decreasing
  double p = 1.0;
  bool uniform_in_time = false;
  TensorKind projection = TensorKind::I;
};

struct RunConfig {
  Grid grid;
  SolverParams solver;
  InitSpec initial;
  ForcingSpec forcing;
  AnalysisConfig analysis;
  BalanceConfig balance;
  std::optional<SweepConfig> sweep;
  int threads = 0;  // 0: leave the default
  nlohmann::ordered_json echo;  // normalized config as parsed
};

// Parses YAML text. Unknown keys, wrong types and range violations throw
// ConfigError with the dotted key path. Relative file paths resolve against `base`.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base = {});
RunConfig load_config(const std::filesystem::path& path);

// L < 1 / (2 (1 - alpha)); alpha in (0, 1].
void check_length_exponent(double L, double alpha, const std::string& key_path = "sweep.L");

}  // namespace kolmo::cli
