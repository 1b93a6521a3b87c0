#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "run_dir.hpp"

namespace kolmo::cli {

struct SimulateOptions {
  bool force = false;   // replace an existing directory
  bool resume = false;  // continue a partial run from its last snapshot
};

// Writes manifest.json, snapshots/, forces/ (when forced) and energy.csv.
// Refuses a nonempty `out` unless force or resume is set.
void cmd_simulate(const RunConfig& config, const std::filesystem::path& out, const SimulateOptions& opts,
                  std::ostream& log);

struct AnalyzeOptions {
  std::optional<std::vector<double>> scales;  // overrides the run config
  std::optional<std::vector<TensorKind>> projections;
  std::filesystem::path out;  // default: <run>/analysis
  bool all_flux_fields = false;  // FLD1 flux densities for every snapshot, not just the last
};

inline constexpr double kIdentityTolerance = 1e-10;

struct AnalyzeResult {
  double max_residual = 0.0;
  bool pass = false;
  std::filesystem::path out;
};

AnalyzeResult cmd_analyze(const std::filesystem::path& run_dir, const AnalyzeOptions& opts, std::ostream& log);

struct BalanceOptions {
  std::optional<std::vector<double>> ell;
  std::filesystem::path out;  // default: <run>/balance
};

// Global balance, remainder audit and R(t) per scale. Diagnostic only.
nlohmann::ordered_json cmd_balance(const std::filesystem::path& run_dir, const BalanceOptions& opts,
                                   std::ostream& log);

struct SweepCell {
  double ell = 0.0;
  double norm = 0.0;  // L^p_t (or sup_t) norm of R
  std::vector<double> times;
  std::vector<double> residual;
};

struct SweepRow {
  double nu = 0.0;
  double ell_D = 0.0;
  double ell_floor = 0.0;  // max(ell_D, 4h)
  bool resolved = true;    // ell_D >= 4h
  std::string warning;
  double alpha_fit = 0.0;  // measured Besov exponent (min over snapshots), 0 when not measured
  std::vector<SweepCell> cells;      // lattice, decreasing ell
  std::vector<std::optional<double>> sup;  // per ell_I; empty when no resolved scale
  std::vector<std::optional<double>> argmax;
  std::string trend_over_ell_I;  // decreasing / non-increasing / non-monotone / single
};

struct SweepReport {
  SweepConfig params;
  double alpha = 0.0;
  std::string alpha_source;  // supplied / measured
  std::vector<SweepRow> rows;  // one per nu
  std::vector<std::string> trend_over_nu;  // per ell_I
  bool monotone_bookkeeping = true;

  nlohmann::ordered_json to_json() const;
  std::string csv() const;
};

struct SweepOptions {
  bool force = false;
  bool reuse = false;  // keep complete runs already present under <out>/runs
};

// Runs every nu of config.sweep (runs/nu_<i>/), then evaluates the sweep.
SweepReport cmd_sweep(const RunConfig& config, const std::filesystem::path& out, const SweepOptions& opts,
                      std::ostream& log);

// Evaluates a sweep over complete run directories, one per nu in order.
SweepReport evaluate_sweep(const SweepConfig& params, const std::vector<std::filesystem::path>& runs,
                           std::ostream& log);

struct VerifyOptions {
  std::vector<std::string> suites{"tensors", "kernels", "identity"};
  double perturb_ct = 0.0;  // relative perturbation of C_T (negative control)
  std::uint64_t seed = 20240611;
};

struct VerifyResult {
  nlohmann::ordered_json report;
  bool pass = false;
};

VerifyResult cmd_verify(const VerifyOptions& opts);

}  // namespace kolmo::cli
