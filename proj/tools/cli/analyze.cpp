#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "commands.hpp"
#include "kolmo/balance.hpp"
#include "kolmo/sphere_rule.hpp"
#include "kolmo/structure.hpp"

namespace kolmo::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::vector<double> checked_scales(std::vector<double> scales, const std::string& key) {
  for (double l : scales) {
    if (!(l > 0.0 && l <= std::numbers::pi / 2 + 1e-15)) {
      throw ConfigError(key, fmt::format("scale {} must lie in (0, pi/2]", l));
    }
  }
  std::sort(scales.begin(), scales.end());
  scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
  return scales;
}

RuleProvider rule_provider(int order) {
  if (order <= 0) return default_rule;
  return [order](const Grid& g, double) { return sphere_rule(g.dim(), order); };
}

}  // namespace

AnalyzeResult cmd_analyze(const fs::path& run_dir, const AnalyzeOptions& opts, std::ostream& log) {
  const Run run = open_run(run_dir);
  const RunConfig& c = run.config;
  std::vector<double> scales = opts.scales ? *opts.scales : c.analysis.scales;
  scales = checked_scales(scales.empty() ? default_scales(c.grid) : scales, opts.scales ? "--scales" : "analysis.scales");
  if (scales.empty()) throw ConfigError("analysis.scales", "no scale >= 4h on this grid");
  const std::vector<TensorKind> projections = opts.projections ? *opts.projections : c.analysis.projections;

  std::vector<Field> u, f;
  run.load_fields(u, f);
  const RuleProvider rules = rule_provider(c.analysis.sphere_order);
  const StructureAnalysis a = analyze_structure(u, scales, rules);

  AnalyzeResult result;
  result.out = opts.out.empty() ? run_dir / "analysis" : opts.out;
  fs::create_directories(result.out / "flux");

  std::vector<StructureTable> selected;
  for (auto k : projections) selected.push_back(a.tables[static_cast<int>(k)]);
  write_structure_csv(result.out / "structure.csv", selected);

  std::string residual_csv = "t,ell,residual\n";
  for (std::size_t t = 0; t < u.size(); ++t) {
    for (std::size_t s = 0; s < scales.size(); ++s) {
      const double r = a.residuals[t * scales.size() + s];
      result.max_residual = std::max(result.max_residual, r);
      residual_csv += fmt::format("{},{},{}\n", u[t].time(), scales[s], r);
      log << fmt::format("t={} ell={} identity residual {:.3e}{}\n", u[t].time(), scales[s], r,
                         r <= kIdentityTolerance ? "" : "  FAIL");
    }
  }
  write_text_atomic(result.out / "residuals.csv", residual_csv);

  std::vector<FluxField> fluxes;
  ordered_json flux_files = ordered_json::array();
  const std::size_t first = opts.all_flux_fields ? 0 : u.size() - 1;
  for (std::size_t t = first; t < u.size(); ++t) {
    for (std::size_t s = 0; s < scales.size(); ++s) {
      const auto all = flux_fields_sphere(u[t], scales[s], rules(c.grid, scales[s]));
      for (auto k : projections) {
        const FluxField& ff = all[static_cast<int>(k)];
        const std::string file =
            fmt::format("flux/flux_{}_{:06d}_ell{}.fld", name(k), run.snapshots[t].step, s);
        write_flux_field(result.out / file, ff);
        flux_files.push_back({{"projection", std::string(name(k))},
                              {"step", run.snapshots[t].step},
                              {"ell", scales[s]},
                              {"file", file}});
        fluxes.push_back(ff);
      }
    }
  }
  write_flux_csv(result.out / "flux.csv", fluxes);

  result.pass = result.max_residual <= kIdentityTolerance;
  ordered_json j;
  j["schema"] = "kolmo.analysis/1";
  j["snapshots"] = u.size();
  j["scales"] = scales;
  j["projections"] = ordered_json::array();
  for (auto k : projections) j["projections"].push_back(std::string(name(k)));
  j["rules"] = a.tables[0].rule_labels;
  j["identity_tolerance"] = kIdentityTolerance;
  j["max_identity_residual"] = result.max_residual;
  j["pass"] = result.pass;
  j["files"] = {{"structure", "structure.csv"}, {"residuals", "residuals.csv"}, {"flux_means", "flux.csv"}};
  j["flux_fields"] = flux_files;
  write_text_atomic(result.out / "analysis.json", j.dump(2) + "\n");
  log << fmt::format("max identity residual {:.3e} ({})\n", result.max_residual, result.pass ? "pass" : "FAIL");
  return result;
}

ordered_json cmd_balance(const fs::path& run_dir, const BalanceOptions& opts, std::ostream& log) {
  const Run run = open_run(run_dir);
  const RunConfig& c = run.config;
  std::vector<double> ell = opts.ell ? *opts.ell : c.balance.ell;
  if (ell.empty()) ell = {std::numbers::pi / 8};
  ell = checked_scales(ell, opts.ell ? "--ell" : "balance.ell");

  std::vector<Field> u, f;
  run.load_fields(u, f);
  const fs::path out = opts.out.empty() ? run_dir / "balance" : opts.out;
  fs::create_directories(out);
  const RuleProvider rules = rule_provider(c.analysis.sphere_order);
  const EnergySeries energy = epsilon_series(u, f, c.solver.nu);

  ordered_json j;
  j["schema"] = "kolmo.balance-run/1";
  j["projection"] = std::string(name(c.balance.projection));
  j["energy_quadrature_error"] = energy.quadrature_error;
  j["reports"] = ordered_json::array();
  j["audits"] = ordered_json::array();
  j["series"] = ordered_json::array();
  std::vector<BalanceReport> reports;
  std::string series_csv = "ell,t,structure,R\n";
  for (double l : ell) {
    const SphereRule rule = rules(c.grid, l);
    reports.push_back(global_balance_residual(u, f, c.solver.nu, l, rule));
    j["reports"].push_back(reports.back().to_json());
    j["audits"].push_back(remainder_bound_audit(u, f, c.solver.nu, l, c.balance.alpha).to_json());
    std::vector<double> s;
    for (const auto& v : u) s.push_back(structure_function(v, c.balance.projection, l, rule));
    const FluxSeries fs_ = flux_series(energy, s, l);
    for (std::size_t i = 0; i < fs_.times.size(); ++i) {
      series_csv += fmt::format("{},{},{},{}\n", l, fs_.times[i], fs_.structure[i], fs_.residual[i]);
    }
    j["series"].push_back({{"ell", l}, {"times", fs_.times}, {"structure", fs_.structure}, {"R", fs_.residual}});
    log << fmt::format("ell={} global balance residual {:.3e} (flux {:.6e}, eps {:.6e})\n", l,
                       reports.back().residual, reports.back().flux_term, reports.back().epsilon);
  }
  write_balance_csv(out / "balance.csv", reports);
  write_text_atomic(out / "series.csv", series_csv);
  write_text_atomic(out / "balance.json", j.dump(2) + "\n");
  return j;
}

}  // namespace kolmo::cli
