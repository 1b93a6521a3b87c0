#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "commands.hpp"
#include "kolmo/balance.hpp"
#include "kolmo/besov.hpp"
#include "kolmo/spectral.hpp"
#include "kolmo/structure.hpp"

namespace kolmo::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string trend(const std::vector<std::optional<double>>& v) {
  std::vector<double> x;
  for (const auto& e : v) {
    if (e) x.push_back(*e);
  }
  if (x.size() < 2) return "single";
  bool strict = true;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (x[i] > x[i - 1]) return "non-monotone";
    strict = strict && x[i] < x[i - 1];
  }
  return strict ? "decreasing" : "non-increasing";
}

// Dyadic lattice ell_I[0] 2^-k together with the ell_I entries, restricted to
// [floor, ell_I[0]], decreasing.
std::vector<double> lattice(const std::vector<double>& ell_I, double floor) {
  std::vector<double> out;
  for (double l = ell_I.front(); l >= floor * (1 - 1e-12); l *= 0.5) out.push_back(l);
  for (double l : ell_I) {
    if (l >= floor * (1 - 1e-12)) out.push_back(l);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  out.erase(std::unique(out.begin(), out.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12 * a; }),
            out.end());
  return out;
}

double time_norm(const std::vector<double>& r, double dt, double p, bool uniform) {
  if (uniform) {
    double m = 0.0;
    for (double v : r) m = std::max(m, std::abs(v));
    return m;
  }
  std::vector<double> g(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) g[i] = std::pow(std::abs(r[i]), p);
  // trapezoid keeps the quadrature positive for the non-smooth |R|^p
  return std::pow(cumulative_integral(g, dt, TimeQuadrature::trapezoid).back(), 1.0 / p);
}

double measured_alpha(const std::vector<Field>& u) {
  const Grid& g = u.front().grid();
  double a = 1.0;
  for (std::size_t i = 1; i < u.size(); ++i) {
    const ExponentFit fit = fit_besov_exponent(forward_transform(u[i]), 4 * g.spacing(), std::numbers::pi / 4);
    a = std::min(a, fit.alpha);
  }
  return std::clamp(a, 1e-6, 1.0);
}

}  // namespace

SweepReport evaluate_sweep(const SweepConfig& params, const std::vector<fs::path>& runs, std::ostream& log) {
  if (runs.size() != params.nu.size()) throw InvalidArgument("evaluate_sweep: one run per nu required");
  SweepReport report;
  report.params = params;

  std::vector<Run> opened;
  std::vector<std::vector<Field>> velocities(runs.size()), forces(runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    opened.push_back(open_run(runs[i]));
    if (std::abs(opened[i].config.solver.nu - params.nu[i]) > 1e-15 * params.nu[i]) {
      throw ConfigError("sweep.nu", fmt::format("run {} has nu = {}, expected {}", runs[i].string(),
                                                opened[i].config.solver.nu, params.nu[i]));
    }
    opened[i].load_fields(velocities[i], forces[i]);
  }

  std::vector<double> fits(runs.size(), 0.0);
  if (params.alpha) {
    report.alpha = *params.alpha;
    report.alpha_source = "supplied";
  } else {
    report.alpha = 1.0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      fits[i] = measured_alpha(velocities[i]);
      report.alpha = std::min(report.alpha, fits[i]);
    }
    report.alpha_source = "measured";
    log << fmt::format("measured alpha = {:.4f}\n", report.alpha);
  }
  check_length_exponent(params.L, report.alpha);

  for (std::size_t i = 0; i < runs.size(); ++i) {
    const Run& run = opened[i];
    const Grid& g = run.config.grid;
    const std::vector<Field>& u = velocities[i];
    SweepRow row;
    row.nu = params.nu[i];
    row.alpha_fit = fits[i];
    row.ell_D = std::pow(row.nu, params.L);
    const double min_scale = 4 * g.spacing();
    row.resolved = row.ell_D >= min_scale;
    row.ell_floor = std::max(row.ell_D, min_scale);
    if (!row.resolved) {
      row.warning = fmt::format("ell_D = {:.6g} < 4h = {:.6g}; restricted to resolved scales", row.ell_D, min_scale);
      log << fmt::format("nu={}: {}\n", row.nu, row.warning);
    }
    const EnergySeries energy = epsilon_series(u, forces[i], row.nu);
    const double dt = snapshot_spacing(u, forces[i]);
    for (double l : lattice(params.ell_I, row.ell_floor)) {
      const SphereRule rule = default_rule(g, l);
      std::vector<double> s;
      for (const auto& v : u) s.push_back(structure_function(v, params.projection, l, rule));
      const FluxSeries series = flux_series(energy, s, l);
      SweepCell cell;
      cell.ell = l;
      cell.times = series.times;
      cell.residual = series.residual;
      cell.norm = time_norm(series.residual, dt, params.p, params.uniform_in_time);
      log << fmt::format("nu={} ell={:.6g} |R| = {:.6e}\n", row.nu, l, cell.norm);
      row.cells.push_back(std::move(cell));
    }
    for (double top : params.ell_I) {
      std::optional<double> best, where;
      for (const auto& cell : row.cells) {
        if (cell.ell <= top * (1 + 1e-12) && (!best || cell.norm > *best)) {
          best = cell.norm;
          where = cell.ell;
        }
      }
      row.sup.push_back(best);
      row.argmax.push_back(where);
    }
    // nested intervals: the sup can only shrink with ell_I
    for (std::size_t k = 1; k < row.sup.size(); ++k) {
      if (row.sup[k] && (!row.sup[k - 1] || *row.sup[k] > *row.sup[k - 1])) report.monotone_bookkeeping = false;
    }
    row.trend_over_ell_I = trend(row.sup);
    report.rows.push_back(std::move(row));
  }
  if (!report.monotone_bookkeeping) throw std::logic_error("sweep: sup over nested scale intervals is not monotone");

  for (std::size_t k = 0; k < params.ell_I.size(); ++k) {
    std::vector<std::optional<double>> column;
    for (const auto& r : report.rows) column.push_back(r.sup[k]);
    report.trend_over_nu.push_back(trend(column));
  }
  return report;
}

SweepReport cmd_sweep(const RunConfig& config, const fs::path& out, const SweepOptions& opts, std::ostream& log) {
  if (!config.sweep) throw ConfigError("sweep", "required section is missing");
  const SweepConfig& params = *config.sweep;
  if (fs::exists(out) && !fs::is_empty(out) && !opts.reuse) {
    if (!opts.force) throw RunError(out.string() + ": directory exists and is not empty; pass --force to replace it");
    fs::remove_all(out);
  }
  fs::create_directories(out / "runs");

  std::vector<fs::path> runs;
  for (std::size_t i = 0; i < params.nu.size(); ++i) {
    const fs::path dir = out / "runs" / fmt::format("nu_{}", i);
    RunConfig c = parse_config(config.echo.dump());
    c.solver.nu = params.nu[i];
    c.echo["solver"]["nu"] = params.nu[i];
    c.echo.erase("sweep");
    c.sweep.reset();
    log << fmt::format("run nu={} -> {}\n", params.nu[i], dir.string());
    cmd_simulate(c, dir, SimulateOptions{false, opts.reuse}, log);
    runs.push_back(dir);
  }
  SweepReport report = evaluate_sweep(params, runs, log);
  write_text_atomic(out / "sweep.json", report.to_json().dump(2) + "\n");
  write_text_atomic(out / "sweep.csv", report.csv());
  return report;
}

ordered_json SweepReport::to_json() const {
  ordered_json j;
  j["schema"] = "kolmo.sweep/1";
  j["projection"] = std::string(name(params.projection));
  j["alpha"] = alpha;
  j["alpha_source"] = alpha_source;
  j["L"] = params.L;
  j["p"] = params.p;
  j["time_norm"] = params.uniform_in_time ? "sup" : "Lp";
  j["ell_I"] = params.ell_I;
  j["monotone_bookkeeping"] = monotone_bookkeeping;
  j["trend_over_nu"] = trend_over_nu;
  j["note"] = "trend table only; no limit value is asserted";
  j["rows"] = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json e;
    e["nu"] = r.nu;
    e["ell_D"] = r.ell_D;
    e["ell_floor"] = r.ell_floor;
    e["resolved"] = r.resolved;
    if (!r.warning.empty()) e["warning"] = r.warning;
    if (alpha_source == "measured") e["alpha_fit"] = r.alpha_fit;
    e["sup"] = ordered_json::array();
    for (std::size_t k = 0; k < r.sup.size(); ++k) {
      e["sup"].push_back({{"ell_I", params.ell_I[k]},
                          {"value", r.sup[k] ? ordered_json(*r.sup[k]) : ordered_json(nullptr)},
                          {"argmax_ell", r.argmax[k] ? ordered_json(*r.argmax[k]) : ordered_json(nullptr)}});
    }
    e["trend_over_ell_I"] = r.trend_over_ell_I;
    e["cells"] = ordered_json::array();
    for (const auto& c : r.cells) {
      e["cells"].push_back({{"ell", c.ell}, {"norm", c.norm}, {"times", c.times}, {"R", c.residual}});
    }
    j["rows"].push_back(e);
  }
  return j;
}

std::string SweepReport::csv() const {
  std::string s = "nu,ell_I,ell_D,sup_norm,argmax_ell\n";
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.sup.size(); ++k) {
      s += fmt::format("{},{},{},{},{}\n", r.nu, params.ell_I[k], r.ell_D, r.sup[k] ? fmt::format("{}", *r.sup[k]) : "",
                       r.argmax[k] ? fmt::format("{}", *r.argmax[k]) : "");
    }
  }
  return s;
}

}  // namespace kolmo::cli
