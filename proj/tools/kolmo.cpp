#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "kolmo/parallel.hpp"

namespace {

namespace fs = std::filesystem;
using namespace kolmo;
using namespace kolmo::cli;

enum Exit { ok = 0, failed = 1, usage = 2, runtime = 3 };

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--scales", "not a number: '" + item + "'");
    }
  }
  return out;
}

std::vector<TensorKind> parse_projections(const std::string& s) {
  std::vector<TensorKind> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(parse_tensor_kind(item));
    } catch (const Error&) {
      throw ConfigError("--projections", "expected I, L or T, got '" + item + "'");
    }
  }
  return out;
}

RunConfig load(const std::string& path, const std::optional<std::uint64_t>& seed) {
  RunConfig c = load_config(path);
  if (seed && c.initial.kind == InitSpec::Kind::random) {
    c.initial.seed = *seed;
    c.echo["init"]["seed"] = *seed;
  }
  if (c.threads > 0) set_thread_count(c.threads);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-flux structure functions, balance residuals and inviscid-limit sweeps for periodic Navier-Stokes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", KOLMO_VERSION);

  int threads = 0;
  std::optional<std::uint64_t> seed;
  app.add_option("--threads", threads, "worker threads (default: hardware concurrency)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "override init.seed for random initial data");

  std::string config, out, scales, projections, ell;
  bool force = false, resume = false, all_flux = false;

  auto* simulate = app.add_subcommand("simulate", "integrate a run and write its directory");
  simulate->add_option("--config", config, "YAML run configuration")->required();
  simulate->add_option("--out", out, "run directory")->required();
  simulate->add_flag("--force", force, "replace an existing directory");
  simulate->add_flag("--resume", resume, "continue a partial run from its last snapshot");

  std::string run_dir;
  auto* analyze = app.add_subcommand("analyze", "structure functions and flux fields of a run");
  analyze->add_option("run", run_dir, "run directory")->required();
  analyze->add_option("--scales", scales, "comma-separated scales in (0, pi/2]");
  analyze->add_option("--projections", projections, "comma-separated subset of I,L,T");
  analyze->add_option("--out", out, "output directory (default: <run>/analysis)");
  analyze->add_flag("--all-flux", all_flux, "write flux densities for every snapshot");

  auto* balance = app.add_subcommand("balance", "global energy balance and remainder audit of a run");
  balance->add_option("run", run_dir, "run directory")->required();
  balance->add_option("--ell", ell, "comma-separated scales in (0, pi/2]");
  balance->add_option("--out", out, "output directory (default: <run>/balance)");

  auto* sweep = app.add_subcommand("sweep", "viscosity sweep of the flux residual");
  sweep->add_option("--config", config, "YAML configuration with a sweep section")->required();
  sweep->add_option("--out", out, "sweep directory")->required();
  sweep->add_flag("--force", force, "replace an existing directory");
  sweep->add_flag("--resume", resume, "reuse complete runs and continue partial ones");

  VerifyOptions vopts;
  std::vector<std::string> suites;
  auto* verify = app.add_subcommand("verify", "invariant suites with a JSON pass/fail report");
  verify->add_option("--suite", suites, "tensors, kernels, identity (default: all)");
  verify->add_option("--out", out, "write the report here as well as to stdout");
  verify->add_option("--perturb-ct", vopts.perturb_ct, "relative perturbation of C_T")->group("");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) set_thread_count(threads);

  try {
    if (*simulate) {
      cmd_simulate(load(config, seed), out, SimulateOptions{force, resume}, std::cout);
    } else if (*analyze) {
      AnalyzeOptions o;
      if (!scales.empty()) o.scales = parse_list(scales);
      if (!projections.empty()) o.projections = parse_projections(projections);
      o.out = out;
      o.all_flux_fields = all_flux;
      return cmd_analyze(run_dir, o, std::cout).pass ? ok : failed;
    } else if (*balance) {
      BalanceOptions o;
      if (!ell.empty()) o.ell = parse_list(ell);
      o.out = out;
      cmd_balance(run_dir, o, std::cout);
    } else if (*sweep) {
      const SweepReport r = cmd_sweep(load(config, seed), out, SweepOptions{force, resume}, std::cout);
      for (const auto& row : r.rows) std::cout << "nu=" << row.nu << " trend over ell_I: " << row.trend_over_ell_I << "\n";
    } else if (*verify) {
      if (!suites.empty()) vopts.suites = suites;
      if (seed) vopts.seed = *seed;
      const VerifyResult r = cmd_verify(vopts);
      const std::string text = r.report.dump(2) + "\n";
      std::cout << text;
      if (!out.empty()) write_text_atomic(out, text);
      return r.pass ? ok : failed;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return usage;
  } catch (const RunError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return runtime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return runtime;
  }
  return ok;
}
