#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "cli/commands.hpp"
#include "kolmo/balance.hpp"
#include "kolmo/field_io.hpp"
#include "kolmo/structure.hpp"

using namespace kolmo;
using namespace kolmo::cli;
namespace fs = std::filesystem;

namespace {

const char* kTaylorGreen = R"(
grid: {dim: 2, n: 32}
solver: {nu: 0.05, dt: 0.01, t_end: 0.2, snapshot_stride: 5}
init: {kind: taylor_green}
analysis: {scales: [0.4, 0.8]}
)";

const char* kRandom = R"(
grid: {dim: 2, n: 32}
solver: {nu: 0.02, dt: 0.01, t_end: 0.2, snapshot_stride: 4}
init: {kind: random, seed: 11, kmax: 6}
forcing:
  kind: modes
  modes:
    - {k: [1, 0], amplitude: [0, 0.4], omega: 2}
analysis: {scales: [0.5]}
)";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "kolmo_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

std::string key_path_of(const std::string& yaml) {
  try {
    parse_config(yaml);
  } catch (const ConfigError& e) {
    return e.key_path();
  }
  return "<accepted>";
}

std::string with(const std::string& base, const std::string& from, const std::string& to) {
  std::string s = base;
  const auto at = s.find(from);
  REQUIRE(at != std::string::npos);
  return s.replace(at, from.size(), to);
}

std::size_t file_count(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) n += e.is_regular_file();
  return n;
}

std::vector<std::vector<double>> csv_numbers(const fs::path& p) {
  std::istringstream in(read_text(p));
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end != cell.c_str()) row.push_back(v);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("config schema") {
  const RunConfig c = parse_config(kTaylorGreen);
  CHECK(c.grid.n() == 32);
  CHECK(c.solver.step_count() == 20);
  CHECK(c.analysis.scales.size() == 2);
  CHECK(c.echo["solver"]["dt"] == 0.01);

  CHECK(key_path_of(with(kTaylorGreen, "dt: 0.01", "dt: 0")) == "solver.dt");
  CHECK(key_path_of(with(kTaylorGreen, "dt: 0.01", "dt: -1")) == "solver.dt");
  CHECK(key_path_of(with(kTaylorGreen, "dt: 0.01", "dt: fast")) == "solver.dt");
  CHECK(key_path_of(with(kTaylorGreen, "dt: 0.01", "dt_s: 0.01")) == "solver.dt");  // missing
  CHECK(key_path_of(with(kTaylorGreen, "nu: 0.05", "nu: 0.05, viscosity: 1")) == "solver.viscosity");
  CHECK(key_path_of(std::string(kTaylorGreen) + "extra: 1\n") == "extra");
  CHECK(key_path_of(with(kTaylorGreen, "snapshot_stride: 5", "snapshot_stride: 3")) == "solver.snapshot_stride");
  CHECK(key_path_of(with(kTaylorGreen, "n: 32", "n: 48")) == "grid.n");
  CHECK(key_path_of(with(kTaylorGreen, "[0.4, 0.8]", "[0.4, 2.0]")) == "analysis.scales[1]");
  CHECK(key_path_of(with(kRandom, "k: [1, 0]", "k: [1, 0, 0]")) == "forcing.modes[0].k");
  CHECK(key_path_of(with(kRandom, "omega: 2", "omega: 2, phi: 1")) == "forcing.modes[0].phi");
}

TEST_CASE("sweep section and the length-scale exponent") {
  const std::string base = std::string(kTaylorGreen) + "sweep: {nu: [0.01, 0.005], alpha: 0.5, L: 0.9, ell_I: [1.0, 0.5]}\n";
  const RunConfig c = parse_config(base);
  REQUIRE(c.sweep);
  CHECK(*c.sweep->alpha == 0.5);
  CHECK(key_path_of(with(base, "L: 0.9", "L: 1.0")) == "sweep.L");
  CHECK(key_path_of(with(base, "L: 0.9", "L: 1.2")) == "sweep.L");
  CHECK(key_path_of(with(base, "alpha: 0.5, L: 0.9", "alpha: 0.75, L: 1.9")) == "<accepted>");
  CHECK(key_path_of(with(base, "alpha: 0.5, L: 0.9", "alpha: 0.75, L: 2.0")) == "sweep.L");
  CHECK(key_path_of(with(base, "[0.01, 0.005]", "[0.005, 0.01]")) == "sweep.nu");
  CHECK(key_path_of(with(base, "[1.0, 0.5]", "[0.5, 0.5]")) == "sweep.ell_I");
  CHECK(key_path_of(with(base, "alpha: 0.5", "alpha: measured")) == "<accepted>");
  CHECK(!parse_config(with(base, "alpha: 0.5", "alpha: measured")).sweep->alpha);
  CHECK_THROWS_AS(check_length_exponent(2.0, 0.75), ConfigError);
  CHECK_NOTHROW(check_length_exponent(5.0, 1.0));
}

TEST_CASE("simulate writes a complete run directory") {
  const fs::path out = scratch("tg");
  std::ostringstream log;
  const RunConfig c = parse_config(kTaylorGreen);
  cmd_simulate(c, out, {}, log);
  CHECK(file_count(out) == 2 + 5);  // manifest, energy, snapshots at steps 0, 5, ..., 20
  const Run run = open_run(out);
  CHECK(run.snapshots.size() == 5);
  CHECK(run.energy.size() == 5);
  CHECK(run.snapshots.back().time == doctest::Approx(0.2));
  // TG energy decays as e^{-4 nu t}
  CHECK(run.energy.back().kinetic == doctest::Approx(run.energy.front().kinetic * std::exp(-4 * 0.05 * 0.2)).epsilon(1e-10));

  CHECK_THROWS_AS(cmd_simulate(c, out, {}, log), RunError);
  CHECK_NOTHROW(cmd_simulate(c, out, SimulateOptions{true, false}, log));
  CHECK(file_count(out) == 7);
}

TEST_CASE("forced random run: determinism, resume and energy bookkeeping") {
  const RunConfig c = parse_config(kRandom);
  std::ostringstream log;
  const fs::path a = scratch("rand_a"), b = scratch("rand_b");
  cmd_simulate(c, a, {}, log);
  cmd_simulate(c, b, {}, log);
  CHECK(file_count(a) == 2 + 6 + 6);
  const Run ra = open_run(a);
  for (const auto& s : ra.snapshots) {
    CHECK(read_text(a / s.file) == read_text(b / s.file));
    CHECK(read_text(a / s.force) == read_text(b / s.force));
  }
  CHECK(read_text(a / "energy.csv") == read_text(b / "energy.csv"));

  // the energy series written by the run agrees with the snapshot quadrature
  std::vector<Field> u, f;
  ra.load_fields(u, f);
  const EnergySeries e = epsilon_series(u, f, c.solver.nu);
  for (std::size_t i = 0; i < u.size(); ++i) {
    CHECK(std::abs(ra.energy[i].kinetic - e.kinetic[i]) <= 1e-12);
    CHECK(std::abs(ra.energy[i].eps - ra.energy[i].dissipation) <= 1e-6);  // RK4 truncation at dt = 0.01
  }

  SUBCASE("resume after losing the tail") {
    nlohmann::ordered_json m = nlohmann::ordered_json::parse(read_text(b / "manifest.json"));
    m["status"] = "running";
    for (int k = 0; k < 2; ++k) {
      fs::remove(b / m["snapshots"].back()["file"].get<std::string>());
      m["snapshots"].erase(m["snapshots"].size() - 1);
    }
    write_text_atomic(b / "manifest.json", m.dump(2));
    CHECK_THROWS_AS(open_run(b), RunError);
    cmd_simulate(c, b, SimulateOptions{false, true}, log);
    const Run rb = open_run(b);
    REQUIRE(rb.snapshots.size() == ra.snapshots.size());
    const Field ua = read_field(a / ra.snapshots.back().file).field;
    const Field ub = read_field(b / rb.snapshots.back().file).field;
    double diff = 0.0;
    for (std::size_t i = 0; i < ua.data().size(); ++i) diff = std::max(diff, std::abs(ua.data()[i] - ub.data()[i]));
    CHECK(diff <= 1e-13);
    CHECK(rb.energy.size() == ra.energy.size());
    CHECK(std::abs(rb.energy.back().work - ra.energy.back().work) <= 1e-13);
  }
  SUBCASE("resume refuses a changed configuration") {
    const RunConfig other = parse_config(with(kRandom, "nu: 0.02", "nu: 0.03"));
    CHECK_THROWS_AS(cmd_simulate(other, b, SimulateOptions{false, true}, log), ConfigError);
  }
}

TEST_CASE("golden energy and structure tables") {
  const fs::path golden = fs::path(KOLMO_GOLDEN_DIR);
  const fs::path out = scratch("golden");
  std::ostringstream log;
  cmd_simulate(parse_config(kRandom), out, {}, log);
  cmd_analyze(out, {}, log);
  for (const auto& [produced, expected] : {std::pair{out / "energy.csv", golden / "random_energy.csv"},
                                           std::pair{out / "analysis" / "structure.csv", golden / "random_structure.csv"}}) {
    if (std::getenv("KOLMO_UPDATE_GOLDEN")) fs::copy_file(produced, expected, fs::copy_options::overwrite_existing);
    const auto a = csv_numbers(produced), b = csv_numbers(expected);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      REQUIRE(a[i].size() == b[i].size());
      for (std::size_t k = 0; k < a[i].size(); ++k) {
        CHECK(std::abs(a[i][k] - b[i][k]) <= 1e-12 * std::max(1.0, std::abs(b[i][k])));
      }
    }
    CHECK(read_text(produced).substr(0, read_text(produced).find('\n')) ==
          read_text(expected).substr(0, read_text(expected).find('\n')));
  }
}

TEST_CASE("analyze") {
  const fs::path out = scratch("tg_analyze");
  std::ostringstream log;
  cmd_simulate(parse_config(kTaylorGreen), out, {}, log);
  const AnalyzeResult r = cmd_analyze(out, {}, log);
  CHECK(r.pass);
  CHECK(r.max_residual <= 1e-10);
  const auto rows = csv_numbers(r.out / "structure.csv");
  CHECK(rows.size() == 5 * 2 * 3);
  for (const auto& row : rows) {
    for (double v : row) CHECK(std::isfinite(v));
  }
  CHECK(log.str().find("identity residual") != std::string::npos);

  SUBCASE("byte-identical reruns") {
    std::map<std::string, std::string> first;
    for (const auto& e : fs::recursive_directory_iterator(r.out)) {
      if (e.is_regular_file()) first[e.path().string()] = read_text(e.path());
    }
    cmd_analyze(out, {}, log);
    std::size_t compared = 0;
    for (const auto& e : fs::recursive_directory_iterator(r.out)) {
      if (!e.is_regular_file()) continue;
      CHECK(first.at(e.path().string()) == read_text(e.path()));
      ++compared;
    }
    CHECK(compared == first.size());
    CHECK(compared == 4 + 6);
  }
  SUBCASE("scales outside (0, pi/2] are rejected by value") {
    AnalyzeOptions o;
    o.scales = std::vector<double>{0.5, 1.7};
    try {
      cmd_analyze(out, o, log);
      FAIL("expected rejection");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("1.7") != std::string::npos);
    }
    o.scales = std::vector<double>{0.0};
    CHECK_THROWS_AS(cmd_analyze(out, o, log), ConfigError);
  }
  SUBCASE("missing snapshots are listed") {
    fs::remove(out / snapshot_name(5));
    fs::remove(out / snapshot_name(15));
    try {
      cmd_analyze(out, {}, log);
      FAIL("expected RunError");
    } catch (const RunError& e) {
      CHECK(e.gaps() == std::vector<std::uint64_t>{5, 15});
      CHECK(std::string(e.what()).find("5, 15") != std::string::npos);
    }
  }
}

TEST_CASE("balance") {
  const fs::path out = scratch("tg_balance");
  std::ostringstream log;
  cmd_simulate(parse_config(kTaylorGreen), out, {}, log);
  BalanceOptions o;
  o.ell = std::vector<double>{0.4};
  const auto j = cmd_balance(out, o, log);
  CHECK(j["schema"] == "kolmo.balance-run/1");
  REQUIRE(j["reports"].size() == 1);
  CHECK(std::abs(j["reports"][0]["residual"].get<double>()) <= 1e-8);
  CHECK(fs::exists(out / "balance" / "balance.csv"));
  CHECK(fs::exists(out / "balance" / "series.csv"));
}

TEST_CASE("degenerate sweep matches analyze plus the energy series") {
  const std::string yaml = with(kRandom, "scales: [0.5]", "scales: [1.0]") +
                           "sweep: {nu: [0.02], alpha: 0.9, L: 0.25, ell_I: [1.0]}\n";
  const RunConfig c = parse_config(yaml);
  const fs::path out = scratch("sweep1");
  std::ostringstream log;
  const SweepReport r = cmd_sweep(c, out, {}, log);
  REQUIRE(r.rows.size() == 1);
  REQUIRE(r.rows[0].cells.size() == 1);  // 4h = 0.785 > 0.5
  CHECK(r.alpha_source == "supplied");
  CHECK_FALSE(r.rows[0].resolved);  // ell_D = 0.02^0.25 = 0.376 < 4h
  CHECK(!r.rows[0].warning.empty());
  CHECK(r.rows[0].trend_over_ell_I == "single");
  CHECK(fs::exists(out / "sweep.json"));
  CHECK(fs::exists(out / "sweep.csv"));

  const fs::path run = out / "runs" / "nu_0";
  const AnalyzeResult a = cmd_analyze(run, {}, log);
  const auto rows = csv_numbers(a.out / "structure.csv");  // t, ell, value rows of I then L then T
  const Run opened = open_run(run);
  std::vector<Field> u, f;
  opened.load_fields(u, f);
  const EnergySeries e = epsilon_series(u, f, 0.02);
  std::vector<double> s_over_l;
  for (std::size_t i = 0; i < u.size(); ++i) s_over_l.push_back(rows[i][2] / 1.0);
  const auto flux = cumulative_integral(s_over_l, 0.04);
  std::vector<double> absr;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double R = flux[i] + e.eps[i];
    CHECK(std::abs(R - r.rows[0].cells[0].residual[i]) <= 1e-12);
    absr.push_back(std::abs(R));
  }
  double l1 = 0.0;
  for (std::size_t i = 1; i < absr.size(); ++i) l1 += 0.02 * (absr[i] + absr[i - 1]);
  CHECK(r.rows[0].sup[0].value() == doctest::Approx(l1).epsilon(1e-12));

  CHECK_THROWS_AS(cmd_sweep(c, out, {}, log), RunError);
}

TEST_CASE("sweep bookkeeping and measured exponent") {
  const std::string yaml = std::string(kRandom) + "sweep: {nu: [0.02, 0.01], alpha: measured, L: 0.1, ell_I: [1.2, 0.6], uniform_in_time: true}\n";
  std::ostringstream log;
  const SweepReport r = cmd_sweep(parse_config(yaml), scratch("sweep2"), {}, log);
  CHECK(r.alpha_source == "measured");
  CHECK(r.alpha > 0.0);
  CHECK(r.alpha <= 1.0);
  CHECK(r.monotone_bookkeeping);
  REQUIRE(r.rows.size() == 2);
  for (const auto& row : r.rows) {
    CHECK(row.alpha_fit > 0.0);
    REQUIRE(row.sup.size() == 2);
    CHECK(*row.sup[1] <= *row.sup[0]);
    // uniform variant: the time norm is the sup of |R|
    for (const auto& cell : row.cells) {
      double m = 0.0;
      for (double v : cell.residual) m = std::max(m, std::abs(v));
      CHECK(cell.norm == m);
    }
  }
  CHECK(r.trend_over_nu.size() == 2);
  const auto j = r.to_json();
  CHECK(j["schema"] == "kolmo.sweep/1");
  CHECK(j["time_norm"] == "sup");
}

TEST_CASE("verify") {
  const VerifyResult a = cmd_verify({});
  CHECK(a.pass);
  CHECK(a.report.dump() == cmd_verify({}).report.dump());
  VerifyOptions bad;
  bad.perturb_ct = 1e-3;
  const VerifyResult b = cmd_verify(bad);
  CHECK_FALSE(b.pass);
  bool additivity_failed = false;
  for (const auto& s : b.report["suites"]) {
    for (const auto& c : s["checks"]) {
      if (c["name"].get<std::string>().rfind("additivity_constants_d", 0) == 0 && !c["pass"].get<bool>()) {
        additivity_failed = true;
      }
    }
  }
  CHECK(additivity_failed);
  VerifyOptions unknown;
  unknown.suites = {"nope"};
  CHECK_THROWS_AS(cmd_verify(unknown), ConfigError);
}
