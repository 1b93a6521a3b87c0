#include <ostream>

#include <fmt/format.h>

#include "commands.hpp"
#include "kolmo/field_io.hpp"
#include "kolmo/parallel.hpp"

#ifndef KOLMO_VERSION
#define KOLMO_VERSION "unknown"
#endif

namespace kolmo::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

ordered_json base_manifest(const RunConfig& c) {
  ordered_json m;
  m["schema"] = kRunSchema;
  m["version"] = KOLMO_VERSION;
  m["status"] = "running";
  m["config"] = c.echo;
  m["steps"] = c.solver.step_count();
  m["energy"] = {{"file", "energy.csv"}, {"schema", kEnergySchema}};
  m["snapshots"] = ordered_json::array();
  return m;
}

}  // namespace

void cmd_simulate(const RunConfig& config, const fs::path& out, const SimulateOptions& opts, std::ostream& log) {
  const bool occupied = fs::exists(out) && !fs::is_empty(out);
  ordered_json manifest = base_manifest(config);
  std::vector<EnergyRow> rows;
  ResumeState resume;
  bool resuming = false;

  if (occupied && opts.resume && fs::exists(out / "manifest.json")) {
    const ordered_json old = ordered_json::parse(read_text(out / "manifest.json"));
    if (old.at("config") != config.echo) {
      throw ConfigError("", out.string() + ": configuration differs from the run being resumed");
    }
    if (old.value("status", "") == "complete") {
      log << "run already complete: " << out.string() << "\n";
      return;
    }
    // last snapshot present on disk with its energy row
    const std::vector<EnergyRow> old_rows =
        fs::exists(out / "energy.csv") ? parse_energy_csv(out / "energy.csv") : std::vector<EnergyRow>{};
    std::optional<SnapshotEntry> last;
    for (const auto& j : old.at("snapshots")) {
      SnapshotEntry e{j.at("step").get<std::uint64_t>(), j.at("time").get<double>(), j.at("file").get<std::string>(),
                      j.value("force", "")};
      const bool has_row = std::any_of(old_rows.begin(), old_rows.end(), [&](const EnergyRow& r) { return r.step == e.step; });
      if (!fs::exists(out / e.file) || !has_row) break;
      last = e;
      manifest["snapshots"].push_back(j);
    }
    if (last) {
      for (const auto& r : old_rows) {
        if (r.step <= last->step) rows.push_back(r);
      }
      resume.velocity = read_field(out / last->file).field;
      resume.step = last->step;
      resume.kinetic0 = rows.front().kinetic;
      resume.work = rows.back().work;
      resume.dissipation = rows.back().dissipation;
      resuming = true;
      log << "resuming " << out.string() << " from step " << last->step << "\n";
    } else {
      manifest["snapshots"] = ordered_json::array();
    }
  } else if (occupied && opts.force) {
    fs::remove_all(out);
  } else if (occupied) {
    throw RunError(out.string() + ": directory exists and is not empty; pass --force to replace it or --resume to continue");
  }

  fs::create_directories(out / "snapshots");
  if (config.forcing.kind != ForcingSpec::Kind::none) fs::create_directories(out / "forces");
  write_text_atomic(out / "manifest.json", manifest.dump(2) + "\n");

  const Field initial = resuming ? resume.velocity : make_initial(config.grid, config.initial, config.solver.dealias_fraction);
  std::uint64_t pending_step = 0;
  double pending_time = 0.0;
  auto sink = [&](const Field& u, const Field* f, std::uint64_t step) {
    ordered_json entry;
    entry["step"] = step;
    entry["time"] = u.time();
    entry["file"] = snapshot_name(step);
    write_field(out / snapshot_name(step), u, config.solver.nu);
    if (f) {
      write_field(out / force_name(step), *f, config.solver.nu);
      entry["force"] = force_name(step);
    }
    manifest["snapshots"].push_back(entry);
    pending_step = step;
    pending_time = u.time();
  };
  auto progress = [&](const EnergySeries& e) {
    rows.push_back({pending_step, pending_time, e.kinetic.back(), e.work.back(), e.dissipation.back(), e.eps.back()});
    // energy rows first, so every listed snapshot has its row
    write_text_atomic(out / "energy.csv", energy_csv(rows));
    write_text_atomic(out / "manifest.json", manifest.dump(2) + "\n");
    log << fmt::format("step {} t={} E={:.12e} eps={:.6e}\n", pending_step, pending_time, rows.back().kinetic,
                       rows.back().eps);
  };
  const EnergySeries e =
      run(config.grid, config.solver, initial, config.forcing, sink, resuming ? &resume : nullptr, progress);

  manifest["status"] = "complete";
  manifest["threads"] = thread_count();
  manifest["dissipation_gap"] = e.dissipation_gap;
  write_text_atomic(out / "manifest.json", manifest.dump(2) + "\n");
  log << "wrote " << manifest["snapshots"].size() << " snapshots to " << out.string() << "\n";
}

}  // namespace kolmo::cli
