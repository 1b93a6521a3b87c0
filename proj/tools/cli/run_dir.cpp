#include "run_dir.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "kolmo/field_io.hpp"

namespace kolmo::cli {

namespace fs = std::filesystem;

std::string snapshot_name(std::uint64_t step) { return fmt::format("snapshots/snap_{:06d}.fld", step); }
std::string force_name(std::uint64_t step) { return fmt::format("forces/force_{:06d}.fld", step); }

void write_text_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp.string(), "cannot open for writing");
    out << text;
    if (!out.flush()) throw IoError(tmp.string(), "write failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError(path.string(), "rename failed: " + ec.message());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string energy_csv(const std::vector<EnergyRow>& rows) {
  std::string s = "step,t,kinetic,work,dissipation,eps\n";
  for (const auto& r : rows) {
    s += fmt::format("{},{},{},{},{},{}\n", r.step, r.t, r.kinetic, r.work, r.dissipation, r.eps);
  }
  return s;
}

std::vector<EnergyRow> parse_energy_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || line != "step,t,kinetic,work,dissipation,eps") {
    throw FormatError(path.string() + ": unexpected header");
  }
  std::vector<EnergyRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    EnergyRow r;
    char c[5];
    std::istringstream ls(line);
    if (!(ls >> r.step >> c[0] >> r.t >> c[1] >> r.kinetic >> c[2] >> r.work >> c[3] >> r.dissipation >> c[4] >> r.eps)) {
      throw FormatError(path.string() + ": malformed row '" + line + "'");
    }
    rows.push_back(r);
  }
  return rows;
}

void Run::load_fields(std::vector<Field>& u, std::vector<Field>& f) const {
  u.clear();
  f.clear();
  for (const auto& s : snapshots) {
    u.push_back(read_field(root / s.file).field);
    if (!s.force.empty()) f.push_back(read_field(root / s.force).field);
  }
}

Run open_run(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw RunError(dir.string() + ": not a run directory (no manifest.json)");
  Run run;
  run.root = dir;
  try {
    run.manifest = nlohmann::ordered_json::parse(read_text(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  if (run.manifest.value("schema", "") != kRunSchema) throw FormatError(manifest_path.string() + ": unsupported schema");
  run.config = parse_config(run.manifest.at("config").dump());

  const std::uint64_t steps = run.config.solver.step_count();
  const auto stride = static_cast<std::uint64_t>(run.config.solver.snapshot_stride);
  std::set<std::uint64_t> listed;
  for (const auto& j : run.manifest.at("snapshots")) {
    SnapshotEntry e;
    e.step = j.at("step").get<std::uint64_t>();
    e.time = j.at("time").get<double>();
    e.file = j.at("file").get<std::string>();
    e.force = j.value("force", "");
    const bool present = fs::exists(dir / e.file) && (e.force.empty() || fs::exists(dir / e.force));
    if (present) {
      listed.insert(e.step);
      run.snapshots.push_back(e);
    }
  }
  std::vector<std::uint64_t> gaps;
  for (std::uint64_t s = 0; s <= steps; s += stride) {
    if (!listed.count(s)) gaps.push_back(s);
  }
  if (!gaps.empty() || run.manifest.value("status", "") != "complete") {
    std::string list;
    for (std::size_t i = 0; i < gaps.size() && i < 20; ++i) list += (i ? ", " : "") + std::to_string(gaps[i]);
    if (gaps.size() > 20) list += ", ...";
    std::string what = dir.string() + ": incomplete run";
    if (!gaps.empty()) what += "; missing snapshot steps: " + list;
    throw RunError(what, std::move(gaps));
  }
  run.energy = parse_energy_csv(dir / "energy.csv");
  return run;
}

}  // namespace kolmo::cli
