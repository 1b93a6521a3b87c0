#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "kolmo/error.hpp"
#include "kolmo/field.hpp"

namespace kolmo::cli {

inline constexpr const char* kRunSchema = "kolmo.run/1";
inline constexpr const char* kEnergySchema = "kolmo.energy/1";

// A run directory is missing snapshots; `gaps` lists the absent steps.
class RunError : public Error {
 public:
  RunError(const std::string& what, std::vector<std::uint64_t> gaps = {})
      : Error(what), gaps_(std::move(gaps)) {}
  const std::vector<std::uint64_t>& gaps() const noexcept { return gaps_; }

 private:
  std::vector<std::uint64_t> gaps_;
};

struct SnapshotEntry {
  std::uint64_t step = 0;
  double time = 0.0;
  std::string file;   // relative to the run directory
  std::string force;  // empty when unforced
};

struct EnergyRow {
  std::uint64_t step = 0;
  double t = 0.0;
  double kinetic = 0.0;
  double work = 0.0;
  double dissipation = 0.0;
  double eps = 0.0;
};

std::string snapshot_name(std::uint64_t step);
std::string force_name(std::uint64_t step);

void write_text_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

std::string energy_csv(const std::vector<EnergyRow>& rows);
std::vector<EnergyRow> parse_energy_csv(const std::filesystem::path& path);

// Loaded, complete run directory.
struct Run {
  std::filesystem::path root;
  nlohmann::ordered_json manifest;
  RunConfig config;
  std::vector<SnapshotEntry> snapshots;
  std::vector<EnergyRow> energy;

  // Reads every snapshot (and forcing field when present) into memory.
  void load_fields(std::vector<Field>& u, std::vector<Field>& f) const;
};

// Throws RunError listing missing steps when a snapshot expected from the
// configured stride is absent from the manifest or from disk.
Run open_run(const std::filesystem::path& dir);

}  // namespace kolmo::cli
