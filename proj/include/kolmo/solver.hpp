#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "kolmo/balance.hpp"
#include "kolmo/field.hpp"

namespace kolmo {

enum class CflPolicy { abort, warn };

struct SolverParams {
  double nu = 0.0;
  double dt = 0.0;
  double t_end = 0.0;
  int snapshot_stride = 1;
  double dealias_fraction = 2.0 / 3.0;  // keep |k_a| <= fraction * n / 2
  bool integrating_factor = false;
  CflPolicy cfl_policy = CflPolicy::abort;
  double cfl_limit = 0.5;  // dt <= cfl_limit * h / max|u|
  int max_n_3d = 128;

  // Throws ConfigError naming the offending key ("solver.dt", ...).
  void validate(const Grid& grid) const;
  std::uint64_t step_count() const;  // round(t_end / dt)
};

// f(x, t) = sum_m a_m cos(k_m . x + phase_m + omega_m t)
struct ForcingMode {
  std::array<int, 3> k{0, 0, 0};
  Vec amplitude{0.0, 0.0, 0.0};
  double phase = 0.0;
  double omega = 0.0;
};

struct ForcingSpec {
  enum class Kind { none, modes, file };
  Kind kind = Kind::none;
  std::vector<ForcingMode> modes;
  std::vector<std::filesystem::path> files;  // FLD1 fields, increasing header times
};

struct InitSpec {
  enum class Kind { taylor_green, random, file };
  Kind kind = Kind::taylor_green;
  int mode = 1;  // Taylor-Green wavenumber
  double amplitude = 1.0;
  std::uint64_t seed = 0;
  int kmin = 1;  // random: shell |k| in [kmin, kmax]
  int kmax = 4;
  double slope = -5.0 / 3.0;  // energy spectrum E(k) ~ k^slope
  double energy = 0.5;        // random: target 1/2 <|u|^2> (box average)
  std::filesystem::path file;
};

// Solenoidal, zero-mean, dealiased initial velocity.
Field make_initial(const Grid& grid, const InitSpec& spec, double dealias_fraction = 2.0 / 3.0);

// Forcing evaluated at any time, projected and dealiased.
class Forcing {
 public:
  Forcing() = default;
  Forcing(const Grid& grid, const ForcingSpec& spec, double dealias_fraction = 2.0 / 3.0);

  bool active() const noexcept { return kind_ != ForcingSpec::Kind::none; }
  SpectralField spectral(double t) const;
  Field field(double t) const;

 private:
  Grid grid_;
  ForcingSpec::Kind kind_ = ForcingSpec::Kind::none;
  std::vector<double> omega_;
  std::vector<SpectralField> cos_part_, sin_part_;  // per mode
  std::vector<double> times_;
  std::vector<SpectralField> samples_;  // file-backed
};

// Pseudo-spectral Navier-Stokes on [0, 2pi)^d: RK4 in time, quadratic term in
// divergence form with 2/3-rule truncation, Leray projection every stage.
class Solver {
 public:
  Solver(const Grid& grid, const SolverParams& params, const Field& initial, Forcing forcing,
         std::uint64_t start_step = 0);

  const Grid& grid() const noexcept { return grid_; }
  std::uint64_t step_index() const noexcept { return step_; }
  double time() const noexcept { return static_cast<double>(step_) * params_.dt; }
  Field velocity() const;
  const SpectralField& coefficients() const noexcept { return state_; }
  const Forcing& forcing() const noexcept { return forcing_; }

  // Advances one step. Throws SolverError on CFL violation (abort policy) or
  // non-finite values.
  void step();

  // Running integrals since construction, integrated with the RK4 stage weights.
  double work() const noexcept { return work_; }
  double dissipation() const noexcept { return dissipation_; }
  std::uint64_t cfl_warnings() const noexcept { return cfl_warnings_; }
  const std::string& last_warning() const noexcept { return last_warning_; }

 private:
  void rhs(const SpectralField& u, double t, SpectralField& out, double& max_speed, double& power, double& diss);
  void project_and_truncate(SpectralField& s) const;

  Grid grid_;
  SolverParams params_;
  Forcing forcing_;
  SpectralField state_;
  std::uint64_t step_ = 0;
  double work_ = 0.0;
  double dissipation_ = 0.0;
  std::uint64_t cfl_warnings_ = 0;
  std::string last_warning_;
  std::vector<double> k2_;             // |k|^2 per half-spectrum index
  std::array<std::vector<double>, 3> kvec_;
  std::vector<unsigned char> keep_;    // dealias mask
  std::vector<double> herm_;           // hermitian weights
};

// Snapshot callback: velocity, forcing at the same time (null when unforced), step index.
using SnapshotSink = std::function<void(const Field& u, const Field* f, std::uint64_t step)>;

// Called after each snapshot with the series so far.
using ProgressSink = std::function<void(const EnergySeries&)>;

struct ResumeState {
  Field velocity;
  std::uint64_t step = 0;
  double kinetic0 = 0.0;
  double work = 0.0;
  double dissipation = 0.0;
};

// Runs to t_end emitting a snapshot every snapshot_stride steps (step 0 included
// unless resuming). Returns the energy series at snapshot times; work and
// dissipation come from the RK4 accumulators.
EnergySeries run(const Grid& grid, const SolverParams& params, const Field& initial, const ForcingSpec& forcing,
                 const SnapshotSink& sink, const ResumeState* resume = nullptr, const ProgressSink& progress = {});

}  // namespace kolmo
