#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "kolmo/field.hpp"
#include "kolmo/sphere_rule.hpp"
#include "kolmo/tensors.hpp"

namespace kolmo {

enum class TimeQuadrature { simpson, trapezoid };

// Running integral F_i = int_{t_0}^{t_i} f dt of equally spaced samples.
// Simpson: composite Simpson up to the last even index, then the three-point
// end panel h/12 (-f_{i-2} + 8 f_{i-1} + 5 f_i); a single step uses
// h/12 (5 f_0 + 8 f_1 - f_2). Needs 3 samples (2 for the trapezoid rule).
std::vector<double> cumulative_integral(std::span<const double> values, double dt,
                                        TimeQuadrature rule = TimeQuadrature::simpson);

// Common spacing of the snapshot times; throws unless >= 3 equally spaced
// increasing times on one grid, with forces (if any) matching in count, grid and time.
double snapshot_spacing(std::span<const Field> snapshots, std::span<const Field> forces);

struct EnergySeries {
  std::vector<double> times;
  std::vector<double> kinetic;      // 1/2 ||u(t)||^2
  std::vector<double> work;         // int_0^t <f, u>
  std::vector<double> dissipation;  // nu int_0^t ||grad u||^2
  std::vector<double> eps;          // 1/2 ||u_0||^2 - 1/2 ||u(t)||^2 + work
  // max over t of |Simpson - trapezoid| for work and dissipation.
  double quadrature_error = 0.0;
  // max over t of |eps - dissipation|.
  double dissipation_gap = 0.0;
};

// `forces` is empty (f = 0) or one field per snapshot.
EnergySeries epsilon_series(std::span<const Field> snapshots, std::span<const Field> forces, double nu,
                            TimeQuadrature rule = TimeQuadrature::simpson);

// Terms of the time-integrated identity
//   int_0^T S/ell dt + eps(T) = boundary + forcing + viscous
// with u_ell the ball average of radius ell:
//   boundary = 1/2 int [u_0^2 - u_ell(0).u_0 + u_ell(T).u(T) - |u(T)|^2]
//   forcing  = int int f.(u - u_ell)
//   viscous  = nu int int grad u_ell : grad u
struct BalanceReport {
  TensorKind projection = TensorKind::I;
  double ell = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  double flux_term = 0.0;
  double epsilon = 0.0;
  double boundary_term = 0.0;
  double forcing_term = 0.0;
  double viscous_term = 0.0;
  double residual = 0.0;  // left minus right, always signed_sum()

  double signed_sum() const;
  nlohmann::ordered_json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

BalanceReport global_balance_residual(std::span<const Field> snapshots, std::span<const Field> forces, double nu,
                                      double ell, const SphereRule& rule,
                                      TimeQuadrature quad = TimeQuadrature::simpson);

// R(t) = int_0^t S_kind / ell + eps(t) at every snapshot time.
struct FluxSeries {
  std::vector<double> times;
  std::vector<double> structure;  // S_kind(t, ell)
  std::vector<double> residual;   // R(t)
};
FluxSeries flux_series(std::span<const Field> snapshots, std::span<const Field> forces, double nu, double ell,
                       TensorKind projection, const SphereRule& rule, TimeQuadrature quad = TimeQuadrature::simpson);
// Same with precomputed energy series and structure values.
FluxSeries flux_series(const EnergySeries& energy, std::span<const double> structure, double ell,
                       TimeQuadrature quad = TimeQuadrature::simpson);

// Pointwise residual of the finite-scale local balance at an interior snapshot,
// time derivative by centered differences, p from pressure_from_velocity.
struct LocalBalance {
  std::size_t index = 0;
  double time = 0.0;
  Field residual;
  double l1 = 0.0;        // int |residual| dx
  double dominant = 0.0;  // largest L1 norm among the individual terms
};

// Kernel phi_{ell,gamma}, right-hand side -2 D_{I,ell,gamma}.
LocalBalance local_balance_residual_I(std::span<const Field> snapshots, std::span<const Field> forces, double nu,
                                      double ell, double gamma, const SphereRule& rule, std::size_t index);
// Combined longitudinal kernel, right-hand side (d / 2 ell) avg (sigma.du) |T_L du|^2.
LocalBalance local_balance_residual_L(std::span<const Field> snapshots, std::span<const Field> forces, double nu,
                                      double ell, const SphereRule& rule, std::size_t index);

// Measured value and upper bound of the three right-hand terms of the global identity.
struct AuditTerm {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  double ratio = 0.0;  // measured / bound, 0 when both vanish
};

struct RemainderAudit {
  double ell = 0.0;
  double alpha = 0.0;
  double sigma = 0.5;
  double constant = 10.0;        // allowed ratio
  std::array<AuditTerm, 3> terms;  // boundary (paired increments), forcing, viscous
  double boundary_raw = 0.0;     // the four-piece boundary term as it appears in the identity
  std::size_t shift_count = 0;   // size of the Besov shift set

  bool within() const;
  nlohmann::ordered_json to_json() const;
};

// Term 1: 1/2 (||u_0.(u_0,ell - u_0)||_1 + ||u_T.(u_T,ell - u_T)||_1) against
//         1/2 ell^alpha (||u_0|| |u_0|_B + ||u_T|| |u_T|_B).
// Term 2: |int int f.(u - u_ell)| against ||f||_{L^{1+s}_t L^2} ell^alpha ||u||_{L^{(1+s)/s}_t B}.
// Term 3: |nu int int grad u_ell : grad u| against nu ||grad u||_{L^2_{t,x}} ell^{alpha-1} ||u||_{L^2_t B}.
// Besov seminorms use besov_shift_set with default options.
RemainderAudit remainder_bound_audit(std::span<const Field> snapshots, std::span<const Field> forces, double nu,
                                     double ell, double alpha, double sigma = 0.5);

void write_balance_json(const std::filesystem::path& path, const BalanceReport& r);
void write_balance_csv(const std::filesystem::path& path, std::span<const BalanceReport> reports);

}  // namespace kolmo
