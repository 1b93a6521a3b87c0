#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kolmo/field.hpp"
#include "kolmo/sphere_rule.hpp"
#include "kolmo/tensors.hpp"

namespace kolmo {

// Pointwise sphere averages A_kind(x) = avg_sigma (sigma . du) |T_kind du|^2 with
// du = u(x + ell sigma) - u(x), one scalar field per projection (I, L, T).
// Off-lattice points are sampled by spectral shifts.
std::array<Field, 3> increment_averages(const Field& u, double ell, const SphereRule& rule);

// S_kind = C_kind int_{T^d} A_kind dx (box volume (2pi)^d).
struct StructureValues {
  double ell = 0.0;
  SphereRule rule;
  std::array<double, 3> s{};  // indexed by TensorKind
  double magnitude = 0.0;     // int |A_I| dx, the scale for relative residuals

  double operator[](TensorKind k) const { return s[static_cast<int>(k)]; }
};

StructureValues structure_values(const Field& u, double ell, const SphereRule& rule);
double structure_function(const Field& u, TensorKind projection, double ell, const SphereRule& rule);

// Relative residual of (4/d) S_I = (12/(d(d+2))) S_L + (4(d-1)/(d(d+2))) S_T.
double decomposition_residual(const StructureValues& v, int dim);
// Same with each S taken from its own evaluation; ell and rule must agree.
double decomposition_residual(const StructureValues& i, const StructureValues& l, const StructureValues& t,
                              int dim);
double decomposition_identity(const Field& u, double ell, const SphereRule& rule);

// Local flux density D_{kind,ell,gamma}; nonnegative values mean dissipation.
struct FluxField {
  TensorKind projection = TensorKind::I;
  double ell = 0.0;
  double gamma = 0.0;  // 0 for the sharp sphere
  Field values;
};

// D_{kind,ell,0}(x) = -(C_kind / ell) A_kind(x), so int D dx = -S_kind / ell.
FluxField flux_field_sphere(const Field& u, TensorKind projection, double ell, const SphereRule& rule);
std::array<FluxField, 3> flux_fields_sphere(const Field& u, double ell, const SphereRule& rule);

// D_{I,ell,gamma}(x) = 1/4 int d_j phi_{ell,gamma}(y) du^j |du|^2 dy with du = u(x+y) - u(x),
// evaluated through the ball-mixture form of phi. gamma in (0, 1]; gamma = 0 is
// rejected in favour of flux_field_sphere.
FluxField flux_field_mollified(const Field& u, double ell, double gamma, const SphereRule& rule,
                               int radial_nodes = 64);

// Combined longitudinal kernel applied to a velocity field (u_{L,ell}) and the
// matching scalar average of the pressure (p_{L,ell}).
Field combined_L_average(const Field& u, double ell);
Field combined_L_pressure_average(const Field& p, double ell);

// Dyadic scales pi/2, pi/4, ... down to 4h, increasing.
std::vector<double> default_scales(const Grid& grid);

// S_kind over a time x scale lattice.
struct StructureTable {
  TensorKind projection = TensorKind::I;
  std::vector<double> times;
  std::vector<double> scales;
  std::vector<double> values;  // [time][scale], row-major
  int dim = 0;
  int n = 0;
  std::vector<std::string> rule_labels;  // one per scale
  std::string convention;

  double at(std::size_t t, std::size_t s) const { return values[t * scales.size() + s]; }
  double& at(std::size_t t, std::size_t s) { return values[t * scales.size() + s]; }
  // Throws InvalidArgument on non-finite entries, unsorted scales or mismatched sizes.
  void validate() const;
};

struct StructureAnalysis {
  std::array<StructureTable, 3> tables;  // I, L, T
  std::vector<double> residuals;         // decomposition residual per [time][scale]
};

using RuleProvider = std::function<SphereRule(const Grid&, double ell)>;
// Default: the default kind of the dimension at default_sphere_order.
SphereRule default_rule(const Grid& grid, double ell);

StructureAnalysis analyze_structure(std::span<const Field> snapshots, std::span<const double> scales,
                                    const RuleProvider& rules = default_rule);

// CSV with header t,ell,projection,value.
void write_structure_csv(const std::filesystem::path& path, std::span<const StructureTable> tables);
// Spatial means of flux fields in the same CSV layout.
void write_flux_csv(const std::filesystem::path& path, std::span<const FluxField> fields);
// FLD1 file of the flux density; the header time is the field time.
void write_flux_field(const std::filesystem::path& path, const FluxField& f);

}  // namespace kolmo
