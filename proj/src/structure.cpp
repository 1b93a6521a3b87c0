#include "kolmo/structure.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>

#include "kolmo/error.hpp"
#include "kolmo/field_io.hpp"
#include "kolmo/kernels.hpp"
#include "kolmo/norms.hpp"
#include "kolmo/parallel.hpp"
#include "kolmo/simd.hpp"
#include "kolmo/spectral.hpp"

namespace kolmo {
namespace {

void check_scale(double ell, const char* what) {
  if (!(ell > 0.0 && ell <= kMaxScale * (1 + 1e-15))) {
    throw InvalidArgument(std::string(what) + ": ell must lie in (0, pi/2]");
  }
}

void check_velocity(const Field& u, const SphereRule& rule, const char* what) {
  if (!u.is_vector()) throw InvalidArgument(std::string(what) + ": expected a velocity field");
  if (rule.dim != u.grid().dim()) throw InvalidArgument(std::string(what) + ": rule dimension mismatch");
  if (rule.size() == 0) throw InvalidArgument(std::string(what) + ": empty sphere rule");
}

// One sample of the averaged integrand: offset y = radius * sigma, weight w.
struct Item {
  Vec sigma;
  double radius;
  double weight;
};

// Number of independent accumulators. It depends on the grid size only, so the
// reduction order (and the result) does not depend on the thread count.
std::size_t block_count(const Grid& g, std::size_t items) {
  const std::size_t by_memory = std::max<std::size_t>(1, (std::size_t{1} << 22) / g.size());
  return std::clamp<std::size_t>(std::min<std::size_t>(8, by_memory), 1, std::max<std::size_t>(1, items));
}

std::array<Field, 3> accumulate(const Field& u, const std::vector<Item>& items) {
  const Grid& g = u.grid();
  const int d = g.dim();
  const ShiftSampler sampler(u);
  const std::size_t blocks = block_count(g, items.size());
  std::vector<std::array<RealBuffer, 3>> acc(blocks);
  const auto& kt = simd::active();

  parallel_for(blocks, [&](std::size_t b) {
    for (auto& a : acc[b]) a.assign(g.size(), 0.0);
    Field shifted(g, d);
    ComplexBuffer scratch;
    std::array<const double*, 3> base{}, moved{};
    for (int c = 0; c < d; ++c) {
      base[c] = u.component(c).data();
      moved[c] = shifted.component(c).data();
    }
    const std::size_t begin = items.size() * b / blocks;
    const std::size_t end = items.size() * (b + 1) / blocks;
    for (std::size_t q = begin; q < end; ++q) {
      const Item& it = items[q];
      sampler.sample({it.radius * it.sigma[0], it.radius * it.sigma[1], it.radius * it.sigma[2]}, shifted, scratch);
      kt.increment_moments(d, base.data(), moved.data(), it.sigma.data(), it.weight, acc[b][0].data(),
                           acc[b][1].data(), acc[b][2].data(), g.size());
    }
  });

  std::array<Field, 3> out{Field(g, 1, u.time()), Field(g, 1, u.time()), Field(g, 1, u.time())};
  for (int k = 0; k < 3; ++k) {
    auto dst = out[k].data();
    std::copy(acc[0][k].begin(), acc[0][k].end(), dst.begin());
    for (std::size_t b = 1; b < blocks; ++b) kt.axpy(1.0, acc[b][k].data(), dst.data(), g.size());
  }
  return out;
}

std::vector<Item> sphere_items(const SphereRule& rule, double radius, double scale) {
  std::vector<Item> items;
  items.reserve(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) items.push_back({rule.nodes[q], radius, scale * rule.weights[q]});
  return items;
}

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << "t,ell,projection,value\n";
  return out;
}

}  // namespace

std::array<Field, 3> increment_averages(const Field& u, double ell, const SphereRule& rule) {
  check_scale(ell, "increment_averages");
  check_velocity(u, rule, "increment_averages");
  return accumulate(u, sphere_items(rule, ell, 1.0));
}

StructureValues structure_values(const Field& u, double ell, const SphereRule& rule) {
  const auto a = increment_averages(u, ell, rule);
  const Grid& g = u.grid();
  StructureValues v;
  v.ell = ell;
  v.rule = rule;
  for (int k = 0; k < 3; ++k) {
    v.s[k] = structure_constant(static_cast<TensorKind>(k), g.dim()) * integral(a[k].data(), g);
  }
  RealBuffer mag(a[0].data().begin(), a[0].data().end());
  for (double& x : mag) x = std::abs(x);
  v.magnitude = integral(mag, g);
  return v;
}

double structure_function(const Field& u, TensorKind projection, double ell, const SphereRule& rule) {
  return structure_values(u, ell, rule)[projection];
}

double decomposition_residual(const StructureValues& v, int dim) {
  const double lhs = additivity_weight(TensorKind::I, dim) * v[TensorKind::I];
  const double l = additivity_weight(TensorKind::L, dim) * v[TensorKind::L];
  const double t = additivity_weight(TensorKind::T, dim) * v[TensorKind::T];
  const double scale = std::max({std::abs(lhs), std::abs(l) + std::abs(t), v.magnitude});
  if (scale == 0.0) return 0.0;
  return std::abs(lhs - l - t) / scale;
}

double decomposition_residual(const StructureValues& i, const StructureValues& l, const StructureValues& t,
                              int dim) {
  if (i.ell != l.ell || i.ell != t.ell) throw InvalidArgument("decomposition_residual: scales differ");
  if (!i.rule.same_as(l.rule) || !i.rule.same_as(t.rule)) {
    throw InvalidArgument("decomposition_residual: sphere rules differ");
  }
  StructureValues mixed = i;
  mixed.s[1] = l.s[1];
  mixed.s[2] = t.s[2];
  return decomposition_residual(mixed, dim);
}

double decomposition_identity(const Field& u, double ell, const SphereRule& rule) {
  return decomposition_residual(structure_values(u, ell, rule), u.grid().dim());
}

std::array<FluxField, 3> flux_fields_sphere(const Field& u, double ell, const SphereRule& rule) {
  auto a = increment_averages(u, ell, rule);
  const int d = u.grid().dim();
  std::array<FluxField, 3> out;
  for (int k = 0; k < 3; ++k) {
    const auto kind = static_cast<TensorKind>(k);
    for (double& x : a[k].data()) x *= -structure_constant(kind, d) / ell;
    out[k] = FluxField{kind, ell, 0.0, std::move(a[k])};
  }
  return out;
}

FluxField flux_field_sphere(const Field& u, TensorKind projection, double ell, const SphereRule& rule) {
  auto all = flux_fields_sphere(u, ell, rule);
  return std::move(all[static_cast<int>(projection)]);
}

FluxField flux_field_mollified(const Field& u, double ell, double gamma, const SphereRule& rule, int radial_nodes) {
  check_scale(ell, "flux_field_mollified");
  check_velocity(u, rule, "flux_field_mollified");
  if (gamma == 0.0) throw InvalidArgument("flux_field_mollified: gamma = 0 is the sharp sphere, use flux_field_sphere");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("flux_field_mollified: gamma must lie in (0, 1]");
  const int d = u.grid().dim();
  // d_j of a normalized ball indicator of radius r is -(d/r) sigma_j on the sphere,
  // so D_gamma = sum_q w_q D_{I,r_q,0}. Weights are scaled by ell/r_q and the
  // common factor -C_I/ell applied at the end.
  const BallMixture mix = mollifier_ball_mixture(ell, gamma, bump::radial_rule(radial_nodes), d);
  std::vector<Item> items;
  items.reserve(mix.radii.size() * rule.size());
  for (std::size_t q = 0; q < mix.radii.size(); ++q) {
    const auto part = sphere_items(rule, mix.radii[q], mix.weights[q] * ell / mix.radii[q]);
    items.insert(items.end(), part.begin(), part.end());
  }
  auto a = accumulate(u, items);
  for (double& x : a[0].data()) x *= -structure_constant(TensorKind::I, d) / ell;
  return FluxField{TensorKind::I, ell, gamma, std::move(a[0])};
}

Field combined_L_average(const Field& u, double ell) {
  check_scale(ell, "combined_L_average");
  if (!u.is_vector()) throw InvalidArgument("combined_L_average: expected a velocity field");
  return kernel_average(u, KernelSpec{ell, 0.0, KernelKind::combined_L});
}

Field combined_L_pressure_average(const Field& p, double ell) {
  check_scale(ell, "combined_L_pressure_average");
  if (p.components() != 1) throw InvalidArgument("combined_L_pressure_average: expected a scalar field");
  const int d = p.grid().dim();
  SpectralField s = forward_transform(p);
  apply_radial_multiplier(s, [&](double km) {
    const IsotropicMultiplier m = combined_L_multiplier(d, ell * km);
    return m.a + m.b;
  });
  return inverse_transform(s);
}

std::vector<double> default_scales(const Grid& grid) {
  std::vector<double> scales;
  for (double ell = kMaxScale; ell >= 4.0 * grid.spacing() * (1 - 1e-12); ell *= 0.5) scales.push_back(ell);
  std::reverse(scales.begin(), scales.end());
  return scales;
}

void StructureTable::validate() const {
  if (values.size() != times.size() * scales.size()) throw InvalidArgument("StructureTable: size mismatch");
  if (!rule_labels.empty() && rule_labels.size() != scales.size()) {
    throw InvalidArgument("StructureTable: one rule label per scale expected");
  }
  for (std::size_t i = 1; i < scales.size(); ++i) {
    if (!(scales[i] > scales[i - 1])) throw InvalidArgument("StructureTable: scales must increase strictly");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("StructureTable: non-finite entry");
  }
}

SphereRule default_rule(const Grid& grid, double ell) {
  return sphere_rule(grid.dim(), default_sphere_order(grid, ell), default_sphere_kind(grid.dim()));
}

StructureAnalysis analyze_structure(std::span<const Field> snapshots, std::span<const double> scales,
                                    const RuleProvider& rules) {
  if (snapshots.empty()) throw InvalidArgument("analyze_structure: no snapshots");
  const Grid& g = snapshots.front().grid();
  const int d = g.dim();
  StructureAnalysis out;
  std::vector<SphereRule> rule_set;
  for (double ell : scales) rule_set.push_back(rules(g, ell));
  for (int k = 0; k < 3; ++k) {
    auto& t = out.tables[k];
    t.projection = static_cast<TensorKind>(k);
    t.scales.assign(scales.begin(), scales.end());
    t.dim = d;
    t.n = g.n();
    for (const auto& r : rule_set) t.rule_labels.push_back(r.label);
    t.convention = "S = C int avg_sigma (sigma.du)|T du|^2 dx, C = " +
                   format_double(structure_constant(t.projection, d)) + ", unnormalized box integral";
  }
  for (const Field& u : snapshots) {
    if (!(u.grid() == g)) throw InvalidArgument("analyze_structure: snapshots on different grids");
    for (auto& t : out.tables) t.times.push_back(u.time());
    for (std::size_t s = 0; s < scales.size(); ++s) {
      const StructureValues v = structure_values(u, scales[s], rule_set[s]);
      for (int k = 0; k < 3; ++k) out.tables[k].values.push_back(v.s[k]);
      out.residuals.push_back(decomposition_residual(v, d));
    }
  }
  for (const auto& t : out.tables) t.validate();
  return out;
}

void write_structure_csv(const std::filesystem::path& path, std::span<const StructureTable> tables) {
  auto out = open_csv(path);
  for (const auto& t : tables) {
    t.validate();
    for (std::size_t i = 0; i < t.times.size(); ++i) {
      for (std::size_t s = 0; s < t.scales.size(); ++s) {
        out << format_double(t.times[i]) << ',' << format_double(t.scales[s]) << ',' << name(t.projection) << ','
            << format_double(t.at(i, s)) << '\n';
      }
    }
  }
  if (!out) throw IoError(path.string(), "write failed");
}

void write_flux_csv(const std::filesystem::path& path, std::span<const FluxField> fields) {
  auto out = open_csv(path);
  for (const auto& f : fields) {
    const double mean = integral(f.values.data(), f.values.grid()) / f.values.grid().volume();
    out << format_double(f.values.time()) << ',' << format_double(f.ell) << ',' << name(f.projection) << ','
        << format_double(mean) << '\n';
  }
  if (!out) throw IoError(path.string(), "write failed");
}

void write_flux_field(const std::filesystem::path& path, const FluxField& f) { write_field(path, f.values, 0.0); }

}  // namespace kolmo
