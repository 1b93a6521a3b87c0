#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kolmo/grid.hpp"

namespace kolmo {

enum class SphereRuleKind {
  trapezoid,  // d = 2: equally spaced angles
  tabulated,  // d = 3: Gauss-Legendre in cos(theta) x equally spaced azimuth
  fibonacci,  // d = 3: antipodally symmetrized Fibonacci points, equal weights
  file,       // loaded from a node/weight table
};

// Quadrature for the normalized surface measure on S^{d-1}. Weights sum to 1.
struct SphereRule {
  int dim = 0;
  SphereRuleKind kind = SphereRuleKind::trapezoid;
  std::vector<Vec> nodes;
  std::vector<double> weights;
  int exactness = 0;  // highest total degree of polynomials in sigma integrated exactly
  std::string label;

  std::size_t size() const noexcept { return nodes.size(); }
  // Same weights with nodes sigma -> -sigma.
  SphereRule reflected() const;
  bool same_as(const SphereRule& other) const noexcept;
};

// Largest order sphere_rule accepts for (dim, kind).
int max_sphere_order(int dim, SphereRuleKind kind);
SphereRuleKind default_sphere_kind(int dim);

// Rule exact to at least `order` (order >= 2). Throws InvalidArgument naming
// the maximal supported order when `order` is too large. For fibonacci the
// order sets the point count and the recorded exactness is 1.
SphereRule sphere_rule(int dim, int order, SphereRuleKind kind);
SphereRule sphere_rule(int dim, int order);

// Order adequate for third-order increment integrands at scale ell of fields
// band-limited to the 2/3 box of `grid`.
int default_sphere_order(const Grid& grid, double ell);

// One "w s_1 ... s_d" line per node; '#' starts a comment. Weights must sum to
// 1 and nodes must be unit vectors (1e-12). Exactness is measured on load.
SphereRule load_sphere_rule(const std::filesystem::path& path, int dim);

// Exact normalized-sphere moment of sigma^alpha.
double sphere_monomial_moment(int dim, const std::array<int, 3>& alpha);

// Largest degree p <= max_degree such that all monomials of degree <= p are
// integrated by the rule to `tol`.
int measure_exactness(const SphereRule& rule, int max_degree, double tol = 1e-12);

}  // namespace kolmo
