#include "kolmo/sphere_rule.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "kolmo/error.hpp"
#include "kolmo/quadrature.hpp"

namespace kolmo {
namespace {

constexpr int kMaxTrapezoidOrder = 4095;
constexpr int kMaxTabulatedOrder = 255;
constexpr int kMaxFibonacciOrder = 255;

int even_at_least(int v) { return v % 2 == 0 ? v : v + 1; }

SphereRule trapezoid(int order) {
  const int count = even_at_least(order + 1);
  SphereRule r;
  r.dim = 2;
  r.kind = SphereRuleKind::trapezoid;
  r.exactness = count - 1;
  r.label = "trapezoid-" + std::to_string(count);
  r.nodes.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    const double t = 2.0 * std::numbers::pi * j / count;
    r.nodes.push_back({std::cos(t), std::sin(t), 0.0});
  }
  r.weights.assign(static_cast<std::size_t>(count), 1.0 / count);
  return r;
}

SphereRule tabulated(int order) {
  const int m = (order + 2) / 2;                // 2m - 1 >= order
  const int naz = even_at_least(order + 1);     // azimuthal exactness naz - 1 >= order
  const auto gl = gauss_legendre(m);
  SphereRule r;
  r.dim = 3;
  r.kind = SphereRuleKind::tabulated;
  r.exactness = std::min(2 * m - 1, naz - 1);
  r.label = "gl" + std::to_string(m) + "x" + std::to_string(naz);
  for (int i = 0; i < m; ++i) {
    const double z = gl.nodes[i];
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int j = 0; j < naz; ++j) {
      const double p = 2.0 * std::numbers::pi * j / naz;
      r.nodes.push_back({s * std::cos(p), s * std::sin(p), z});
      r.weights.push_back(0.5 * gl.weights[i] / naz);
    }
  }
  return r;
}

SphereRule fibonacci(int order) {
  const int half = (order + 1) * (order + 1) / 2 + 1;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  SphereRule r;
  r.dim = 3;
  r.kind = SphereRuleKind::fibonacci;
  r.exactness = 1;
  r.label = "fibonacci-" + std::to_string(2 * half);
  for (int i = 0; i < half; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / (2.0 * half);  // upper hemisphere only
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double p = golden * i;
    const Vec v{s * std::cos(p), s * std::sin(p), z};
    r.nodes.push_back(v);
    r.nodes.push_back({-v[0], -v[1], -v[2]});
  }
  r.weights.assign(r.nodes.size(), 1.0 / static_cast<double>(r.nodes.size()));
  return r;
}

}  // namespace

SphereRule SphereRule::reflected() const {
  SphereRule r = *this;
  for (auto& v : r.nodes) v = {-v[0], -v[1], -v[2]};
  r.label += "-reflected";
  return r;
}

bool SphereRule::same_as(const SphereRule& o) const noexcept {
  return dim == o.dim && nodes == o.nodes && weights == o.weights;
}

int max_sphere_order(int dim, SphereRuleKind kind) {
  if (dim == 2) return kind == SphereRuleKind::trapezoid ? kMaxTrapezoidOrder : 0;
  if (dim == 3) {
    if (kind == SphereRuleKind::tabulated) return kMaxTabulatedOrder;
    if (kind == SphereRuleKind::fibonacci) return kMaxFibonacciOrder;
  }
  return 0;
}

SphereRuleKind default_sphere_kind(int dim) {
  return dim == 2 ? SphereRuleKind::trapezoid : SphereRuleKind::tabulated;
}

SphereRule sphere_rule(int dim, int order, SphereRuleKind kind) {
  if (dim != 2 && dim != 3) throw InvalidArgument("sphere_rule: dimension must be 2 or 3");
  if (kind == SphereRuleKind::file) throw InvalidArgument("sphere_rule: use load_sphere_rule for file rules");
  const int max = max_sphere_order(dim, kind);
  if (max == 0) throw InvalidArgument("sphere_rule: rule kind not available in this dimension");
  if (order < 2) throw InvalidArgument("sphere_rule: order must be >= 2");
  if (order > max) {
    throw InvalidArgument("sphere_rule: order " + std::to_string(order) + " unsupported; maximal order is " +
                          std::to_string(max));
  }
  switch (kind) {
    case SphereRuleKind::trapezoid: return trapezoid(order);
    case SphereRuleKind::tabulated: return tabulated(order);
    case SphereRuleKind::fibonacci: return fibonacci(order);
    case SphereRuleKind::file: break;
  }
  throw InvalidArgument("sphere_rule: unknown kind");
}

SphereRule sphere_rule(int dim, int order) { return sphere_rule(dim, order, default_sphere_kind(dim)); }

int default_sphere_order(const Grid& grid, double ell) {
  // the cubic integrand carries phases up to 3 ell |k|, |k| <= sqrt(d) n/3
  const double kmax = std::sqrt(static_cast<double>(grid.dim())) * grid.dealias_cutoff();
  const int order = static_cast<int>(std::ceil(3.0 * ell * kmax)) + 8;
  const int cap = max_sphere_order(grid.dim(), default_sphere_kind(grid.dim()));
  return std::clamp(order, 8, grid.dim() == 2 ? cap : 127);
}

double sphere_monomial_moment(int dim, const std::array<int, 3>& alpha) {
  int total = 0;
  double num = std::tgamma(0.5 * dim);
  for (int i = 0; i < dim; ++i) {
    if (alpha[i] % 2 != 0) return 0.0;
    total += alpha[i];
    num *= std::tgamma(0.5 * (alpha[i] + 1));
  }
  return num / (std::pow(std::numbers::pi, 0.5 * dim) * std::tgamma(0.5 * (total + dim)));
}

int measure_exactness(const SphereRule& rule, int max_degree, double tol) {
  for (int deg = 0; deg <= max_degree; ++deg) {
    for (int a = 0; a <= deg; ++a) {
      for (int b = 0; a + b <= deg; ++b) {
        const int c = deg - a - b;
        if (rule.dim == 2 && c != 0) continue;
        const std::array<int, 3> alpha{a, b, c};
        double q = 0.0;
        for (std::size_t k = 0; k < rule.size(); ++k) {
          const Vec& s = rule.nodes[k];
          q += rule.weights[k] * std::pow(s[0], a) * std::pow(s[1], b) * (rule.dim == 3 ? std::pow(s[2], c) : 1.0);
        }
        if (std::abs(q - sphere_monomial_moment(rule.dim, alpha)) > tol) return deg - 1;
      }
    }
  }
  return max_degree;
}

SphereRule load_sphere_rule(const std::filesystem::path& path, int dim) {
  if (dim != 2 && dim != 3) throw InvalidArgument("load_sphere_rule: dimension must be 2 or 3");
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open sphere rule");
  SphereRule r;
  r.dim = dim;
  r.kind = SphereRuleKind::file;
  r.label = path.filename().string();
  std::string line;
  int lineno = 0;
  double wsum = 0.0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double w = 0.0;
    if (!(ss >> w)) continue;
    Vec v{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
      if (!(ss >> v[a])) throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected w and " +
                                           std::to_string(dim) + " coordinates");
    }
    std::string extra;
    if (ss >> extra) throw FormatError(path.string() + ":" + std::to_string(lineno) + ": trailing data");
    const double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (std::abs(len - 1.0) > 1e-12) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": node is not a unit vector");
    }
    r.nodes.push_back(v);
    r.weights.push_back(w);
    wsum += w;
  }
  if (r.nodes.empty()) throw FormatError(path.string() + ": no nodes");
  if (std::abs(wsum - 1.0) > 1e-12) throw FormatError(path.string() + ": weights do not sum to 1");
  r.exactness = measure_exactness(r, 32);
  return r;
}

}  // namespace kolmo
