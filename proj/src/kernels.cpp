#include "kolmo/kernels.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "kolmo/error.hpp"
#include "kolmo/norms.hpp"
#include "kolmo/simd.hpp"

namespace kolmo {
namespace {

using std::numbers::pi;

void check_dim(int dim) {
  if (dim != 2 && dim != 3) throw InvalidArgument("dimension must be 2 or 3");
}

double norm3(const Vec& y) { return std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]); }

// Gauss-Legendre rules on [0, 1], shared across calls.
const QuadratureRule& unit_gl(int n) {
  static std::mutex m;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(m);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_legendre(n, 0.0, 1.0)).first;
  return it->second;
}

int radial_nodes_for(double a) { return 24 + static_cast<int>(std::ceil(a)); }

// E_beta[(1 + gamma z)^d] in closed form (odd moments vanish).
double radial_volume_factor(int dim, double gamma) {
  const double m2 = bump::second_moment();
  return dim == 2 ? 1.0 + gamma * gamma * m2 : 1.0 + 3.0 * gamma * gamma * m2;
}

double standard_constant(int dim, double gamma) {
  return dim / (unit_sphere_area(dim) * radial_volume_factor(dim, gamma));
}

}  // namespace

namespace bump {

double beta(double z) {
  if (!(std::abs(z) < 1.0)) return 0.0;
  return std::exp(-1.0 / (1.0 - z * z));
}

double normalizer() {
  static const double z = integrate(beta, -1.0, 1.0, 1e-16, 1e-15);
  return z;
}

double second_moment() {
  static const double m2 = integrate([](double z) { return z * z * beta(z); }, -1.0, 1.0, 1e-16, 1e-15) / normalizer();
  return m2;
}

double profile(double s, double gamma) {
  if (gamma == 0.0) return s <= 1.0 ? 1.0 : 0.0;
  if (s <= 1.0 - gamma) return 1.0;
  if (s >= 1.0 + gamma) return 0.0;
  const double z0 = (s - 1.0) / gamma;
  return integrate(beta, z0, 1.0, 1e-16, 1e-14) / normalizer();
}

double profile_derivative(double s, double gamma) {
  if (gamma == 0.0) return 0.0;
  return -beta((s - 1.0) / gamma) / (gamma * normalizer());
}

QuadratureRule radial_rule(int nodes) {
  if (nodes < 2) throw InvalidArgument("radial_rule: need at least 2 nodes");
  QuadratureRule r = gauss_legendre(nodes);
  double total = 0.0;
  for (std::size_t q = 0; q < r.nodes.size(); ++q) {
    r.weights[q] *= beta(r.nodes[q]);
    total += r.weights[q];
  }
  for (double& w : r.weights) w /= total;
  return r;
}

}  // namespace bump

double unit_ball_volume(int dim) {
  check_dim(dim);
  return dim == 2 ? pi : 4.0 * pi / 3.0;
}

double unit_sphere_area(int dim) {
  check_dim(dim);
  return dim == 2 ? 2.0 * pi : 4.0 * pi;
}

void KernelSpec::validate() const {
  if (!(ell > 0.0 && ell <= kMaxScale * (1 + 1e-15))) {
    throw InvalidArgument("kernel scale ell must lie in (0, pi/2], got " + std::to_string(ell));
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidArgument("kernel width gamma must lie in [0, 1]");
  if (radial_nodes < 2) throw InvalidArgument("kernel radial_nodes must be >= 2");
}

double kernel_value(const KernelSpec& k, int dim, const Vec& y) {
  k.validate();
  check_dim(dim);
  const double r = norm3(y);
  switch (k.kind) {
    case KernelKind::standard:
      if (k.gamma == 0.0) return r <= k.ell ? 1.0 / (unit_ball_volume(dim) * std::pow(k.ell, dim)) : 0.0;
      return standard_constant(dim, k.gamma) * std::pow(k.ell, -dim) * bump::profile(r / k.ell, k.gamma);
    case KernelKind::special:
      if (r > k.ell) return 0.0;
      return (r * r / (k.ell * k.ell) - 1.0) / (unit_ball_volume(dim) * std::pow(k.ell, dim));
    case KernelKind::combined_L: break;
  }
  throw InvalidArgument("kernel_value: the combined kernel is matrix valued");
}

Vec kernel_gradient(const KernelSpec& k, int dim, const Vec& y) {
  k.validate();
  check_dim(dim);
  const double r = norm3(y);
  Vec g{0.0, 0.0, 0.0};
  switch (k.kind) {
    case KernelKind::standard: {
      if (k.gamma == 0.0 || r == 0.0) return g;
      const double s = r / k.ell;
      if (std::abs(s - 1.0) >= k.gamma) return g;
      const double c = standard_constant(dim, k.gamma) * std::pow(k.ell, -dim - 1) *
                       bump::profile_derivative(s, k.gamma) / r;
      for (int a = 0; a < dim; ++a) g[a] = c * y[a];
      return g;
    }
    case KernelKind::special: {
      if (r >= k.ell) return g;
      const double c = 2.0 / (k.ell * k.ell * unit_ball_volume(dim) * std::pow(k.ell, dim));
      for (int a = 0; a < dim; ++a) g[a] = c * y[a];
      return g;
    }
    case KernelKind::combined_L: break;
  }
  throw InvalidArgument("kernel_gradient: the combined kernel is matrix valued");
}

Mat combined_L_kernel(double ell, int dim, const Vec& y) {
  const KernelSpec special{ell, 0.0, KernelKind::special};
  Mat m{};
  const double r = norm3(y);
  if (r > ell || r == 0.0) return m;
  const double ball = 1.0 / (unit_ball_volume(dim) * std::pow(ell, dim));
  const double s = kernel_value(special, dim, y);
  const Mat tl = tensor_matrix(TensorKind::L, y, dim);
  const Mat tt = tensor_matrix(TensorKind::T, y, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) m[i][j] = ball * tl[i][j] - s * tt[i][j];
  }
  return m;
}

double kernel_mass(const KernelSpec& k, int dim) {
  k.validate();
  check_dim(dim);
  const double area = unit_sphere_area(dim);
  switch (k.kind) {
    case KernelKind::standard: {
      if (k.gamma == 0.0) {
        return area / unit_ball_volume(dim) * integrate([dim](double s) { return std::pow(s, dim - 1); }, 0.0, 1.0);
      }
      const double g = k.gamma;
      const double inner = std::pow(1.0 - g, dim) / dim;
      const double shell = integrate([&](double s) { return bump::profile(s, g) * std::pow(s, dim - 1); }, 1.0 - g,
                                     1.0 + g, 1e-15, 1e-13);
      return standard_constant(dim, g) * area * (inner + shell);
    }
    case KernelKind::special: {
      const auto& gl = unit_gl(8);
      double s = 0.0;
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const double t = gl.nodes[q];
        s += gl.weights[q] * (t * t - 1.0) * std::pow(t, dim - 1);
      }
      return area / unit_ball_volume(dim) * s;
    }
    case KernelKind::combined_L: break;
  }
  throw InvalidArgument("kernel_mass: the combined kernel is matrix valued");
}

Mat sphere_tensor_average(TensorKind kind, const SphereRule& rule) {
  Mat m{};
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Mat t = tensor_matrix(kind, rule.nodes[q], rule.dim);
    for (int i = 0; i < rule.dim; ++i) {
      for (int j = 0; j < rule.dim; ++j) m[i][j] += rule.weights[q] * t[i][j];
    }
  }
  return m;
}

Mat kernel_tensor_moment(const KernelSpec& k, int dim, TensorKind kind, const SphereRule& rule) {
  if (rule.dim != dim) throw InvalidArgument("kernel_tensor_moment: rule dimension mismatch");
  Mat out{};
  if (k.kind == KernelKind::combined_L) {
    const double ball = kernel_mass({k.ell, 0.0, KernelKind::standard}, dim);
    const double special = kernel_mass({k.ell, 0.0, KernelKind::special}, dim);
    const Mat tl = sphere_tensor_average(TensorKind::L, rule);
    const Mat tt = sphere_tensor_average(TensorKind::T, rule);
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) out[i][j] = ball * tl[i][j] - special * tt[i][j];
    }
    return out;
  }
  const double mass = kernel_mass(k, dim);
  const Mat t = sphere_tensor_average(kind, rule);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) out[i][j] = mass * t[i][j];
  }
  return out;
}

double special_kernel_gradient_identity(const KernelSpec& k, int dim, const Vec& y) {
  if (k.kind != KernelKind::special) throw InvalidArgument("gradient identity applies to the special kernel");
  const double r = norm3(y);
  if (!(r > 0.0) || r >= k.ell) throw InvalidArgument("gradient identity requires 0 < |y| < ell");
  const double phi = kernel_value(k, dim, y);
  const Vec g = kernel_gradient(k, dim, y);
  const double ball = unit_ball_volume(dim) * std::pow(k.ell, dim);
  double worst = 0.0;
  for (int a = 0; a < dim; ++a) {
    const double lhs = g[a] - 2.0 * y[a] / (r * r) * phi;
    const double rhs = 2.0 * y[a] / (ball * r * r);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

double sphere_multiplier(int dim, double s) {
  check_dim(dim);
  s = std::abs(s);
  if (s < 1e-3) {
    const double s2 = s * s;
    return dim == 2 ? 1.0 - s2 / 4.0 + s2 * s2 / 64.0 : 1.0 - s2 / 6.0 + s2 * s2 / 120.0;
  }
  return dim == 2 ? std::cyl_bessel_j(0.0, s) : std::sin(s) / s;
}

IsotropicMultiplier sphere_tensor_multiplier(int dim, double s) {
  check_dim(dim);
  s = std::abs(s);
  if (s < 1e-3) {
    const double s2 = s * s;
    if (dim == 2) return {0.5 - s2 / 16.0 + s2 * s2 / 384.0, -s2 / 8.0 + s2 * s2 / 96.0};
    return {1.0 / 3.0 - s2 / 30.0 + s2 * s2 / 840.0, -s2 / 15.0 + s2 * s2 / 210.0};
  }
  if (dim == 2) return {std::cyl_bessel_j(1.0, s) / s, -std::cyl_bessel_j(2.0, s)};
  return {std::sph_bessel(1, s) / s, -std::sph_bessel(2, s)};
}

double ball_multiplier(int dim, double a) {
  check_dim(dim);
  a = std::abs(a);
  if (a < 1e-3) {
    const double a2 = a * a;
    return dim == 2 ? 1.0 - a2 / 8.0 + a2 * a2 / 192.0 : 1.0 - a2 / 10.0 + a2 * a2 / 280.0;
  }
  return dim == 2 ? 2.0 * std::cyl_bessel_j(1.0, a) / a : 3.0 * std::sph_bessel(1, a) / a;
}

double special_kernel_multiplier(int dim, double a) {
  check_dim(dim);
  const auto& gl = unit_gl(radial_nodes_for(a));
  double s = 0.0;
  for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
    const double t = gl.nodes[q];
    s += gl.weights[q] * std::pow(t, dim - 1) * (t * t - 1.0) * sphere_multiplier(dim, a * t);
  }
  return dim * s;
}

IsotropicMultiplier combined_L_multiplier(int dim, double a) {
  check_dim(dim);
  const auto& gl = unit_gl(radial_nodes_for(a));
  double alpha = 0.0, beta = 0.0;
  for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
    const double t = gl.nodes[q];
    const double tp = std::pow(t, dim - 1);
    const IsotropicMultiplier ab = sphere_tensor_multiplier(dim, a * t);
    alpha += gl.weights[q] * tp * (t * t * ab.a - (t * t - 1.0) * sphere_multiplier(dim, a * t));
    beta += gl.weights[q] * tp * t * t * ab.b;
  }
  return {dim * alpha, dim * beta};
}

BallMixture mollifier_ball_mixture(double ell, double gamma, const QuadratureRule& radial, int dim) {
  check_dim(dim);
  BallMixture m;
  if (gamma == 0.0) {
    m.radii = {ell};
    m.weights = {1.0};
    return m;
  }
  double total = 0.0;
  for (std::size_t q = 0; q < radial.nodes.size(); ++q) {
    const double f = 1.0 + gamma * radial.nodes[q];
    m.radii.push_back(ell * f);
    m.weights.push_back(radial.weights[q] * std::pow(f, dim));
    total += m.weights.back();
  }
  for (double& w : m.weights) w /= total;
  return m;
}

double mollifier_multiplier(int dim, double a, double gamma, const QuadratureRule& radial) {
  if (gamma == 0.0) return ball_multiplier(dim, a);
  const BallMixture m = mollifier_ball_mixture(1.0, gamma, radial, dim);
  double s = 0.0;
  for (std::size_t q = 0; q < m.radii.size(); ++q) s += m.weights[q] * ball_multiplier(dim, a * m.radii[q]);
  return s;
}

SpectralField kernel_average(const SpectralField& s, const KernelSpec& k) {
  k.validate();
  const int dim = s.grid().dim();
  SpectralField out = s;
  switch (k.kind) {
    case KernelKind::standard: {
      if (k.gamma == 0.0) {
        apply_radial_multiplier(out, [&](double km) { return ball_multiplier(dim, k.ell * km); });
      } else {
        const QuadratureRule radial = bump::radial_rule(k.radial_nodes);
        apply_radial_multiplier(out, [&](double km) { return mollifier_multiplier(dim, k.ell * km, k.gamma, radial); });
      }
      break;
    }
    case KernelKind::special:
      apply_radial_multiplier(out, [&](double km) { return special_kernel_multiplier(dim, k.ell * km); });
      break;
    case KernelKind::combined_L:
      apply_matrix_multiplier(out, [&](double km) { return combined_L_multiplier(dim, k.ell * km); });
      break;
  }
  return out;
}

Field kernel_average(const Field& f, const KernelSpec& k) { return inverse_transform(kernel_average(forward_transform(f), k)); }

Field ball_average(const Field& f, double ell) { return kernel_average(f, KernelSpec{ell, 0.0, KernelKind::standard}); }

Field spherical_average(const Field& f, double ell, const SphereRule& rule) {
  if (!(ell >= 0.0 && ell <= kMaxScale * (1 + 1e-15))) {
    throw InvalidArgument("spherical_average: ell must lie in [0, pi/2]");
  }
  if (rule.dim != f.grid().dim()) throw InvalidArgument("spherical_average: rule dimension mismatch");
  if (ell == 0.0) return f;
  const Grid& g = f.grid();
  const SpectralField s = forward_transform(f);
  SpectralField acc(g, f.components(), f.time());
  const auto& kt = simd::active();
  const auto half = static_cast<std::size_t>(g.half());
  ComplexBuffer row(half);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vec& sg = rule.nodes[q];
    const ShiftPhases ph(g, {ell * sg[0], ell * sg[1], ell * sg[2]});
    const auto& last = ph.axis[g.dim() - 1];
    for (std::size_t r = 0; r < g.spectral_rows(); ++r) {
      const std::complex<double> rp = ph.row_phase(g, r) * rule.weights[q];
      for (int c = 0; c < f.components(); ++c) {
        kt.phase_multiply(s.component(c).data() + r * half, last.data(), rp, row.data(), half);
        kt.axpy(1.0, reinterpret_cast<const double*>(row.data()),
                reinterpret_cast<double*>(acc.component(c).data() + r * half), 2 * half);
      }
    }
  }
  return inverse_transform(acc);
}

SphereLimitRecord mollifier_to_sphere_limit(const Field& f, double ell, std::span<const double> gammas,
                                            int radial_nodes) {
  if (!(ell > 0.0 && ell <= kMaxScale * (1 + 1e-15))) {
    throw InvalidArgument("mollifier_to_sphere_limit: ell must lie in (0, pi/2]");
  }
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    if (!(gammas[i] > 0.0 && gammas[i] <= 1.0)) throw InvalidArgument("mollifier_to_sphere_limit: gamma must lie in (0, 1]");
    if (i > 0 && !(gammas[i] < gammas[i - 1])) throw InvalidArgument("mollifier_to_sphere_limit: gammas must decrease");
  }
  const int dim = f.grid().dim();
  const SpectralField s = forward_transform(f);
  const QuadratureRule radial = bump::radial_rule(radial_nodes);
  SphereLimitRecord rec;
  SpectralField sharp = s;
  apply_radial_multiplier(sharp, [&](double km) { return sphere_multiplier(dim, ell * km); });
  rec.reference = max_norm(inverse_transform(sharp));
  for (double gamma : gammas) {
    SpectralField diff = s;
    apply_radial_multiplier(diff, [&](double km) {
      double m = 0.0;
      for (std::size_t q = 0; q < radial.nodes.size(); ++q) {
        m += radial.weights[q] * sphere_multiplier(dim, ell * (1.0 + gamma * radial.nodes[q]) * km);
      }
      return m - sphere_multiplier(dim, ell * km);
    });
    rec.gammas.push_back(gamma);
    rec.gaps.push_back(max_norm(inverse_transform(diff)));
  }
  for (std::size_t i = 1; i < rec.gaps.size(); ++i) {
    if (rec.gaps[i] > rec.gaps[i - 1] + 1e-10) rec.monotone = false;
  }
  return rec;
}

}  // namespace kolmo
