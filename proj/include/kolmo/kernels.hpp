#pragma once

#include <span>
#include <vector>

#include "kolmo/field.hpp"
#include "kolmo/quadrature.hpp"
#include "kolmo/spectral.hpp"
#include "kolmo/sphere_rule.hpp"
#include "kolmo/tensors.hpp"

namespace kolmo {

// Radial profile of the standard kernel: psi_gamma(s) = 1 on [0, 1 - gamma],
// 0 beyond 1 + gamma, with the transition psi' = -beta((s - 1)/gamma)/(gamma Z),
// beta(z) = exp(-1/(1 - z^2)).
namespace bump {
double beta(double z);
double normalizer();        // Z = int_{-1}^{1} beta
double second_moment();     // E_beta[z^2]
double profile(double s, double gamma);
double profile_derivative(double s, double gamma);
// Gauss-Legendre nodes on [-1, 1] with weights proportional to beta, summing to 1.
QuadratureRule radial_rule(int nodes);
}  // namespace bump

double unit_ball_volume(int dim);
double unit_sphere_area(int dim);

enum class KernelKind {
  standard,    // phi_{ell,gamma}: unit mass, constant inside, smooth (gamma > 0) or sharp (gamma = 0) edge
  special,     // |B_ell|^{-1} (|y|^2/ell^2 - 1) on |y| <= ell
  combined_L,  // |B_ell|^{-1} 1_{|y|<=ell} T_L(y) - special(y) T_T(y), matrix valued
};

struct KernelSpec {
  double ell = 0.0;
  double gamma = 0.0;
  KernelKind kind = KernelKind::standard;
  int radial_nodes = 64;  // Gauss-Legendre nodes across the transition annulus

  // ell in (0, pi/2], gamma in [0, 1], radial_nodes >= 2.
  void validate() const;
};

constexpr double kMaxScale = 1.5707963267948966;  // pi/2

// Scalar kernels (standard, special). Throws for combined_L.
double kernel_value(const KernelSpec& k, int dim, const Vec& y);
Vec kernel_gradient(const KernelSpec& k, int dim, const Vec& y);
Mat combined_L_kernel(double ell, int dim, const Vec& y);

// Numerical radial integral of the scalar kernel.
double kernel_mass(const KernelSpec& k, int dim);
// int K(y) T_kind(y) dy for scalar kernels, or the matrix mass of the combined kernel
// (kind is ignored then); the angular part uses `rule`.
Mat kernel_tensor_moment(const KernelSpec& k, int dim, TensorKind kind, const SphereRule& rule);
// Normalized sphere average of T_kind(sigma).
Mat sphere_tensor_average(TensorKind kind, const SphereRule& rule);

// Largest |lhs - rhs| over components of
//   d_k phi(y) - (2 y_k/|y|^2) phi(y) = 2 y_k / (|B_ell| |y|^2)
// for the special kernel. Requires 0 < |y| < ell.
double special_kernel_gradient_identity(const KernelSpec& k, int dim, const Vec& y);

// Fourier multipliers int K(y) e^{i k.y} dy as functions of a = ell|k| (s for spheres).
double sphere_multiplier(int dim, double s);          // average of e^{i s khat.sigma}
IsotropicMultiplier sphere_tensor_multiplier(int dim, double s);  // average of sigma sigma^T e^{i s khat.sigma}
double ball_multiplier(int dim, double a);
double special_kernel_multiplier(int dim, double a);
IsotropicMultiplier combined_L_multiplier(int dim, double a);
// Standard kernel: beta-weighted mixture of ball averages over radii ell (1 + gamma z).
double mollifier_multiplier(int dim, double a, double gamma, const QuadratureRule& radial);

// Mixture weights of the standard kernel: phi_{ell,gamma} = sum_q w_q |B_{r_q}|^{-1} 1_{B_{r_q}},
// r_q = ell (1 + gamma z_q).
struct BallMixture {
  std::vector<double> radii;
  std::vector<double> weights;
};
BallMixture mollifier_ball_mixture(double ell, double gamma, const QuadratureRule& radial, int dim);

// Convolutions u_K(x) = int K(y) u(x + y) dy, exact for band-limited input.
Field ball_average(const Field& f, double ell);
Field kernel_average(const Field& f, const KernelSpec& k);
SpectralField kernel_average(const SpectralField& s, const KernelSpec& k);

// Sphere average sum_q w_q f(x + ell sigma_q) with the given rule. ell in [0, pi/2].
Field spherical_average(const Field& f, double ell, const SphereRule& rule);

struct SphereLimitRecord {
  std::vector<double> gammas;
  std::vector<double> gaps;   // max_x |I_{ell,gamma} f - I_{ell,0} f|
  double reference = 0.0;     // max_x |I_{ell,0} f|
  bool monotone = true;       // gaps nonincreasing (1e-10 slack)
};

// Smearing of the sphere average over radii ell + r, r ~ beta bump of half-width
// gamma ell, compared with the sharp sphere average. gammas must decrease, each in (0, 1].
SphereLimitRecord mollifier_to_sphere_limit(const Field& f, double ell, std::span<const double> gammas,
                                            int radial_nodes = 64);

}  // namespace kolmo
