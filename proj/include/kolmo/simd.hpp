#pragma once

// Data-parallel inner loops with a scalar reference implementation and
// vectorized variants selected at runtime.
//
// Every kernel in the table has the same contract across backends. Element-wise
// kernels agree with the scalar reference to a few ulp (FMA contraction);
// reductions agree to rounding of a reordered sum. For a fixed backend all
// kernels are deterministic.

#include <complex>
#include <cstddef>
#include <string_view>
#include <vector>

namespace kolmo::simd {

enum class Backend { scalar, avx2, neon };

struct KernelTable {
  Backend backend;

  // Third-order increment moments at `count` grid points. For each point,
  // with delta = shifted - base (dim components) and l = sigma . delta:
  //   acc_i += weight * l * |delta|^2
  //   acc_l += weight * l^3
  //   acc_t += weight * l * |delta - l sigma|^2
  // The transverse part is computed from its own projection, not as I - L.
  void (*increment_moments)(int dim, const double* const* base, const double* const* shifted,
                            const double* sigma, double weight, double* acc_i, double* acc_l,
                            double* acc_t, std::size_t count);

  // out[j] = in[j] * phase[j] * scale
  void (*phase_multiply)(const std::complex<double>* in, const std::complex<double>* phase,
                         std::complex<double> scale, std::complex<double>* out, std::size_t count);

  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);

  // out = x + a * y
  void (*scaled_add)(double* out, const double* x, double a, const double* y, std::size_t n);

  // z[j] *= r[j] for complex z, real r
  void (*scale_complex)(std::complex<double>* z, const double* r, std::size_t n);

  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*sum)(const double* x, std::size_t n);

  // sum_j w[j] * z[j]
  std::complex<double> (*weighted_complex_sum)(const double* w, const std::complex<double>* z,
                                               std::size_t n);
};

std::string_view name(Backend b);
bool supported(Backend b);
std::vector<Backend> supported_backends();

// Kernel table for a specific backend; throws if the CPU lacks it.
const KernelTable& table(Backend b);

// Active table: the best supported backend unless overridden by select() or
// the KOLMO_SIMD environment variable ("scalar", "avx2", "neon").
const KernelTable& active();
void select(Backend b);

// Backend-specific tables, defined in their own translation units.
const KernelTable& scalar_table();
#if defined(KOLMO_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(KOLMO_HAVE_NEON)
const KernelTable& neon_table();
#endif

}  // namespace kolmo::simd
