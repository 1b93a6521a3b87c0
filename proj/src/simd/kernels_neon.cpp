// AArch64 Advanced SIMD variants (two doubles per register).
#include <arm_neon.h>

#include "kolmo/simd.hpp"

namespace kolmo::simd {
namespace {

void increment_moments(int dim, const double* const* base, const double* const* shifted,
                       const double* sigma, double weight, double* acc_i, double* acc_l,
                       double* acc_t, std::size_t count) {
  const float64x2_t w = vdupq_n_f64(weight);
  float64x2_t s[3];
  for (int a = 0; a < 3; ++a) s[a] = vdupq_n_f64(a < dim ? sigma[a] : 0.0);

  std::size_t p = 0;
  for (; p + 2 <= count; p += 2) {
    float64x2_t delta[3];
    float64x2_t l = vdupq_n_f64(0.0);
    float64x2_t q = vdupq_n_f64(0.0);
    for (int a = 0; a < dim; ++a) {
      delta[a] = vsubq_f64(vld1q_f64(shifted[a] + p), vld1q_f64(base[a] + p));
      l = vfmaq_f64(l, s[a], delta[a]);
      q = vfmaq_f64(q, delta[a], delta[a]);
    }
    float64x2_t t = vdupq_n_f64(0.0);
    for (int a = 0; a < dim; ++a) {
      const float64x2_t perp = vfmsq_f64(delta[a], l, s[a]);
      t = vfmaq_f64(t, perp, perp);
    }
    const float64x2_t wl = vmulq_f64(w, l);
    vst1q_f64(acc_i + p, vfmaq_f64(vld1q_f64(acc_i + p), wl, q));
    vst1q_f64(acc_l + p, vfmaq_f64(vld1q_f64(acc_l + p), wl, vmulq_f64(l, l)));
    vst1q_f64(acc_t + p, vfmaq_f64(vld1q_f64(acc_t + p), wl, t));
  }
  if (p < count) {
    const double* b_tail[3];
    const double* s_tail[3];
    for (int a = 0; a < dim; ++a) {
      b_tail[a] = base[a] + p;
      s_tail[a] = shifted[a] + p;
    }
    scalar_table().increment_moments(dim, b_tail, s_tail, sigma, weight, acc_i + p, acc_l + p,
                                     acc_t + p, count - p);
  }
}

// One complex number per register.
inline float64x2_t cmul(float64x2_t a, float64x2_t b) {
  const float64x2_t b_re = vdupq_laneq_f64(b, 0);
  const float64x2_t b_im = vdupq_laneq_f64(b, 1);
  const float64x2_t a_swap = vextq_f64(a, a, 1);  // [ai ar]
  const float64x2_t sign = {-1.0, 1.0};
  return vfmaq_f64(vmulq_f64(a, b_re), vmulq_f64(a_swap, sign), b_im);
}

void phase_multiply(const std::complex<double>* in, const std::complex<double>* phase,
                    std::complex<double> scale, std::complex<double>* out, std::size_t count) {
  const auto* pin = reinterpret_cast<const double*>(in);
  const auto* pph = reinterpret_cast<const double*>(phase);
  auto* pout = reinterpret_cast<double*>(out);
  const float64x2_t sc = {scale.real(), scale.imag()};
  for (std::size_t j = 0; j < count; ++j) {
    const float64x2_t ph = cmul(vld1q_f64(pph + 2 * j), sc);
    vst1q_f64(pout + 2 * j, cmul(vld1q_f64(pin + 2 * j), ph));
  }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void scaled_add(double* out, const double* x, double a, const double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out + i, vfmaq_f64(vld1q_f64(x + i), va, vld1q_f64(y + i)));
  }
  for (; i < n; ++i) out[i] = x[i] + a * y[i];
}

void scale_complex(std::complex<double>* z, const double* r, std::size_t n) {
  auto* pz = reinterpret_cast<double*>(z);
  for (std::size_t i = 0; i < n; ++i) {
    vst1q_f64(pz + 2 * i, vmulq_n_f64(vld1q_f64(pz + 2 * i), r[i]));
  }
}

double dot(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sum(const double* x, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vaddq_f64(acc0, vld1q_f64(x + i));
    acc1 = vaddq_f64(acc1, vld1q_f64(x + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += x[i];
  return s;
}

std::complex<double> weighted_complex_sum(const double* w, const std::complex<double>* z,
                                          std::size_t n) {
  const auto* pz = reinterpret_cast<const double*>(z);
  float64x2_t acc = vdupq_n_f64(0.0);
  for (std::size_t i = 0; i < n; ++i) acc = vfmaq_n_f64(acc, vld1q_f64(pz + 2 * i), w[i]);
  return {vgetq_lane_f64(acc, 0), vgetq_lane_f64(acc, 1)};
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable t{Backend::neon, increment_moments, phase_multiply, axpy,
                             scaled_add,    scale_complex,     dot,            sum,
                             weighted_complex_sum};
  return t;
}

}  // namespace kolmo::simd
