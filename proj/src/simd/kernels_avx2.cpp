// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "kolmo/simd.hpp"

namespace kolmo::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void increment_moments(int dim, const double* const* base, const double* const* shifted,
                       const double* sigma, double weight, double* acc_i, double* acc_l,
                       double* acc_t, std::size_t count) {
  const __m256d w = _mm256_set1_pd(weight);
  __m256d s[3];
  for (int a = 0; a < 3; ++a) s[a] = _mm256_set1_pd(a < dim ? sigma[a] : 0.0);

  std::size_t p = 0;
  for (; p + 4 <= count; p += 4) {
    __m256d delta[3];
    __m256d l = _mm256_setzero_pd();
    __m256d q = _mm256_setzero_pd();
    for (int a = 0; a < dim; ++a) {
      delta[a] = _mm256_sub_pd(_mm256_loadu_pd(shifted[a] + p), _mm256_loadu_pd(base[a] + p));
      l = _mm256_fmadd_pd(s[a], delta[a], l);
      q = _mm256_fmadd_pd(delta[a], delta[a], q);
    }
    __m256d t = _mm256_setzero_pd();
    for (int a = 0; a < dim; ++a) {
      const __m256d perp = _mm256_fnmadd_pd(l, s[a], delta[a]);
      t = _mm256_fmadd_pd(perp, perp, t);
    }
    const __m256d wl = _mm256_mul_pd(w, l);
    _mm256_storeu_pd(acc_i + p, _mm256_fmadd_pd(wl, q, _mm256_loadu_pd(acc_i + p)));
    _mm256_storeu_pd(acc_l + p,
                     _mm256_fmadd_pd(wl, _mm256_mul_pd(l, l), _mm256_loadu_pd(acc_l + p)));
    _mm256_storeu_pd(acc_t + p, _mm256_fmadd_pd(wl, t, _mm256_loadu_pd(acc_t + p)));
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

// Two complex numbers per register: [re0 im0 re1 im1].
inline __m256d cmul(__m256d a, __m256d b) {
  const __m256d b_re = _mm256_movedup_pd(b);
  const __m256d b_im = _mm256_permute_pd(b, 0xF);
  const __m256d a_swap = _mm256_permute_pd(a, 0x5);
  return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_swap, b_im));
}

void phase_multiply(const std::complex<double>* in, const std::complex<double>* phase,
                    std::complex<double> scale, std::complex<double>* out, std::size_t count) {
  const auto* pin = reinterpret_cast<const double*>(in);
  const auto* pph = reinterpret_cast<const double*>(phase);
  auto* pout = reinterpret_cast<double*>(out);
  const __m256d sc = _mm256_setr_pd(scale.real(), scale.imag(), scale.real(), scale.imag());
  std::size_t j = 0;
  for (; j + 2 <= count; j += 2) {
    const __m256d ph = cmul(_mm256_loadu_pd(pph + 2 * j), sc);
    _mm256_storeu_pd(pout + 2 * j, cmul(_mm256_loadu_pd(pin + 2 * j), ph));
  }
  if (j < count) scalar_table().phase_multiply(in + j, phase + j, scale, out + j, count - j);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scaled_add(double* out, const double* x, double a, const double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) out[i] = x[i] + a * y[i];
}

void scale_complex(std::complex<double>* z, const double* r, std::size_t n) {
  auto* pz = reinterpret_cast<double*>(z);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    // [r0 r0 r1 r1]
    const __m128d rr = _mm_loadu_pd(r + i);
    const __m256d rdup =
        _mm256_permute4x64_pd(_mm256_castpd128_pd256(rr), 0x50);  // 0,0,1,1
    _mm256_storeu_pd(pz + 2 * i, _mm256_mul_pd(_mm256_loadu_pd(pz + 2 * i), rdup));
  }
  for (; i < n; ++i) z[i] *= r[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sum(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i];
  return s;
}

std::complex<double> weighted_complex_sum(const double* w, const std::complex<double>* z,
                                          std::size_t n) {
  const auto* pz = reinterpret_cast<const double*>(z);
  __m256d acc = _mm256_setzero_pd();  // [re im re im]
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m128d ww = _mm_loadu_pd(w + i);
    const __m256d wdup = _mm256_permute4x64_pd(_mm256_castpd128_pd256(ww), 0x50);
    acc = _mm256_fmadd_pd(wdup, _mm256_loadu_pd(pz + 2 * i), acc);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double re = lanes[0] + lanes[2];
  double im = lanes[1] + lanes[3];
  for (; i < n; ++i) {
    re += w[i] * z[i].real();
    im += w[i] * z[i].imag();
  }
  return {re, im};
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{Backend::avx2, increment_moments, phase_multiply, axpy,
                             scaled_add,    scale_complex,     dot,            sum,
                             weighted_complex_sum};
  return t;
}

}  // namespace kolmo::simd
