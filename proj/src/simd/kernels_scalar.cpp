#include "kolmo/simd.hpp"

namespace kolmo::simd {
namespace {

void increment_moments(int dim, const double* const* base, const double* const* shifted,
                       const double* sigma, double weight, double* acc_i, double* acc_l,
                       double* acc_t, std::size_t count) {
  for (std::size_t p = 0; p < count; ++p) {
    double delta[3] = {0.0, 0.0, 0.0};
    double l = 0.0;
    double q = 0.0;
    for (int a = 0; a < dim; ++a) {
      delta[a] = shifted[a][p] - base[a][p];
      l += sigma[a] * delta[a];
      q += delta[a] * delta[a];
    }
    double t = 0.0;
    for (int a = 0; a < dim; ++a) {
      const double perp = delta[a] - l * sigma[a];
      t += perp * perp;
    }
    const double wl = weight * l;
    acc_i[p] += wl * q;
    acc_l[p] += wl * (l * l);
    acc_t[p] += wl * t;
  }
}

void phase_multiply(const std::complex<double>* in, const std::complex<double>* phase,
                    std::complex<double> scale, std::complex<double>* out, std::size_t count) {
  for (std::size_t j = 0; j < count; ++j) {
    const double pr = phase[j].real() * scale.real() - phase[j].imag() * scale.imag();
    const double pi = phase[j].real() * scale.imag() + phase[j].imag() * scale.real();
    const double ar = in[j].real();
    const double ai = in[j].imag();
    out[j] = {ar * pr - ai * pi, ar * pi + ai * pr};
  }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scaled_add(double* out, const double* x, double a, const double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * y[i];
}

void scale_complex(std::complex<double>* z, const double* r, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) z[i] *= r[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sum(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

std::complex<double> weighted_complex_sum(const double* w, const std::complex<double>* z,
                                          std::size_t n) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += w[i] * z[i].real();
    im += w[i] * z[i].imag();
  }
  return {re, im};
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{Backend::scalar, increment_moments, phase_multiply, axpy,
                             scaled_add,      scale_complex,     dot,            sum,
                             weighted_complex_sum};
  return t;
}

}  // namespace kolmo::simd
