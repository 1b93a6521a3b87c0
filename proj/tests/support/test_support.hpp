#pragma once

#include <cmath>
#include <cstdint>

#include "kolmo/field.hpp"
#include "kolmo/random.hpp"
#include "kolmo/spectral.hpp"

namespace kolmo::testing {

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const Field& a, const Field& b) { return max_abs_diff(a.data(), b.data()); }

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// Random real field with Fourier content in |k|_inf <= kmax, built in real
// space from cosines so it does not depend on the transform code.
inline Field random_field(const Grid& g, int components, std::uint64_t seed, int kmax = 4) {
  Rng rng(seed);
  Field f(g, components);
  const int d = g.dim();
  for (int c = 0; c < components; ++c) {
    auto comp = f.component(c);
    for (int m = 0; m < 12; ++m) {
      std::array<int, 3> k{0, 0, 0};
      for (int a = 0; a < d; ++a) k[a] = static_cast<int>(rng.uniform(-kmax, kmax + 1));
      const double amp = rng.normal();
      const double phase = rng.uniform(0.0, 6.283185307179586);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec x = g.point(i);
        comp[i] += amp * std::cos(k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + phase);
      }
    }
  }
  return f;
}

// Zero-mean solenoidal band-limited velocity.
inline Field random_solenoidal(const Grid& g, std::uint64_t seed, int kmax = 4) {
  SpectralField s = forward_transform(random_field(g, g.dim(), seed, kmax));
  leray_project_inplace(s);
  for (int c = 0; c < s.components(); ++c) s.component(c)[0] = 0.0;
  dealias_inplace(s);
  return inverse_transform(s);
}

// Taylor-Green vortex at t = 0 with wavenumber m (2D: stream function sin sin).
inline Field taylor_green(const Grid& g, int m = 1) {
  if (g.dim() == 2) {
    return Field::from_function(g, 2, [m](const Vec& x) {
      return Vec{std::sin(m * x[0]) * std::cos(m * x[1]), -std::cos(m * x[0]) * std::sin(m * x[1]), 0.0};
    });
  }
  return Field::from_function(g, 3, [m](const Vec& x) {
    return Vec{std::sin(m * x[0]) * std::cos(m * x[1]) * std::cos(m * x[2]),
               -std::cos(m * x[0]) * std::sin(m * x[1]) * std::cos(m * x[2]), 0.0};
  });
}

}  // namespace kolmo::testing
