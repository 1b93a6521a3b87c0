#include "kolmo/norms.hpp"

#include <cmath>
#include <vector>

#include "kolmo/error.hpp"
#include "kolmo/simd.hpp"
#include "kolmo/spectral.hpp"

namespace kolmo {
namespace {

constexpr std::size_t kBlock = 256;

double pairwise(const double* x, std::size_t n) {
  if (n <= kBlock) return simd::active().sum(x, n);
  // split on a block boundary so the tree shape depends on n only
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  const std::size_t left = blocks / 2 * kBlock;
  return pairwise(x, left) + pairwise(x + left, n - left);
}

template <class Fn>
double spectral_sum(const SpectralField& s, Fn&& weight) {
  const Grid& g = s.grid();
  const auto half = static_cast<std::size_t>(g.half());
  std::vector<double> rows(g.spectral_rows() * static_cast<std::size_t>(s.components()));
  for (int c = 0; c < s.components(); ++c) {
    auto comp = s.component(c);
    for (std::size_t row = 0; row < g.spectral_rows(); ++row) {
      double acc = 0.0;
      auto k = g.mode(row, 0);
      for (std::size_t j = 0; j < half; ++j) {
        k[g.dim() - 1] = static_cast<int>(j);
        acc += g.hermitian_weight(static_cast<int>(j)) * weight(k) * std::norm(comp[row * half + j]);
      }
      rows[static_cast<std::size_t>(c) * g.spectral_rows() + row] = acc;
    }
  }
  return pairwise_sum(rows);
}

}  // namespace

double pairwise_sum(std::span<const double> x) { return x.empty() ? 0.0 : pairwise(x.data(), x.size()); }

double integral(std::span<const double> values, const Grid& grid) {
  if (values.size() != grid.size()) throw InvalidArgument("integral: size mismatch");
  return grid.cell_volume() * pairwise_sum(values);
}

double inner(const Field& a, const Field& b) {
  if (!a.same_shape(b)) throw InvalidArgument("inner: shape mismatch");
  const Grid& g = a.grid();
  std::vector<double> parts;
  for (int c = 0; c < a.components(); ++c) {
    auto x = a.component(c);
    auto y = b.component(c);
    for (std::size_t p = 0; p < g.size(); p += kBlock) {
      parts.push_back(simd::active().dot(x.data() + p, y.data() + p, std::min(kBlock, g.size() - p)));
    }
  }
  return g.cell_volume() * pairwise_sum(parts);
}

double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

double lp_norm(const Field& f, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("lp_norm: p must be >= 1");
  const Grid& g = f.grid();
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double s = 0.0;
    for (int c = 0; c < f.components(); ++c) s += f.component(c)[i] * f.component(c)[i];
    v[i] = std::pow(std::sqrt(s), p);
  }
  return std::pow(integral(v, g), 1.0 / p);
}

double max_norm(const Field& f) {
  double m = 0.0;
  for (double x : f.data()) m = std::max(m, std::abs(x));
  return m;
}

double spectral_energy(const SpectralField& s) {
  return spectral_sum(s, [](const std::array<int, 3>&) { return 1.0; });
}

double gradient_norm_squared(const SpectralField& s) {
  const Grid& g = s.grid();
  const int n = g.n();
  const double sum = spectral_sum(s, [n](const std::array<int, 3>& k) {
    double k2 = 0.0;
    for (int v : k) {
      const int kd = (v == n / 2 || v == -n / 2) ? 0 : v;
      k2 += static_cast<double>(kd) * kd;
    }
    return k2;
  });
  return g.volume() * sum;
}

double gradient_norm_squared(const Field& f) { return gradient_norm_squared(forward_transform(f)); }

}  // namespace kolmo
