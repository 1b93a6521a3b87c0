#include "kolmo/besov.hpp"

#include <cmath>
#include <numbers>

#include "kolmo/error.hpp"
#include "kolmo/norms.hpp"
#include "kolmo/parallel.hpp"
#include "kolmo/random.hpp"
#include "kolmo/simd.hpp"
#include "kolmo/spectral.hpp"

namespace kolmo {
namespace {

double norm3(const Vec& y) { return std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]); }

// Hermitian-weighted spectral energy per stored mode, summed over components.
RealBuffer mode_energy(const SpectralField& s) {
  const Grid& g = s.grid();
  const auto half = static_cast<std::size_t>(g.half());
  RealBuffer w(g.spectral_size(), 0.0);
  for (int c = 0; c < s.components(); ++c) {
    auto comp = s.component(c);
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] += g.hermitian_weight(static_cast<int>(i % half)) * std::norm(comp[i]);
    }
  }
  return w;
}

// sum_k w_k |e_k(y) - 1|^2 where e_k(y) is the shift phase of mode k.
double increment_energy(const Grid& g, const RealBuffer& w, const Vec& y) {
  const ShiftPhases ph(g, y);
  const auto& kt = simd::active();
  const auto half = static_cast<std::size_t>(g.half());
  const auto& last = ph.axis[g.dim() - 1];
  RealBuffer abs2(half);
  for (std::size_t j = 0; j < half; ++j) abs2[j] = std::norm(last[j]);
  std::vector<double> rows(g.spectral_rows());
  for (std::size_t row = 0; row < g.spectral_rows(); ++row) {
    const double* wr = w.data() + row * half;
    const std::complex<double> rp = ph.row_phase(g, row);
    const double mod = std::norm(rp) * kt.dot(wr, abs2.data(), half);
    const double total = kt.sum(wr, half);
    const std::complex<double> cross = rp * kt.weighted_complex_sum(wr, last.data(), half);
    rows[row] = mod + total - 2.0 * cross.real();
  }
  return std::max(0.0, pairwise_sum(rows));
}

void check_shift(const Vec& y) {
  const double r = norm3(y);
  if (!(r > 0.0) || r > std::numbers::pi + 1e-12) {
    throw InvalidArgument("besov: shift magnitudes must lie in (0, pi]");
  }
}

}  // namespace

double increment_l2_norm(const SpectralField& s, const Vec& y) {
  return std::sqrt(s.grid().volume() * increment_energy(s.grid(), mode_energy(s), y));
}

double besov_seminorm(const SpectralField& s, double alpha, std::span<const Vec> shifts) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("besov: alpha must lie in (0, 1]");
  if (shifts.empty()) throw InvalidArgument("besov: empty shift set");
  for (const Vec& y : shifts) check_shift(y);
  const Grid& g = s.grid();
  const RealBuffer w = mode_energy(s);
  std::vector<double> values(shifts.size());
  parallel_for(shifts.size(), [&](std::size_t i) {
    const double e = std::sqrt(g.volume() * increment_energy(g, w, shifts[i]));
    values[i] = e / std::pow(norm3(shifts[i]), alpha);
  });
  double sup = 0.0;
  for (double v : values) sup = std::max(sup, v);
  return sup;
}

double besov_seminorm(const Field& u, double alpha, std::span<const Vec> shifts) {
  return besov_seminorm(forward_transform(u), alpha, shifts);
}

std::vector<Vec> besov_shift_set(const Grid& grid, const BesovShiftOptions& opts) {
  if (!(opts.max_radius > 0.0) || opts.max_radius > std::numbers::pi) {
    throw InvalidArgument("besov_shift_set: max_radius must lie in (0, pi]");
  }
  const double h = grid.spacing();
  const int d = grid.dim();
  const long m = static_cast<long>(std::floor(opts.max_radius / h + 1e-9));
  std::vector<Vec> out;
  std::array<long, 3> i{0, 0, 0};
  const long lo2 = d == 3 ? -m : 0;
  const long hi2 = d == 3 ? m : 0;
  for (i[0] = -m; i[0] <= m; ++i[0]) {
    for (i[1] = -m; i[1] <= m; ++i[1]) {
      for (i[2] = lo2; i[2] <= hi2; ++i[2]) {
        const long q = i[0] * i[0] + i[1] * i[1] + i[2] * i[2];
        if (q == 0 || std::sqrt(static_cast<double>(q)) * h > opts.max_radius * (1 + 1e-12)) continue;
        out.push_back({h * i[0], h * i[1], h * i[2]});
      }
    }
  }
  Rng rng(opts.seed);
  for (double r = opts.max_radius; r >= h * (1 - 1e-12); r *= 0.5) {
    for (int k = 0; k < opts.random_directions; ++k) {
      Vec v{0.0, 0.0, 0.0};
      double len = 0.0;
      while (len < 1e-8) {
        for (int a = 0; a < d; ++a) v[a] = rng.normal();
        len = norm3(v);
      }
      for (int a = 0; a < d; ++a) v[a] *= r / len;
      out.push_back(v);
    }
  }
  return out;
}

ExponentFit fit_besov_exponent(const SpectralField& s, double r_min, double r_max, int directions,
                               std::uint64_t seed) {
  if (!(r_min > 0.0 && r_max >= r_min && r_max <= std::numbers::pi)) {
    throw InvalidArgument("fit_besov_exponent: need 0 < r_min <= r_max <= pi");
  }
  if (directions < 1) throw InvalidArgument("fit_besov_exponent: directions must be positive");
  const Grid& g = s.grid();
  const int d = g.dim();
  const RealBuffer w = mode_energy(s);
  Rng rng(seed);
  std::vector<double> xs, ys;
  for (double r = r_max; r >= r_min * (1 - 1e-12); r *= 0.5) {
    double acc = 0.0;
    for (int k = 0; k < directions; ++k) {
      Vec v{0.0, 0.0, 0.0};
      double len = 0.0;
      while (len < 1e-8) {
        for (int a = 0; a < d; ++a) v[a] = rng.normal();
        len = norm3(v);
      }
      for (int a = 0; a < d; ++a) v[a] *= r / len;
      acc += g.volume() * increment_energy(g, w, v);
    }
    const double rms = std::sqrt(acc / directions);
    if (rms > 0.0) {
      xs.push_back(std::log(r));
      ys.push_back(std::log(rms));
    }
  }
  ExponentFit fit;
  fit.points = static_cast<int>(xs.size());
  if (fit.points < 2) return fit;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= ys.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  fit.alpha = sxy / sxx;
  fit.intercept = my - fit.alpha * mx;
  return fit;
}

}  // namespace kolmo
