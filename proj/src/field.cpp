#include "kolmo/field.hpp"

#include <fftw3.h>

#include <cmath>
#include <new>

#include "kolmo/error.hpp"

namespace kolmo {

void* fftw_aligned_alloc(std::size_t bytes) {
  void* p = fftw_malloc(bytes == 0 ? 1 : bytes);
  if (p == nullptr) throw std::bad_alloc();
  return p;
}

void fftw_aligned_free(void* p) noexcept { fftw_free(p); }

Field::Field(const Grid& grid, int components, double time)
    : grid_(grid), components_(components), time_(time) {
  if (components < 1) throw InvalidArgument("field needs at least one component");
  data_.assign(grid.size() * static_cast<std::size_t>(components), 0.0);
}

Field Field::from_function(const Grid& grid, int components,
                           const std::function<Vec(const Vec&)>& fn, double time) {
  Field f(grid, components, time);
  const std::size_t n = grid.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec v = fn(grid.point(i));
    for (int c = 0; c < components; ++c) f.data_[static_cast<std::size_t>(c) * n + i] = v[c];
  }
  return f;
}

Field Field::scalar_from_function(const Grid& grid, const std::function<double(const Vec&)>& fn,
                                  double time) {
  Field f(grid, 1, time);
  for (std::size_t i = 0; i < grid.size(); ++i) f.data_[i] = fn(grid.point(i));
  return f;
}

std::span<double> Field::component(int c) noexcept {
  return std::span<double>(data_).subspan(static_cast<std::size_t>(c) * grid_.size(),
                                          grid_.size());
}

std::span<const double> Field::component(int c) const noexcept {
  return std::span<const double>(data_).subspan(static_cast<std::size_t>(c) * grid_.size(),
                                                grid_.size());
}

bool Field::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

SpectralField::SpectralField(const Grid& grid, int components, double time)
    : grid_(grid), components_(components), time_(time) {
  data_.assign(grid.spectral_size() * static_cast<std::size_t>(components), {0.0, 0.0});
}

std::span<std::complex<double>> SpectralField::component(int c) noexcept {
  return std::span<std::complex<double>>(data_).subspan(
      static_cast<std::size_t>(c) * grid_.spectral_size(), grid_.spectral_size());
}

std::span<const std::complex<double>> SpectralField::component(int c) const noexcept {
  return std::span<const std::complex<double>>(data_).subspan(
      static_cast<std::size_t>(c) * grid_.spectral_size(), grid_.spectral_size());
}

std::complex<double> SpectralField::coefficient(int c, const std::array<int, 3>& k) const {
  const int d = grid_.dim();
  const int n = grid_.n();
  for (int a = 0; a < d; ++a) {
    if (k[a] < -n / 2 || k[a] > n / 2) throw InvalidArgument("wavenumber outside the grid");
  }
  auto wrap = [n](int v) { return ((v % n) + n) % n; };
  std::array<int, 3> idx{0, 0, 0};
  // The last-axis Nyquist -n/2 is the same lattice mode as +n/2, stored directly.
  const int last = k[d - 1];
  const bool conj = last < 0 && last != -n / 2;
  if (conj) {
    for (int a = 0; a < d; ++a) idx[a] = wrap(-k[a]);
  } else {
    for (int a = 0; a < d; ++a) idx[a] = wrap(k[a]);
  }
  std::size_t row = 0;
  for (int a = 0; a < d - 1; ++a) row = row * static_cast<std::size_t>(n) + idx[a];
  const int j = idx[d - 1];
  const auto v = component(c)[row * static_cast<std::size_t>(grid_.half()) + j];
  return conj ? std::conj(v) : v;
}

}  // namespace kolmo
