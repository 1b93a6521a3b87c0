#include "kolmo/grid.hpp"

#include <cmath>
#include <string>

#include "kolmo/error.hpp"

namespace kolmo {

Grid::Grid(int dim, int n) : dim_(dim), n_(n) {
  if (dim != 2 && dim != 3) throw InvalidArgument("grid dimension must be 2 or 3");
  if (n < 8 || (n & (n - 1)) != 0) {
    throw InvalidArgument("grid resolution must be a power of two >= 8, got " + std::to_string(n));
  }
  size_ = 1;
  for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(n);
  spectral_size_ = size_ / static_cast<std::size_t>(n) * static_cast<std::size_t>(n / 2 + 1);
}

double Grid::cell_volume() const noexcept { return std::pow(spacing(), dim_); }

double Grid::volume() const noexcept { return std::pow(kTwoPi, dim_); }

std::array<int, 3> Grid::mode(std::size_t row, int j) const noexcept {
  std::array<int, 3> k{0, 0, 0};
  k[dim_ - 1] = j;
  std::size_t r = row;
  for (int a = dim_ - 2; a >= 0; --a) {
    k[a] = wavenumber(static_cast<int>(r % static_cast<std::size_t>(n_)));
    r /= static_cast<std::size_t>(n_);
  }
  return k;
}

Vec Grid::point(std::size_t index) const noexcept {
  Vec x{0.0, 0.0, 0.0};
  const double h = spacing();
  for (int a = dim_ - 1; a >= 0; --a) {
    x[a] = h * static_cast<double>(index % static_cast<std::size_t>(n_));
    index /= static_cast<std::size_t>(n_);
  }
  return x;
}

std::size_t Grid::index(const std::array<long, 3>& i) const noexcept {
  std::size_t idx = 0;
  for (int a = 0; a < dim_; ++a) {
    const long m = ((i[a] % n_) + n_) % n_;
    idx = idx * static_cast<std::size_t>(n_) + static_cast<std::size_t>(m);
  }
  return idx;
}

}  // namespace kolmo
