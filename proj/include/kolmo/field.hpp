#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "kolmo/grid.hpp"

namespace kolmo {

// Allocator backed by fftw_malloc so every buffer satisfies the alignment the
// transform plans were created with.
template <class T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() noexcept = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}
  T* allocate(std::size_t n);
  void deallocate(T* p, std::size_t) noexcept;
  template <class U>
  bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

void* fftw_aligned_alloc(std::size_t bytes);
void fftw_aligned_free(void* p) noexcept;

template <class T>
T* FftwAllocator<T>::allocate(std::size_t n) {
  return static_cast<T*>(fftw_aligned_alloc(n * sizeof(T)));
}
template <class T>
void FftwAllocator<T>::deallocate(T* p, std::size_t) noexcept {
  fftw_aligned_free(p);
}

using RealBuffer = std::vector<double, FftwAllocator<double>>;
using ComplexBuffer = std::vector<std::complex<double>, FftwAllocator<std::complex<double>>>;

// Real multi-component field on a Grid. A velocity field has dim components, a
// scalar (pressure, flux density) has one. Storage is component-major.
class Field {
 public:
  Field() = default;
  Field(const Grid& grid, int components, double time = 0.0);

  static Field from_function(const Grid& grid, int components,
                             const std::function<Vec(const Vec&)>& fn, double time = 0.0);
  static Field scalar_from_function(const Grid& grid, const std::function<double(const Vec&)>& fn,
                                    double time = 0.0);

  const Grid& grid() const noexcept { return grid_; }
  int components() const noexcept { return components_; }
  double time() const noexcept { return time_; }
  void set_time(double t) noexcept { time_ = t; }
  bool is_vector() const noexcept { return components_ == grid_.dim(); }

  std::span<double> component(int c) noexcept;
  std::span<const double> component(int c) const noexcept;
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool all_finite() const noexcept;
  bool same_shape(const Field& other) const noexcept {
    return grid_ == other.grid_ && components_ == other.components_;
  }

 private:
  Grid grid_;
  int components_ = 0;
  double time_ = 0.0;
  RealBuffer data_;
};

// Normalized half-spectrum coefficients of a real field:
//   f(x) = sum_k c_k exp(i k.x),  c_k = n^{-d} sum_x f(x) exp(-i k.x).
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(const Grid& grid, int components, double time = 0.0);

  const Grid& grid() const noexcept { return grid_; }
  int components() const noexcept { return components_; }
  double time() const noexcept { return time_; }
  void set_time(double t) noexcept { time_ = t; }

  std::span<std::complex<double>> component(int c) noexcept;
  std::span<const std::complex<double>> component(int c) const noexcept;
  std::span<std::complex<double>> data() noexcept { return data_; }
  std::span<const std::complex<double>> data() const noexcept { return data_; }

  // Coefficient for an arbitrary signed wavenumber, using Hermitian symmetry
  // for modes outside the stored half.
  std::complex<double> coefficient(int c, const std::array<int, 3>& k) const;

 private:
  Grid grid_;
  int components_ = 0;
  double time_ = 0.0;
  ComplexBuffer data_;
};

}  // namespace kolmo
