#pragma once

#include <array>
#include <cstddef>
#include <numbers>

namespace kolmo {

using Vec = std::array<double, 3>;  // components beyond the grid dimension are zero
using Mat = std::array<Vec, 3>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Uniform periodic lattice on [0, 2pi)^d with n points per axis.
//
// Real-space index of point (i0, ..., i_{d-1}) is row-major with the last axis
// fastest; x_a = i_a * h. Spectral arrays use the real-to-complex half layout:
// all axes full length except the last, which holds n/2 + 1 modes.
class Grid {
 public:
  Grid() = default;

  // Throws InvalidArgument unless dim in {2, 3} and n is a power of two >= 8.
  Grid(int dim, int n);

  int dim() const noexcept { return dim_; }
  int n() const noexcept { return n_; }
  std::size_t size() const noexcept { return size_; }
  std::size_t spectral_size() const noexcept { return spectral_size_; }
  int half() const noexcept { return n_ / 2 + 1; }  // length of the last spectral axis
  std::size_t spectral_rows() const noexcept { return spectral_size_ / half(); }

  double spacing() const noexcept { return kTwoPi / n_; }
  double cell_volume() const noexcept;
  double volume() const noexcept;

  // Signed wavenumber of index i on a full axis, in [-n/2, n/2).
  int wavenumber(int i) const noexcept { return i < n_ / 2 ? i : i - n_; }
  // Wavenumber used for derivatives: the Nyquist mode is treated as zero.
  int derivative_wavenumber(int i) const noexcept {
    const int k = wavenumber(i);
    return k == -n_ / 2 ? 0 : k;
  }
  bool is_nyquist(int k) const noexcept { return k == n_ / 2 || k == -n_ / 2; }

  // Coordinates of real-space point `index`.
  Vec point(std::size_t index) const noexcept;
  // Real-space index of the lattice point with integer coordinates i (taken mod n).
  std::size_t index(const std::array<long, 3>& i) const noexcept;

  // Wavenumber vector of spectral row `row` (all axes but the last) and
  // last-axis index j in [0, n/2]. Uses the signed convention; the last-axis
  // Nyquist index j = n/2 reports +n/2.
  std::array<int, 3> mode(std::size_t row, int j) const noexcept;

  // Multiplicity of a half-spectrum coefficient when summing over the full
  // spectrum: 2 for 0 < j < n/2, otherwise 1.
  double hermitian_weight(int j) const noexcept { return (j == 0 || j == n_ / 2) ? 1.0 : 2.0; }

  // Largest |k_a| kept by the 2/3 truncation rule.
  int dealias_cutoff() const noexcept { return n_ / 3; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int dim_ = 0;
  int n_ = 0;
  std::size_t size_ = 0;
  std::size_t spectral_size_ = 0;
};

}  // namespace kolmo
