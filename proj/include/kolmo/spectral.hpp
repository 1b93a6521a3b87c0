#pragma once

#include <functional>
#include <span>

#include "kolmo/field.hpp"

namespace kolmo {

// Forward transform to normalized coefficients. Rejects non-finite input.
SpectralField forward_transform(const Field& f);
Field inverse_transform(const SpectralField& s);

// Single-component transforms on raw buffers of one grid. `in` is preserved.
void forward_component(const Grid& grid, std::span<const double> in,
                       std::span<std::complex<double>> out);
void inverse_component(const Grid& grid, std::span<const std::complex<double>> in,
                       std::span<double> out);

// Translation f(. + y) by spectral phase multiplication; exact for band-limited
// data. Nyquist modes are interpreted as cosines, so grid-aligned shifts are
// exact circular shifts for any input.
SpectralField shift_spectral(const SpectralField& s, const Vec& y);
Field shift(const Field& f, const Vec& y);

// Evaluates u(. + y) for many offsets y from one set of coefficients.
class ShiftSampler {
 public:
  explicit ShiftSampler(const Field& u);
  explicit ShiftSampler(SpectralField coefficients);

  const Grid& grid() const noexcept { return coefficients_.grid(); }
  int components() const noexcept { return coefficients_.components(); }
  const SpectralField& coefficients() const noexcept { return coefficients_; }

  // Writes u(. + y) into `out` (same shape as u). `scratch` is resized as
  // needed; pass a per-thread buffer when sampling concurrently.
  void sample(const Vec& y, Field& out, ComplexBuffer& scratch) const;

 private:
  SpectralField coefficients_;
};

// Per-axis phase factors exp(i k_a y_a) (cos for Nyquist) for one offset.
struct ShiftPhases {
  ShiftPhases(const Grid& grid, const Vec& y);
  // Phase of spectral row `row` (product over all axes but the last).
  std::complex<double> row_phase(const Grid& grid, std::size_t row) const noexcept;
  std::array<ComplexBuffer, 3> axis;
};

// Spectral calculus. Derivatives use the derivative wavenumber (Nyquist -> 0).
Field partial(const Field& f, int axis);
Field gradient(const Field& scalar);
Field divergence(const Field& v);
Field laplacian(const Field& f);

// max_x |div v| computed spectrally.
double max_divergence(const Field& v);

// Orthogonal projection onto divergence-free fields; the mean is kept.
Field leray_project(const Field& f);
void leray_project_inplace(SpectralField& s);

// Zeroes every mode with some |k_a| > n/3.
void dealias_inplace(SpectralField& s);
Field dealias(const Field& f);
// Largest coefficient magnitude outside the 2/3 box.
double max_aliased_coefficient(const SpectralField& s);

// Zero-mean pressure solving  Lap p = div f - d_i d_j (u^i u^j). The product
// spectrum is truncated to the 2/3 box, which makes it exact for dealiased u.
// `forcing` may be null (f = 0).
Field pressure_from_velocity(const Field& u, const Field* forcing);

// Same with the stress tensor u^i u^j supplied directly as d(d+1)/2 components
// in the order (0,0), (0,1), ..., (0,d-1), (1,1), ..., (d-1,d-1).
Field pressure_from_stress(const Field& stress, const Field* forcing);

// Multiplies every mode by m(|k|), |k| from the derivative wavenumber. m is
// evaluated once per distinct |k|^2.
void apply_radial_multiplier(SpectralField& s, const std::function<double(double)>& m);

// Isotropic matrix multiplier a(|k|) I + b(|k|) khat khat^T on a vector field.
// At k = 0 only a(0) is applied.
struct IsotropicMultiplier {
  double a = 0.0;
  double b = 0.0;
};
void apply_matrix_multiplier(SpectralField& s, const std::function<IsotropicMultiplier(double)>& m);

// Scalar a(|k|) tr M + b(|k|) khat^T M khat of a symmetric tensor field M given
// in the packed layout below; at k = 0 only a(0) tr M.
Field contract_matrix_multiplier(const Field& packed, const std::function<IsotropicMultiplier(double)>& m);

// Index of the (i, j) entry, i <= j, in the packed symmetric-tensor layout.
int packed_index(int dim, int i, int j) noexcept;

}  // namespace kolmo
