#pragma once

#include <span>

#include "kolmo/field.hpp"

namespace kolmo {

// Pairwise summation over fixed-size blocks; the result depends only on the
// input, never on the thread count.
double pairwise_sum(std::span<const double> x);

// Grid quadrature over [0, 2pi)^d (unnormalized: the box volume is (2pi)^d).
double integral(std::span<const double> values, const Grid& grid);
double inner(const Field& a, const Field& b);
double l2_norm(const Field& f);
double lp_norm(const Field& f, double p);  // (int |f|^p)^(1/p), |f| the pointwise Euclidean norm
double max_norm(const Field& f);           // max over points and components of |f^c|

// ||grad u||^2_{L^2} summed over components, evaluated spectrally.
double gradient_norm_squared(const SpectralField& s);
double gradient_norm_squared(const Field& f);

// sum over the full spectrum of |c_k|^2, so that ||f||^2 = (2pi)^d * spectral_energy.
double spectral_energy(const SpectralField& s);

}  // namespace kolmo
