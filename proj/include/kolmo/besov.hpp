#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kolmo/field.hpp"

namespace kolmo {

// ||u(. + y) - u||_{L^2} for one offset, via Parseval on the coefficients.
double increment_l2_norm(const SpectralField& s, const Vec& y);

// sup over `shifts` of |y|^{-alpha} ||u(. + y) - u||_{L^2}.
// Requires 0 < alpha <= 1, a nonempty shift set and 0 < |y| <= pi for each y.
double besov_seminorm(const Field& u, double alpha, std::span<const Vec> shifts);
double besov_seminorm(const SpectralField& s, double alpha, std::span<const Vec> shifts);

struct BesovShiftOptions {
  double max_radius = 0.7853981633974483;  // pi/4
  int random_directions = 32;              // per dyadic magnitude
  std::uint64_t seed = 0x5eed;
};

// All grid-aligned offsets with 0 < |y| <= max_radius, followed by
// `random_directions` seeded unit directions at each dyadic magnitude
// max_radius * 2^-j >= h.
std::vector<Vec> besov_shift_set(const Grid& grid, const BesovShiftOptions& opts = {});

struct ExponentFit {
  double alpha = 0.0;      // fitted slope of log ||delta_y u|| against log |y|
  double intercept = 0.0;
  int points = 0;
};

// Least-squares slope of the direction-averaged log increment norm over the
// dyadic magnitudes in [r_min, r_max]; the estimate of alpha = zeta_2 / 2.
ExponentFit fit_besov_exponent(const SpectralField& s, double r_min, double r_max,
                               int directions = 32, std::uint64_t seed = 0x5eed);

}  // namespace kolmo
