#pragma once

#include <functional>
#include <vector>

namespace kolmo {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

// Adaptive integral of f over [a, b] to the given tolerances.
double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol = 1e-14,
                 double rel_tol = 1e-13);

}  // namespace kolmo
