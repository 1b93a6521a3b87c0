#include "kolmo/tensors.hpp"

#include <cmath>
#include <string>

#include "kolmo/error.hpp"

namespace kolmo {
namespace {

void check_dim(int dim) {
  if (dim != 2 && dim != 3) throw InvalidArgument("dimension must be 2 or 3");
}

}  // namespace

std::string_view name(TensorKind k) {
  switch (k) {
    case TensorKind::I: return "I";
    case TensorKind::L: return "L";
    case TensorKind::T: return "T";
  }
  return "?";
}

TensorKind parse_tensor_kind(std::string_view s) {
  if (s == "I") return TensorKind::I;
  if (s == "L") return TensorKind::L;
  if (s == "T") return TensorKind::T;
  throw InvalidArgument("unknown projection '" + std::string(s) + "' (expected I, L or T)");
}

double dot(const Vec& a, const Vec& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a, int dim) { return std::sqrt(dot(a, a, dim)); }

Mat tensor_matrix(TensorKind k, const Vec& y, int dim) {
  check_dim(dim);
  Mat m{};
  if (k == TensorKind::I) {
    for (int i = 0; i < dim; ++i) m[i][i] = 1.0;
    return m;
  }
  const double r2 = dot(y, y, dim);
  if (!(r2 > 0.0)) throw InvalidArgument("tensor_matrix: direction must be nonzero");
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      const double l = y[i] * y[j] / r2;
      m[i][j] = k == TensorKind::L ? l : (i == j ? 1.0 : 0.0) - l;
    }
  }
  return m;
}

Vec apply_tensor(TensorKind k, const Vec& y, const Vec& v, int dim) {
  check_dim(dim);
  Vec out{0.0, 0.0, 0.0};
  if (k == TensorKind::I) {
    for (int i = 0; i < dim; ++i) out[i] = v[i];
    return out;
  }
  const double r2 = dot(y, y, dim);
  if (!(r2 > 0.0)) throw InvalidArgument("apply_tensor: direction must be nonzero");
  const double c = dot(y, v, dim) / r2;
  for (int i = 0; i < dim; ++i) {
    out[i] = k == TensorKind::L ? c * y[i] : v[i] - c * y[i];
  }
  return out;
}

boost::rational<long> structure_constant_exact(TensorKind k, int dim) {
  check_dim(dim);
  const long d = dim;
  switch (k) {
    case TensorKind::I: return {d, 4};
    case TensorKind::L: return {d * (d + 2), 12};
    case TensorKind::T: return {d * (d + 2), 4 * (d - 1)};
  }
  return {0};
}

double structure_constant(TensorKind k, int dim) {
  return boost::rational_cast<double>(structure_constant_exact(k, dim));
}

double additivity_weight(TensorKind k, int dim) {
  return boost::rational_cast<double>(1 / structure_constant_exact(k, dim));
}

boost::rational<long> transverse_constant_check(int dim) {
  check_dim(dim);
  const long d = dim;
  const boost::rational<long> ct(d + 2, 4 * (d - 1));
  return boost::rational<long>(3, d + 2) + 1 / (4 * ct);
}

}  // namespace kolmo
