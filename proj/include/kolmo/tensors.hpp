#pragma once

#include <boost/rational.hpp>
#include <string_view>

#include "kolmo/grid.hpp"

namespace kolmo {

// Projections of an increment onto a direction y: identity, longitudinal
// (yy^T/|y|^2) and transverse (I - yy^T/|y|^2).
enum class TensorKind { I, L, T };

std::string_view name(TensorKind k);
TensorKind parse_tensor_kind(std::string_view s);  // "I", "L", "T"

// Matrix of T_kind(y) in the first `dim` coordinates; y need not be unit.
Mat tensor_matrix(TensorKind k, const Vec& y, int dim);
Vec apply_tensor(TensorKind k, const Vec& y, const Vec& v, int dim);

// C_kind: d/4, d(d+2)/12, d(d+2)/(4(d-1)); S_kind carries this factor.
double structure_constant(TensorKind k, int dim);
boost::rational<long> structure_constant_exact(TensorKind k, int dim);

// Weights of the additivity identity
//   (4/d) S_I = (12/(d(d+2))) S_L + (4(d-1)/(d(d+2))) S_T,
// i.e. 1 / C_kind.
double additivity_weight(TensorKind k, int dim);

// 3/(d+2) + 1/(4 C_T), which equals 1.
boost::rational<long> transverse_constant_check(int dim);

double dot(const Vec& a, const Vec& b, int dim);
double norm(const Vec& a, int dim);

}  // namespace kolmo
