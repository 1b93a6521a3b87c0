#include "kolmo/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <unordered_map>
#include <mutex>
#include <tuple>

#include "kolmo/error.hpp"
#include "kolmo/simd.hpp"

namespace kolmo {
namespace {

enum class PlanKind { r2c, c2r };

// FFTW planning is not thread-safe; execution with the new-array interface is.
class PlanCache {
 public:
  fftw_plan get(const Grid& grid, PlanKind kind) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(grid.dim(), grid.n(), kind);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    int dims[3] = {grid.n(), grid.n(), grid.n()};
    RealBuffer r(grid.size());
    ComplexBuffer c(grid.spectral_size());
    auto* cp = reinterpret_cast<fftw_complex*>(c.data());
    fftw_plan p = kind == PlanKind::r2c
                      ? fftw_plan_dft_r2c(grid.dim(), dims, r.data(), cp, FFTW_ESTIMATE)
                      : fftw_plan_dft_c2r(grid.dim(), dims, cp, r.data(), FFTW_ESTIMATE);
    if (p == nullptr) throw Error("FFTW failed to create a plan");
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, PlanKind>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

bool aligned(const void* p) { return fftw_alignment_of(static_cast<double*>(const_cast<void*>(p))) == 0; }

}  // namespace

void forward_component(const Grid& grid, std::span<const double> in,
                       std::span<std::complex<double>> out) {
  if (in.size() != grid.size() || out.size() != grid.spectral_size()) {
    throw InvalidArgument("forward_component: buffer size mismatch");
  }
  fftw_plan p = plan_cache().get(grid, PlanKind::r2c);
  thread_local RealBuffer in_copy;
  thread_local ComplexBuffer out_copy;
  const double* src = in.data();
  if (!aligned(src)) {
    in_copy.assign(in.begin(), in.end());
    src = in_copy.data();
  }
  std::complex<double>* dst = out.data();
  const bool out_aligned = aligned(dst);
  if (!out_aligned) {
    out_copy.resize(out.size());
    dst = out_copy.data();
  }
  fftw_execute_dft_r2c(p, const_cast<double*>(src), reinterpret_cast<fftw_complex*>(dst));
  if (!out_aligned) std::copy(out_copy.begin(), out_copy.end(), out.begin());
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (auto& v : out) v *= scale;
}

void inverse_component(const Grid& grid, std::span<const std::complex<double>> in,
                       std::span<double> out) {
  if (in.size() != grid.spectral_size() || out.size() != grid.size()) {
    throw InvalidArgument("inverse_component: buffer size mismatch");
  }
  fftw_plan p = plan_cache().get(grid, PlanKind::c2r);
  thread_local ComplexBuffer in_copy;  // c2r overwrites its input
  thread_local RealBuffer out_copy;
  in_copy.assign(in.begin(), in.end());
  double* dst = out.data();
  const bool out_aligned = aligned(dst);
  if (!out_aligned) {
    out_copy.resize(out.size());
    dst = out_copy.data();
  }
  fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(in_copy.data()), dst);
  if (!out_aligned) std::copy(out_copy.begin(), out_copy.end(), out.begin());
}

SpectralField forward_transform(const Field& f) {
  if (!f.all_finite()) throw InvalidArgument("forward_transform: field has non-finite entries");
  SpectralField s(f.grid(), f.components(), f.time());
  for (int c = 0; c < f.components(); ++c) forward_component(f.grid(), f.component(c), s.component(c));
  return s;
}

Field inverse_transform(const SpectralField& s) {
  Field f(s.grid(), s.components(), s.time());
  for (int c = 0; c < s.components(); ++c) inverse_component(s.grid(), s.component(c), f.component(c));
  return f;
}

ShiftPhases::ShiftPhases(const Grid& grid, const Vec& y) {
  const int n = grid.n();
  for (int a = 0; a < grid.dim(); ++a) {
    const bool last = a == grid.dim() - 1;
    const int len = last ? grid.half() : n;
    axis[a].resize(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) {
      const int k = last ? i : grid.wavenumber(i);
      if (grid.is_nyquist(k)) {
        axis[a][i] = {std::cos(0.5 * n * y[a]), 0.0};
      } else {
        const double arg = k * y[a];
        axis[a][i] = {std::cos(arg), std::sin(arg)};
      }
    }
  }
}

std::complex<double> ShiftPhases::row_phase(const Grid& grid, std::size_t row) const noexcept {
  std::complex<double> c{1.0, 0.0};
  const auto n = static_cast<std::size_t>(grid.n());
  for (int a = grid.dim() - 2; a >= 0; --a) {
    c *= axis[a][row % n];
    row /= n;
  }
  return c;
}

namespace {

void apply_shift(const Grid& grid, const ShiftPhases& ph, std::span<const std::complex<double>> in,
                 std::span<std::complex<double>> out) {
  const auto& k = simd::active();
  const auto half = static_cast<std::size_t>(grid.half());
  const int last = grid.dim() - 1;
  for (std::size_t row = 0; row < grid.spectral_rows(); ++row) {
    k.phase_multiply(in.data() + row * half, ph.axis[last].data(), ph.row_phase(grid, row),
                     out.data() + row * half, half);
  }
}

}  // namespace

SpectralField shift_spectral(const SpectralField& s, const Vec& y) {
  SpectralField out(s.grid(), s.components(), s.time());
  const ShiftPhases ph(s.grid(), y);
  for (int c = 0; c < s.components(); ++c) apply_shift(s.grid(), ph, s.component(c), out.component(c));
  return out;
}

Field shift(const Field& f, const Vec& y) { return inverse_transform(shift_spectral(forward_transform(f), y)); }

ShiftSampler::ShiftSampler(const Field& u) : coefficients_(forward_transform(u)) {}

ShiftSampler::ShiftSampler(SpectralField coefficients) : coefficients_(std::move(coefficients)) {}

void ShiftSampler::sample(const Vec& y, Field& out, ComplexBuffer& scratch) const {
  const Grid& g = grid();
  if (!(out.grid() == g) || out.components() != components()) {
    out = Field(g, components(), coefficients_.time());
  }
  const ShiftPhases ph(g, y);
  scratch.resize(g.spectral_size());
  for (int c = 0; c < components(); ++c) {
    apply_shift(g, ph, coefficients_.component(c), scratch);
    inverse_component(g, scratch, out.component(c));
  }
}

namespace {

// Calls fn(index, kd) for every stored mode with the derivative wavenumber.
template <class Fn>
void for_each_mode(const Grid& g, Fn&& fn) {
  const auto half = static_cast<std::size_t>(g.half());
  const int n = g.n();
  for (std::size_t row = 0; row < g.spectral_rows(); ++row) {
    std::array<int, 3> k = g.mode(row, 0);
    for (int a = 0; a < g.dim() - 1; ++a) {
      if (k[a] == -n / 2) k[a] = 0;
    }
    for (std::size_t j = 0; j < half; ++j) {
      k[g.dim() - 1] = static_cast<int>(j) == n / 2 ? 0 : static_cast<int>(j);
      fn(row * half + j, k);
    }
  }
}

}  // namespace

Field partial(const Field& f, int axis) {
  if (axis < 0 || axis >= f.grid().dim()) throw InvalidArgument("partial: axis out of range");
  SpectralField s = forward_transform(f);
  for (int c = 0; c < s.components(); ++c) {
    auto comp = s.component(c);
    for_each_mode(f.grid(), [&](std::size_t i, const std::array<int, 3>& k) {
      comp[i] *= std::complex<double>(0.0, k[axis]);
    });
  }
  return inverse_transform(s);
}

Field gradient(const Field& scalar) {
  if (scalar.components() != 1) throw InvalidArgument("gradient: expects a scalar field");
  const Grid& g = scalar.grid();
  const SpectralField s = forward_transform(scalar);
  SpectralField out(g, g.dim(), scalar.time());
  for (int a = 0; a < g.dim(); ++a) {
    auto dst = out.component(a);
    auto src = s.component(0);
    for_each_mode(g, [&](std::size_t i, const std::array<int, 3>& k) {
      dst[i] = src[i] * std::complex<double>(0.0, k[a]);
    });
  }
  return inverse_transform(out);
}

Field divergence(const Field& v) {
  if (!v.is_vector()) throw InvalidArgument("divergence: expects a vector field");
  const Grid& g = v.grid();
  const SpectralField s = forward_transform(v);
  SpectralField out(g, 1, v.time());
  auto dst = out.component(0);
  for (int a = 0; a < g.dim(); ++a) {
    auto src = s.component(a);
    for_each_mode(g, [&](std::size_t i, const std::array<int, 3>& k) {
      dst[i] += src[i] * std::complex<double>(0.0, k[a]);
    });
  }
  return inverse_transform(out);
}

Field laplacian(const Field& f) {
  SpectralField s = forward_transform(f);
  for (int c = 0; c < s.components(); ++c) {
    auto comp = s.component(c);
    for_each_mode(f.grid(), [&](std::size_t i, const std::array<int, 3>& k) {
      comp[i] *= -static_cast<double>(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    });
  }
  return inverse_transform(s);
}

double max_divergence(const Field& v) {
  const Field d = divergence(v);
  double m = 0.0;
  for (double x : d.data()) m = std::max(m, std::abs(x));
  return m;
}

void leray_project_inplace(SpectralField& s) {
  const Grid& g = s.grid();
  if (s.components() != g.dim()) throw InvalidArgument("leray_project: expects a vector field");
  const int d = g.dim();
  std::array<std::complex<double>*, 3> comp{};
  for (int a = 0; a < d; ++a) comp[a] = s.component(a).data();
  for_each_mode(g, [&](std::size_t i, const std::array<int, 3>& k) {
    const double k2 = static_cast<double>(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    if (k2 == 0.0) return;
    std::complex<double> kv{0.0, 0.0};
    for (int a = 0; a < d; ++a) kv += static_cast<double>(k[a]) * comp[a][i];
    kv /= k2;
    for (int a = 0; a < d; ++a) comp[a][i] -= static_cast<double>(k[a]) * kv;
  });
}

Field leray_project(const Field& f) {
  SpectralField s = forward_transform(f);
  leray_project_inplace(s);
  return inverse_transform(s);
}

void dealias_inplace(SpectralField& s) {
  const Grid& g = s.grid();
  const int cut = g.dealias_cutoff();
  const auto half = static_cast<std::size_t>(g.half());
  for (std::size_t row = 0; row < g.spectral_rows(); ++row) {
    const auto k = g.mode(row, 0);
    bool row_out = false;
    for (int a = 0; a < g.dim() - 1; ++a) row_out = row_out || std::abs(k[a]) > cut;
    for (int c = 0; c < s.components(); ++c) {
      auto comp = s.component(c);
      for (std::size_t j = 0; j < half; ++j) {
        if (row_out || static_cast<int>(j) > cut) comp[row * half + j] = 0.0;
      }
    }
  }
}

Field dealias(const Field& f) {
  SpectralField s = forward_transform(f);
  dealias_inplace(s);
  return inverse_transform(s);
}

double max_aliased_coefficient(const SpectralField& s) {
  const Grid& g = s.grid();
  const int cut = g.dealias_cutoff();
  const auto half = static_cast<std::size_t>(g.half());
  double m = 0.0;
  for (std::size_t row = 0; row < g.spectral_rows(); ++row) {
    const auto k = g.mode(row, 0);
    bool row_out = false;
    for (int a = 0; a < g.dim() - 1; ++a) row_out = row_out || std::abs(k[a]) > cut;
    for (int c = 0; c < s.components(); ++c) {
      auto comp = s.component(c);
      for (std::size_t j = 0; j < half; ++j) {
        if (row_out || static_cast<int>(j) > cut) m = std::max(m, std::abs(comp[row * half + j]));
      }
    }
  }
  return m;
}

void apply_radial_multiplier(SpectralField& s, const std::function<double(double)>& m) {
  std::unordered_map<long, double> cache;
  const Grid& g = s.grid();
  std::vector<double> factor(g.spectral_size());
  for_each_mode(g, [&](std::size_t i, const std::array<int, 3>& k) {
    const long k2 = static_cast<long>(k[0]) * k[0] + static_cast<long>(k[1]) * k[1] + static_cast<long>(k[2]) * k[2];
    auto it = cache.find(k2);
    if (it == cache.end()) it = cache.emplace(k2, m(std::sqrt(static_cast<double>(k2)))).first;
    factor[i] = it->second;
  });
  for (int c = 0; c < s.components(); ++c) simd::active().scale_complex(s.component(c).data(), factor.data(), factor.size());
}

void apply_matrix_multiplier(SpectralField& s, const std::function<IsotropicMultiplier(double)>& m) {
  const Grid& g = s.grid();
  const int d = g.dim();
  if (s.components() != d) throw InvalidArgument("apply_matrix_multiplier: expects a vector field");
  std::unordered_map<long, IsotropicMultiplier> cache;
  std::array<std::complex<double>*, 3> comp{};
  for (int a = 0; a < d; ++a) comp[a] = s.component(a).data();
  for_each_mode(g, [&](std::size_t i, const std::array<int, 3>& k) {
    const long k2 = static_cast<long>(k[0]) * k[0] + static_cast<long>(k[1]) * k[1] + static_cast<long>(k[2]) * k[2];
    auto it = cache.find(k2);
    if (it == cache.end()) it = cache.emplace(k2, m(std::sqrt(static_cast<double>(k2)))).first;
    const IsotropicMultiplier mm = it->second;
    if (k2 == 0) {
      for (int a = 0; a < d; ++a) comp[a][i] *= mm.a;
      return;
    }
    std::complex<double> kv{0.0, 0.0};
    for (int a = 0; a < d; ++a) kv += static_cast<double>(k[a]) * comp[a][i];
    kv *= mm.b / static_cast<double>(k2);
    for (int a = 0; a < d; ++a) comp[a][i] = mm.a * comp[a][i] + static_cast<double>(k[a]) * kv;
  });
}

Field contract_matrix_multiplier(const Field& packed, const std::function<IsotropicMultiplier(double)>& m) {
  const Grid& g = packed.grid();
  const int d = g.dim();
  if (packed.components() != d * (d + 1) / 2) {
    throw InvalidArgument("contract_matrix_multiplier: expects d(d+1)/2 tensor components");
  }
  const SpectralField s = forward_transform(packed);
  SpectralField out(g, 1, packed.time());
  auto dst = out.component(0);
  std::unordered_map<long, IsotropicMultiplier> cache;
  for_each_mode(g, [&](std::size_t i, const std::array<int, 3>& k) {
    const long k2 = static_cast<long>(k[0]) * k[0] + static_cast<long>(k[1]) * k[1] + static_cast<long>(k[2]) * k[2];
    auto it = cache.find(k2);
    if (it == cache.end()) it = cache.emplace(k2, m(std::sqrt(static_cast<double>(k2)))).first;
    const IsotropicMultiplier mm = it->second;
    std::complex<double> trace{0.0, 0.0}, kmk{0.0, 0.0};
    for (int a = 0; a < d; ++a) {
      trace += s.component(packed_index(d, a, a))[i];
      for (int b = 0; b < d; ++b) {
        kmk += static_cast<double>(k[a]) * static_cast<double>(k[b]) * s.component(packed_index(d, a, b))[i];
      }
    }
    dst[i] = mm.a * trace + (k2 == 0 ? 0.0 : mm.b / static_cast<double>(k2)) * kmk;
  });
  return inverse_transform(out);
}

int packed_index(int dim, int i, int j) noexcept {
  if (i > j) std::swap(i, j);
  // rows 0..i-1 hold dim, dim-1, ... entries
  return i * dim - i * (i - 1) / 2 + (j - i);
}

Field pressure_from_stress(const Field& stress, const Field* forcing) {
  const Grid& g = stress.grid();
  const int d = g.dim();
  if (stress.components() != d * (d + 1) / 2) {
    throw InvalidArgument("pressure_from_stress: expects d(d+1)/2 stress components");
  }
  SpectralField q = forward_transform(stress);
  dealias_inplace(q);
  SpectralField f;
  if (forcing != nullptr) {
    if (!(forcing->grid() == g) || !forcing->is_vector()) {
      throw InvalidArgument("pressure_from_stress: forcing must be a vector field on the same grid");
    }
    f = forward_transform(*forcing);
  }
  SpectralField p(g, 1, stress.time());
  auto dst = p.component(0);
  for_each_mode(g, [&](std::size_t idx, const std::array<int, 3>& k) {
    const double k2 = static_cast<double>(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    if (k2 == 0.0) return;
    std::complex<double> rhs{0.0, 0.0};
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        rhs += static_cast<double>(k[i] * k[j]) * q.component(packed_index(d, i, j))[idx];
      }
    }
    if (forcing != nullptr) {
      for (int a = 0; a < d; ++a) rhs += std::complex<double>(0.0, k[a]) * f.component(a)[idx];
    }
    dst[idx] = -rhs / k2;
  });
  return inverse_transform(p);
}

Field pressure_from_velocity(const Field& u, const Field* forcing) {
  if (!u.is_vector()) throw InvalidArgument("pressure_from_velocity: expects a velocity field");
  const Grid& g = u.grid();
  const int d = g.dim();
  Field stress(g, d * (d + 1) / 2, u.time());
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      auto out = stress.component(packed_index(d, i, j));
      auto ui = u.component(i);
      auto uj = u.component(j);
      for (std::size_t p = 0; p < g.size(); ++p) out[p] = ui[p] * uj[p];
    }
  }
  return pressure_from_stress(stress, forcing);
}

}  // namespace kolmo
