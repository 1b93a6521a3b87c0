#include "kolmo/solver.hpp"

#include <algorithm>
#include <cmath>

#include "kolmo/error.hpp"
#include "kolmo/field_io.hpp"
#include "kolmo/norms.hpp"
#include "kolmo/random.hpp"
#include "kolmo/simd.hpp"
#include "kolmo/spectral.hpp"

namespace kolmo {
namespace {

int cutoff_for(const Grid& g, double fraction) {
  return static_cast<int>(std::floor(fraction * g.n() / 2.0 + 1e-9));
}

// Leray projection (mean kept) and truncation to |k_a| <= cutoff.
void project_truncate(SpectralField& s, double fraction) {
  const Grid& g = s.grid();
  const int cut = cutoff_for(g, fraction);
  leray_project_inplace(s);
  const auto half = static_cast<std::size_t>(g.half());
  for (std::size_t row = 0; row < g.spectral_rows(); ++row) {
    for (std::size_t j = 0; j < half; ++j) {
      const auto k = g.mode(row, static_cast<int>(j));
      bool keep = true;
      for (int a = 0; a < g.dim(); ++a) keep = keep && std::abs(k[a]) <= cut;
      if (!keep) {
        for (int c = 0; c < s.components(); ++c) s.component(c)[row * half + j] = 0.0;
      }
    }
  }
}

double kinetic_energy(const SpectralField& s) { return 0.5 * s.grid().volume() * spectral_energy(s); }

void check_vector(const Grid& g, const Field& f, const std::string& what) {
  if (!(f.grid() == g) || !f.is_vector()) throw InvalidArgument(what + ": expected a velocity field on the solver grid");
}

}  // namespace

void SolverParams::validate(const Grid& grid) const {
  if (!(std::isfinite(nu) && nu >= 0.0)) throw ConfigError("solver.nu", "must be finite and >= 0");
  if (!(std::isfinite(dt) && dt > 0.0)) throw ConfigError("solver.dt", "must be > 0");
  if (!(std::isfinite(t_end) && t_end > 0.0)) throw ConfigError("solver.t_end", "must be > 0");
  const double steps = t_end / dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
    throw ConfigError("solver.t_end", "must be an integer multiple of solver.dt");
  }
  if (snapshot_stride < 1) throw ConfigError("solver.snapshot_stride", "must be >= 1");
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0)) throw ConfigError("solver.dealias", "must lie in (0, 1]");
  if (!(cfl_limit > 0.0)) throw ConfigError("solver.cfl_limit", "must be > 0");
  if (grid.dim() == 3 && grid.n() > max_n_3d) {
    throw ConfigError("grid.n", "3D runs are capped at n = " + std::to_string(max_n_3d) + " (solver.max_n_3d)");
  }
}

std::uint64_t SolverParams::step_count() const { return static_cast<std::uint64_t>(std::llround(t_end / dt)); }

Field make_initial(const Grid& g, const InitSpec& spec, double fraction) {
  const int d = g.dim();
  Field u;
  switch (spec.kind) {
    case InitSpec::Kind::taylor_green: {
      if (spec.mode < 1) throw ConfigError("init.mode", "must be >= 1");
      if (spec.mode > cutoff_for(g, fraction)) throw ConfigError("init.mode", "exceeds the dealiasing cutoff");
      const double m = spec.mode, a = spec.amplitude;
      u = Field::from_function(g, d, [&](const Vec& x) {
        const double cz = d == 3 ? std::cos(m * x[2]) : 1.0;
        return Vec{a * std::sin(m * x[0]) * std::cos(m * x[1]) * cz, -a * std::cos(m * x[0]) * std::sin(m * x[1]) * cz,
                   0.0};
      });
      return u;
    }
    case InitSpec::Kind::random: {
      if (spec.kmin < 1 || spec.kmax < spec.kmin) throw ConfigError("init.kmax", "need 1 <= kmin <= kmax");
      if (!(spec.energy > 0.0)) throw ConfigError("init.energy", "must be > 0");
      Rng rng(spec.seed);
      SpectralField s(g, d);
      const auto half = static_cast<std::size_t>(g.half());
      for (std::size_t row = 0; row < g.spectral_rows(); ++row) {
        for (std::size_t j = 0; j < half; ++j) {
          const auto k = g.mode(row, static_cast<int>(j));
          const double km = std::sqrt(static_cast<double>(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]));
          if (km < spec.kmin || km > spec.kmax) continue;
          // E(k) ~ k^slope spread over a shell of k^{d-1} modes
          const double amp = std::pow(km, 0.5 * (spec.slope - (d - 1)));
          for (int c = 0; c < d; ++c) {
            const double re = rng.normal(), im = rng.normal();
            s.component(c)[row * half + j] = amp * std::complex<double>(re, im);
          }
        }
      }
      // round trip through real space makes the half spectrum Hermitian-consistent
      s = forward_transform(inverse_transform(s));
      project_truncate(s, fraction);
      for (int c = 0; c < d; ++c) s.component(c)[0] = 0.0;
      const double e = kinetic_energy(s) / g.volume();
      if (!(e > 0.0)) throw ConfigError("init.kmax", "no modes inside the dealiased shell");
      const double scale = std::sqrt(spec.energy / e);
      for (auto& c : s.data()) c *= scale;
      return inverse_transform(s);
    }
    case InitSpec::Kind::file: {
      FieldFile ff = read_field(spec.file);
      if (!(ff.field.grid() == g) || !ff.field.is_vector()) {
        throw ConfigError("init.file", spec.file.string() + ": grid or component count does not match");
      }
      SpectralField s = forward_transform(ff.field);
      project_truncate(s, fraction);
      for (int c = 0; c < d; ++c) s.component(c)[0] = 0.0;
      return inverse_transform(s);
    }
  }
  return u;
}

Forcing::Forcing(const Grid& grid, const ForcingSpec& spec, double fraction) : grid_(grid), kind_(spec.kind) {
  const int d = grid.dim();
  const int cut = cutoff_for(grid, fraction);
  if (kind_ == ForcingSpec::Kind::modes) {
    if (spec.modes.empty()) throw ConfigError("forcing.modes", "empty mode list");
    for (const auto& m : spec.modes) {
      for (int a = 0; a < d; ++a) {
        if (std::abs(m.k[a]) > cut) throw ConfigError("forcing.modes", "wavenumber beyond the dealiasing cutoff");
      }
      for (double v : m.amplitude) {
        if (!std::isfinite(v)) throw ConfigError("forcing.modes", "non-finite amplitude");
      }
      auto build = [&](bool sine) {
        Field f = Field::from_function(grid, d, [&](const Vec& x) {
          const double th = m.k[0] * x[0] + m.k[1] * x[1] + m.k[2] * x[2] + m.phase;
          const double w = sine ? std::sin(th) : std::cos(th);
          return Vec{m.amplitude[0] * w, m.amplitude[1] * w, m.amplitude[2] * w};
        });
        SpectralField s = forward_transform(f);
        project_truncate(s, fraction);
        return s;
      };
      omega_.push_back(m.omega);
      cos_part_.push_back(build(false));
      sin_part_.push_back(build(true));
    }
  } else if (kind_ == ForcingSpec::Kind::file) {
    if (spec.files.empty()) throw ConfigError("forcing.files", "empty file list");
    for (const auto& p : spec.files) {
      FieldFile ff = read_field(p);
      if (!(ff.field.grid() == grid) || !ff.field.is_vector()) {
        throw ConfigError("forcing.files", p.string() + ": grid or component count does not match");
      }
      if (!times_.empty() && !(ff.header.time > times_.back())) {
        throw ConfigError("forcing.files", p.string() + ": times must increase");
      }
      times_.push_back(ff.header.time);
      SpectralField s = forward_transform(ff.field);
      project_truncate(s, fraction);
      samples_.push_back(std::move(s));
    }
  }
}

SpectralField Forcing::spectral(double t) const {
  SpectralField out(grid_, grid_.dim(), t);
  const auto& kt = simd::active();
  const std::size_t n2 = 2 * out.data().size();
  auto* dst = reinterpret_cast<double*>(out.data().data());
  if (kind_ == ForcingSpec::Kind::modes) {
    for (std::size_t m = 0; m < omega_.size(); ++m) {
      kt.axpy(std::cos(omega_[m] * t), reinterpret_cast<const double*>(cos_part_[m].data().data()), dst, n2);
      kt.axpy(-std::sin(omega_[m] * t), reinterpret_cast<const double*>(sin_part_[m].data().data()), dst, n2);
    }
  } else if (kind_ == ForcingSpec::Kind::file) {
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    if (samples_.size() == 1) {
      out = samples_[0];
    } else {
      if (t < times_.front() - tol || t > times_.back() + tol) {
        throw InvalidArgument("forcing: time " + std::to_string(t) + " outside the file-backed range");
      }
      std::size_t i = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
      i = std::clamp<std::size_t>(i, 1, times_.size() - 1);
      const double w = std::clamp((t - times_[i - 1]) / (times_[i] - times_[i - 1]), 0.0, 1.0);
      kt.axpy(1.0 - w, reinterpret_cast<const double*>(samples_[i - 1].data().data()), dst, n2);
      kt.axpy(w, reinterpret_cast<const double*>(samples_[i].data().data()), dst, n2);
    }
  }
  out.set_time(t);
  return out;
}

Field Forcing::field(double t) const {
  Field f = inverse_transform(spectral(t));
  f.set_time(t);
  return f;
}

Solver::Solver(const Grid& grid, const SolverParams& params, const Field& initial, Forcing forcing,
               std::uint64_t start_step)
    : grid_(grid), params_(params), forcing_(std::move(forcing)), step_(start_step) {
  params_.validate(grid);
  check_vector(grid, initial, "Solver");
  const int d = grid.dim();
  const int cut = cutoff_for(grid, params.dealias_fraction);
  const auto half = static_cast<std::size_t>(grid.half());
  k2_.resize(grid.spectral_size());
  keep_.resize(grid.spectral_size());
  herm_.resize(grid.spectral_size());
  for (auto& v : kvec_) v.assign(grid.spectral_size(), 0.0);
  for (std::size_t row = 0; row < grid.spectral_rows(); ++row) {
    for (std::size_t j = 0; j < half; ++j) {
      const std::size_t i = row * half + j;
      const auto k = grid.mode(row, static_cast<int>(j));
      bool keep = true;
      double k2 = 0.0;
      for (int a = 0; a < d; ++a) {
        keep = keep && std::abs(k[a]) <= cut;
        const double kd = grid.is_nyquist(k[a]) ? 0.0 : k[a];
        kvec_[a][i] = kd;
        k2 += kd * kd;
      }
      k2_[i] = k2;
      keep_[i] = keep ? 1 : 0;
      herm_[i] = grid.hermitian_weight(static_cast<int>(j));
    }
  }
  state_ = forward_transform(initial);
  project_and_truncate(state_);
  state_.set_time(time());
}

Field Solver::velocity() const {
  Field u = inverse_transform(state_);
  u.set_time(time());
  return u;
}

void Solver::project_and_truncate(SpectralField& s) const {
  const int d = grid_.dim();
  std::array<std::complex<double>*, 3> c{};
  for (int a = 0; a < d; ++a) c[a] = s.component(a).data();
  for (std::size_t i = 0; i < k2_.size(); ++i) {
    if (!keep_[i]) {
      for (int a = 0; a < d; ++a) c[a][i] = 0.0;
      continue;
    }
    if (k2_[i] == 0.0) continue;
    std::complex<double> kv = 0.0;
    for (int a = 0; a < d; ++a) kv += kvec_[a][i] * c[a][i];
    kv /= k2_[i];
    for (int a = 0; a < d; ++a) c[a][i] -= kvec_[a][i] * kv;
  }
}

void Solver::rhs(const SpectralField& u, double t, SpectralField& out, double& max_speed, double& power,
                 double& diss) {
  const int d = grid_.dim();
  const std::size_t n = grid_.size();
  const std::size_t ns = grid_.spectral_size();
  std::array<RealBuffer, 3> vel;
  for (int a = 0; a < d; ++a) {
    vel[a].resize(n);
    inverse_component(grid_, u.component(a), vel[a]);
  }
  max_speed = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += vel[a][i] * vel[a][i];
    max_speed = std::max(max_speed, s);
  }
  max_speed = std::sqrt(max_speed);

  out = SpectralField(grid_, d, t);
  RealBuffer prod(n);
  ComplexBuffer q(ns);
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      for (std::size_t i = 0; i < n; ++i) prod[i] = vel[a][i] * vel[b][i];
      forward_component(grid_, prod, q);
      // -d_b (u^a u^b) into component a, and -d_a (u^a u^b) into b
      auto oa = out.component(a);
      auto ob = out.component(b);
      for (std::size_t i = 0; i < ns; ++i) {
        if (!keep_[i]) continue;
        const std::complex<double> iq = std::complex<double>(0.0, 1.0) * q[i];
        oa[i] -= kvec_[b][i] * iq;
        if (a != b) ob[i] -= kvec_[a][i] * iq;
      }
    }
  }
  power = 0.0;
  if (forcing_.active()) {
    const SpectralField f = forcing_.spectral(t);
    const auto& kt = simd::active();
    kt.axpy(1.0, reinterpret_cast<const double*>(f.data().data()), reinterpret_cast<double*>(out.data().data()),
            2 * out.data().size());
    double acc = 0.0;
    for (int a = 0; a < d; ++a) {
      const auto fa = f.component(a);
      const auto ua = u.component(a);
      for (std::size_t i = 0; i < ns; ++i) acc += herm_[i] * (fa[i].real() * ua[i].real() + fa[i].imag() * ua[i].imag());
    }
    power = grid_.volume() * acc;
  }
  project_and_truncate(out);
  double acc = 0.0;
  for (int a = 0; a < d; ++a) {
    const auto ua = u.component(a);
    for (std::size_t i = 0; i < ns; ++i) acc += herm_[i] * k2_[i] * std::norm(ua[i]);
  }
  diss = params_.nu * grid_.volume() * acc;
  if (!params_.integrating_factor) {
    for (int a = 0; a < d; ++a) {
      auto oa = out.component(a);
      const auto ua = u.component(a);
      for (std::size_t i = 0; i < ns; ++i) oa[i] -= params_.nu * k2_[i] * ua[i];
    }
  }
}

void Solver::step() {
  const double h = params_.dt;
  const double t = time();
  const long next = static_cast<long>(step_ + 1);
  const auto& kt = simd::active();
  const std::size_t len = 2 * state_.data().size();
  auto raw = [](SpectralField& s) { return reinterpret_cast<double*>(s.data().data()); };
  auto craw = [](const SpectralField& s) { return reinterpret_cast<const double*>(s.data().data()); };

  SpectralField k1, k2, k3, k4, stage = state_;
  std::array<double, 4> speed{}, power{}, diss{};
  try {
    rhs(state_, t, k1, speed[0], power[0], diss[0]);
    const double limit = params_.cfl_limit * grid_.spacing() / std::max(speed[0], 1e-300);
    if (h > limit) {
      const std::string msg = "CFL violated: dt = " + std::to_string(h) + " > " + std::to_string(limit) +
                              " (max|u| = " + std::to_string(speed[0]) + ")";
      if (params_.cfl_policy == CflPolicy::abort) throw SolverError(next, msg);
      ++cfl_warnings_;
      last_warning_ = "step " + std::to_string(next) + ": " + msg;
    }
    if (!params_.integrating_factor) {
      kt.scaled_add(raw(stage), craw(state_), 0.5 * h, craw(k1), len);
      rhs(stage, t + 0.5 * h, k2, speed[1], power[1], diss[1]);
      kt.scaled_add(raw(stage), craw(state_), 0.5 * h, craw(k2), len);
      rhs(stage, t + 0.5 * h, k3, speed[2], power[2], diss[2]);
      kt.scaled_add(raw(stage), craw(state_), h, craw(k3), len);
      rhs(stage, t + h, k4, speed[3], power[3], diss[3]);
      kt.axpy(h / 6.0, craw(k1), raw(state_), len);
      kt.axpy(h / 3.0, craw(k2), raw(state_), len);
      kt.axpy(h / 3.0, craw(k3), raw(state_), len);
      kt.axpy(h / 6.0, craw(k4), raw(state_), len);
    } else {
      const int d = grid_.dim();
      const std::size_t ns = grid_.spectral_size();
      std::vector<double> e(ns), eh(ns);
      for (std::size_t i = 0; i < ns; ++i) {
        e[i] = std::exp(-params_.nu * k2_[i] * h);
        eh[i] = std::exp(-0.5 * params_.nu * k2_[i] * h);
      }
      auto scale = [&](SpectralField& s, const std::vector<double>& w) {
        for (int a = 0; a < d; ++a) kt.scale_complex(s.component(a).data(), w.data(), ns);
      };
      // stage 2: Eh (u + h/2 k1)
      kt.scaled_add(raw(stage), craw(state_), 0.5 * h, craw(k1), len);
      scale(stage, eh);
      rhs(stage, t + 0.5 * h, k2, speed[1], power[1], diss[1]);
      // stage 3: Eh u + h/2 k2
      SpectralField ehu = state_;
      scale(ehu, eh);
      kt.scaled_add(raw(stage), craw(ehu), 0.5 * h, craw(k2), len);
      rhs(stage, t + 0.5 * h, k3, speed[2], power[2], diss[2]);
      // stage 4: E u + h Eh k3
      SpectralField eu = state_;
      scale(eu, e);
      SpectralField ehk3 = k3;
      scale(ehk3, eh);
      kt.scaled_add(raw(stage), craw(eu), h, craw(ehk3), len);
      rhs(stage, t + h, k4, speed[3], power[3], diss[3]);
      // u_{n+1} = E u + h/6 (E k1 + 2 Eh (k2 + k3) + k4)
      scale(k1, e);
      kt.axpy(1.0, craw(k3), raw(k2), len);
      scale(k2, eh);
      state_ = eu;
      kt.axpy(h / 6.0, craw(k1), raw(state_), len);
      kt.axpy(h / 3.0, craw(k2), raw(state_), len);
      kt.axpy(h / 6.0, craw(k4), raw(state_), len);
    }
  } catch (const InvalidArgument& e) {
    throw SolverError(next, std::string("non-finite values: ") + e.what());
  }
  for (const auto& c : state_.data()) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw SolverError(next, "non-finite values");
  }
  work_ += h / 6.0 * (power[0] + 2.0 * power[1] + 2.0 * power[2] + power[3]);
  dissipation_ += h / 6.0 * (diss[0] + 2.0 * diss[1] + 2.0 * diss[2] + diss[3]);
  ++step_;
  state_.set_time(time());
}

EnergySeries run(const Grid& grid, const SolverParams& params, const Field& initial, const ForcingSpec& forcing,
                 const SnapshotSink& sink, const ResumeState* resume, const ProgressSink& progress) {
  params.validate(grid);
  Forcing f(grid, forcing, params.dealias_fraction);
  const Field& start = resume ? resume->velocity : initial;
  Solver solver(grid, params, start, std::move(f), resume ? resume->step : 0);
  const double k0 = resume ? resume->kinetic0 : kinetic_energy(solver.coefficients());
  const double w0 = resume ? resume->work : 0.0;
  const double v0 = resume ? resume->dissipation : 0.0;

  EnergySeries e;
  auto emit = [&] {
    const Field u = solver.velocity();
    const double k = kinetic_energy(solver.coefficients());
    e.times.push_back(u.time());
    e.kinetic.push_back(k);
    e.work.push_back(w0 + solver.work());
    e.dissipation.push_back(v0 + solver.dissipation());
    e.eps.push_back(k0 - k + e.work.back());
    e.dissipation_gap = std::max(e.dissipation_gap, std::abs(e.eps.back() - e.dissipation.back()));
    if (sink) {
      if (solver.forcing().active()) {
        const Field fu = solver.forcing().field(u.time());
        sink(u, &fu, solver.step_index());
      } else {
        sink(u, nullptr, solver.step_index());
      }
    }
    if (progress) progress(e);
  };
  if (!resume) emit();
  const std::uint64_t total = params.step_count();
  const auto stride = static_cast<std::uint64_t>(params.snapshot_stride);
  while (solver.step_index() < total) {
    solver.step();
    if (solver.step_index() % stride == 0) emit();
  }
  return e;
}

}  // namespace kolmo
