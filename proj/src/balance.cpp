#include "kolmo/balance.hpp"

#include <cmath>
#include <fstream>

#include "kolmo/besov.hpp"
#include "kolmo/error.hpp"
#include "kolmo/kernels.hpp"
#include "kolmo/norms.hpp"
#include "kolmo/spectral.hpp"
#include "kolmo/structure.hpp"

namespace kolmo {
namespace {

const Field* force_at(std::span<const Field> forces, std::size_t i) { return forces.empty() ? nullptr : &forces[i]; }

Field pointwise_dot(const Field& a, const Field& b) {
  Field out(a.grid(), 1, a.time());
  auto dst = out.data();
  for (int c = 0; c < a.components(); ++c) {
    const auto x = a.component(c);
    const auto y = b.component(c);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += x[i] * y[i];
  }
  return out;
}

Field difference(const Field& a, const Field& b) {
  Field out = a;
  auto dst = out.data();
  const auto src = b.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= src[i];
  return out;
}

void add_to(Field& acc, const Field& x, double a = 1.0) {
  auto dst = acc.data();
  const auto src = x.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += a * src[i];
}

double l1(const Field& f) {
  RealBuffer a(f.data().begin(), f.data().end());
  for (double& v : a) v = std::abs(v);
  return integral(a, f.grid());
}

// Vector field whose j-th component is s * v^j.
Field scale_vector(const Field& v, const Field& s) {
  Field out = v;
  const auto w = s.data();
  for (int c = 0; c < v.components(); ++c) {
    auto dst = out.component(c);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] *= w[i];
  }
  return out;
}

// sum_{k,j} d_k a^j d_k b^j
Field gradient_contraction(const Field& a, const Field& b) {
  Field out(a.grid(), 1, a.time());
  for (int k = 0; k < a.grid().dim(); ++k) add_to(out, pointwise_dot(partial(a, k), partial(b, k)));
  return out;
}

// Kernel used by a local balance: vector, scalar and cubic averages.
struct LocalKernel {
  virtual ~LocalKernel() = default;
  virtual Field vector(const Field& v) const = 0;
  virtual Field pressure(const Field& p) const = 0;
  // (u^a u^b)_K contracted with the kernel: scalar
  virtual Field energy(const Field& u) const = 0;
  // j-th component: (u^a u^b u^j)_K
  virtual Field cubic(const Field& u) const = 0;
};

struct ScalarKernel final : LocalKernel {
  KernelSpec spec;
  explicit ScalarKernel(KernelSpec s) : spec(s) {}
  Field vector(const Field& v) const override { return kernel_average(v, spec); }
  Field pressure(const Field& p) const override { return kernel_average(p, spec); }
  Field energy(const Field& u) const override { return kernel_average(pointwise_dot(u, u), spec); }
  Field cubic(const Field& u) const override { return kernel_average(scale_vector(u, pointwise_dot(u, u)), spec); }
};

struct CombinedKernel final : LocalKernel {
  double ell;
  explicit CombinedKernel(double e) : ell(e) {}
  static Field packed_products(const Field& u, const Field* times) {
    const int d = u.grid().dim();
    Field q(u.grid(), d * (d + 1) / 2, u.time());
    for (int a = 0; a < d; ++a) {
      for (int b = a; b < d; ++b) {
        auto dst = q.component(packed_index(d, a, b));
        const auto x = u.component(a);
        const auto y = u.component(b);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = x[i] * y[i] * (times ? times->data()[i] : 1.0);
      }
    }
    return q;
  }
  Field contract(const Field& packed) const {
    const int d = packed.grid().dim();
    return contract_matrix_multiplier(packed, [&](double km) { return combined_L_multiplier(d, ell * km); });
  }
  Field vector(const Field& v) const override { return combined_L_average(v, ell); }
  Field pressure(const Field& p) const override { return combined_L_pressure_average(p, ell); }
  Field energy(const Field& u) const override { return contract(packed_products(u, nullptr)); }
  Field cubic(const Field& u) const override {
    const int d = u.grid().dim();
    Field out(u.grid(), d, u.time());
    for (int j = 0; j < d; ++j) {
      Field uj(u.grid(), 1);
      std::copy(u.component(j).begin(), u.component(j).end(), uj.data().begin());
      const Field c = contract(packed_products(u, &uj));
      std::copy(c.data().begin(), c.data().end(), out.component(j).begin());
    }
    return out;
  }
};

LocalBalance local_balance(std::span<const Field> snapshots, std::span<const Field> forces, double nu,
                           const LocalKernel& k, const Field& rhs, std::size_t m) {
  const double h = snapshot_spacing(snapshots, forces);
  if (m == 0 || m + 1 >= snapshots.size()) throw InvalidArgument("local balance: index must be interior");
  const Field& u = snapshots[m];
  const Field* f = force_at(forces, m);
  const Field uk = k.vector(u);

  std::vector<Field> terms;
  {
    Field dt = pointwise_dot(snapshots[m + 1], k.vector(snapshots[m + 1]));
    add_to(dt, pointwise_dot(snapshots[m - 1], k.vector(snapshots[m - 1])), -1.0);
    for (double& v : dt.data()) v /= 2.0 * h;
    terms.push_back(std::move(dt));
  }
  {
    Field flux = scale_vector(u, pointwise_dot(uk, u));
    add_to(flux, k.cubic(u), 0.5);
    add_to(flux, scale_vector(u, k.energy(u)), -0.5);
    terms.push_back(divergence(flux));
  }
  {
    const Field p = pressure_from_velocity(u, f);
    Field flux = scale_vector(uk, p);
    add_to(flux, scale_vector(u, k.pressure(p)));
    terms.push_back(divergence(flux));
  }
  {
    Field work(u.grid(), 1);
    if (f != nullptr) {
      add_to(work, pointwise_dot(u, k.vector(*f)), -1.0);
      add_to(work, pointwise_dot(uk, *f), -1.0);
    }
    terms.push_back(std::move(work));
  }
  {
    Field visc = laplacian(pointwise_dot(u, uk));
    for (double& v : visc.data()) v *= -nu;
    add_to(visc, gradient_contraction(u, uk), 2.0 * nu);
    terms.push_back(std::move(visc));
  }
  LocalBalance out;
  out.index = m;
  out.time = u.time();
  out.residual = Field(u.grid(), 1, u.time());
  for (const Field& t : terms) {
    add_to(out.residual, t);
    out.dominant = std::max(out.dominant, l1(t));
  }
  add_to(out.residual, rhs, -1.0);
  out.dominant = std::max(out.dominant, l1(rhs));
  out.l1 = l1(out.residual);
  return out;
}

double time_norm(std::vector<double> values, double p, double h, TimeQuadrature quad) {
  for (double& v : values) v = std::pow(std::abs(v), p);
  return std::pow(std::max(0.0, cumulative_integral(values, h, quad).back()), 1.0 / p);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace

std::vector<double> cumulative_integral(std::span<const double> f, double h, TimeQuadrature rule) {
  const std::size_t n = f.size();
  if (n < 2 || (rule == TimeQuadrature::simpson && n < 3)) {
    throw InvalidArgument("cumulative_integral: too few samples");
  }
  std::vector<double> out(n, 0.0);
  if (rule == TimeQuadrature::trapezoid) {
    for (std::size_t i = 1; i < n; ++i) out[i] = out[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
    return out;
  }
  out[1] = h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
  for (std::size_t i = 2; i < n; ++i) {
    if (i % 2 == 0) {
      out[i] = out[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
    } else {
      out[i] = out[i - 1] + h / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i]);
    }
  }
  return out;
}

double snapshot_spacing(std::span<const Field> snapshots, std::span<const Field> forces) {
  if (snapshots.size() < 3) throw InvalidArgument("balance: at least 3 snapshots are required");
  if (!forces.empty() && forces.size() != snapshots.size()) {
    throw InvalidArgument("balance: one forcing field per snapshot expected");
  }
  const Grid& g = snapshots.front().grid();
  const double h = snapshots[1].time() - snapshots[0].time();
  if (!(h > 0.0)) throw InvalidArgument("balance: snapshot times must increase");
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    if (!(snapshots[i].grid() == g) || !snapshots[i].is_vector()) {
      throw InvalidArgument("balance: snapshots must be velocity fields on one grid");
    }
    if (i > 0 && std::abs(snapshots[i].time() - snapshots[i - 1].time() - h) > 1e-9 * std::max(1.0, h)) {
      throw InvalidArgument("balance: snapshots must be equally spaced in time");
    }
    if (!forces.empty()) {
      if (!(forces[i].grid() == g) || !forces[i].is_vector()) {
        throw InvalidArgument("balance: forcing fields must be vector fields on the snapshot grid");
      }
      if (std::abs(forces[i].time() - snapshots[i].time()) > 1e-9 * std::max(1.0, h)) {
        throw InvalidArgument("balance: forcing times do not match snapshot times");
      }
    }
  }
  return h;
}

EnergySeries epsilon_series(std::span<const Field> snapshots, std::span<const Field> forces, double nu,
                            TimeQuadrature rule) {
  const double h = snapshot_spacing(snapshots, forces);
  EnergySeries e;
  std::vector<double> power, diss;
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    const Field& u = snapshots[i];
    e.times.push_back(u.time());
    const double norm = l2_norm(u);
    e.kinetic.push_back(0.5 * norm * norm);
    power.push_back(forces.empty() ? 0.0 : inner(forces[i], u));
    diss.push_back(nu * gradient_norm_squared(u));
  }
  e.work = cumulative_integral(power, h, rule);
  e.dissipation = cumulative_integral(diss, h, rule);
  const auto work_alt = cumulative_integral(power, h, TimeQuadrature::trapezoid);
  const auto diss_alt = cumulative_integral(diss, h, TimeQuadrature::trapezoid);
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    e.eps.push_back(e.kinetic[0] - e.kinetic[i] + e.work[i]);
    e.quadrature_error = std::max({e.quadrature_error, std::abs(e.work[i] - work_alt[i]),
                                   std::abs(e.dissipation[i] - diss_alt[i])});
    e.dissipation_gap = std::max(e.dissipation_gap, std::abs(e.eps[i] - e.dissipation[i]));
  }
  return e;
}

double BalanceReport::signed_sum() const {
  return flux_term + epsilon - boundary_term - forcing_term - viscous_term;
}

nlohmann::ordered_json BalanceReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = "kolmo.balance/1";
  j["projection"] = std::string(name(projection));
  j["ell"] = ell;
  j["t_start"] = t_start;
  j["t_end"] = t_end;
  j["flux_term"] = flux_term;
  j["epsilon"] = epsilon;
  j["boundary_term"] = boundary_term;
  j["forcing_term"] = forcing_term;
  j["viscous_term"] = viscous_term;
  j["residual"] = residual;
  return j;
}

std::string BalanceReport::csv_header() {
  return "projection,ell,t_start,t_end,flux_term,epsilon,boundary_term,forcing_term,viscous_term,residual";
}

std::string BalanceReport::csv_row() const {
  nlohmann::ordered_json j = to_json();
  std::string row = std::string(name(projection));
  for (const char* key : {"ell", "t_start", "t_end", "flux_term", "epsilon", "boundary_term", "forcing_term",
                          "viscous_term", "residual"}) {
    row += ',' + j[key].dump();
  }
  return row;
}

FluxSeries flux_series(const EnergySeries& energy, std::span<const double> structure, double ell,
                       TimeQuadrature quad) {
  if (structure.size() != energy.times.size()) throw InvalidArgument("flux_series: size mismatch");
  FluxSeries out;
  out.times = energy.times;
  out.structure.assign(structure.begin(), structure.end());
  std::vector<double> rate(structure.begin(), structure.end());
  for (double& r : rate) r /= ell;
  const auto integral_s = cumulative_integral(rate, energy.times[1] - energy.times[0], quad);
  for (std::size_t i = 0; i < rate.size(); ++i) out.residual.push_back(integral_s[i] + energy.eps[i]);
  return out;
}

FluxSeries flux_series(std::span<const Field> snapshots, std::span<const Field> forces, double nu, double ell,
                       TensorKind projection, const SphereRule& rule, TimeQuadrature quad) {
  const EnergySeries e = epsilon_series(snapshots, forces, nu, quad);
  std::vector<double> s;
  for (const Field& u : snapshots) s.push_back(structure_function(u, projection, ell, rule));
  return flux_series(e, s, ell, quad);
}

BalanceReport global_balance_residual(std::span<const Field> snapshots, std::span<const Field> forces, double nu,
                                      double ell, const SphereRule& rule, TimeQuadrature quad) {
  const double h = snapshot_spacing(snapshots, forces);
  const EnergySeries e = epsilon_series(snapshots, forces, nu, quad);
  std::vector<double> rate, work, visc;
  std::vector<Field> averaged;
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    const Field& u = snapshots[i];
    rate.push_back(structure_function(u, TensorKind::I, ell, rule) / ell);
    Field ul = ball_average(u, ell);
    work.push_back(forces.empty() ? 0.0 : inner(forces[i], difference(u, ul)));
    visc.push_back(-nu * inner(ul, laplacian(u)));
    if (i == 0 || i + 1 == snapshots.size()) averaged.push_back(std::move(ul));
  }
  const Field& u0 = snapshots.front();
  const Field& ut = snapshots.back();
  BalanceReport r;
  r.projection = TensorKind::I;
  r.ell = ell;
  r.t_start = u0.time();
  r.t_end = ut.time();
  r.flux_term = cumulative_integral(rate, h, quad).back();
  r.epsilon = e.eps.back();
  r.boundary_term = 0.5 * (inner(u0, u0) - inner(averaged[0], u0) + inner(averaged[1], ut) - inner(ut, ut));
  r.forcing_term = cumulative_integral(work, h, quad).back();
  r.viscous_term = cumulative_integral(visc, h, quad).back();
  r.residual = r.signed_sum();
  return r;
}

LocalBalance local_balance_residual_I(std::span<const Field> snapshots, std::span<const Field> forces, double nu,
                                      double ell, double gamma, const SphereRule& rule, std::size_t index) {
  if (index >= snapshots.size()) throw InvalidArgument("local balance: index out of range");
  const KernelSpec spec{ell, gamma, KernelKind::standard};
  spec.validate();
  const Field& u = snapshots[index];
  Field rhs = gamma == 0.0 ? flux_field_sphere(u, TensorKind::I, ell, rule).values
                           : flux_field_mollified(u, ell, gamma, rule).values;
  for (double& v : rhs.data()) v *= -2.0;
  return local_balance(snapshots, forces, nu, ScalarKernel(spec), rhs, index);
}

LocalBalance local_balance_residual_L(std::span<const Field> snapshots, std::span<const Field> forces, double nu,
                                      double ell, const SphereRule& rule, std::size_t index) {
  if (index >= snapshots.size()) throw InvalidArgument("local balance: index out of range");
  const Field& u = snapshots[index];
  auto a = increment_averages(u, ell, rule);
  Field rhs = std::move(a[static_cast<int>(TensorKind::L)]);
  for (double& v : rhs.data()) v *= u.grid().dim() / (2.0 * ell);
  return local_balance(snapshots, forces, nu, CombinedKernel(ell), rhs, index);
}

bool RemainderAudit::within() const {
  for (const auto& t : terms) {
    if (t.measured > constant * t.bound) return false;
  }
  return true;
}

nlohmann::ordered_json RemainderAudit::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = "kolmo.audit/1";
  j["ell"] = ell;
  j["alpha"] = alpha;
  j["sigma"] = sigma;
  j["constant"] = constant;
  j["shift_count"] = shift_count;
  j["boundary_raw"] = boundary_raw;
  j["within"] = within();
  for (const auto& t : terms) {
    nlohmann::ordered_json e;
    e["measured"] = t.measured;
    e["bound"] = t.bound;
    e["ratio"] = t.ratio;
    j["terms"][t.name] = e;
  }
  return j;
}

RemainderAudit remainder_bound_audit(std::span<const Field> snapshots, std::span<const Field> forces, double nu,
                                     double ell, double alpha, double sigma) {
  const double h = snapshot_spacing(snapshots, forces);
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("remainder_bound_audit: alpha must lie in (0, 1]");
  if (!(sigma > 0.0)) throw InvalidArgument("remainder_bound_audit: sigma must be positive");
  const Grid& g = snapshots.front().grid();
  const auto shifts = besov_shift_set(g);
  RemainderAudit a;
  a.ell = ell;
  a.alpha = alpha;
  a.sigma = sigma;
  a.shift_count = shifts.size();

  std::vector<double> besov, fnorm, work, visc, grad2;
  Field u0_avg, ut_avg;
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    const Field& u = snapshots[i];
    besov.push_back(besov_seminorm(u, alpha, shifts));
    const Field ul = ball_average(u, ell);
    fnorm.push_back(forces.empty() ? 0.0 : l2_norm(forces[i]));
    work.push_back(forces.empty() ? 0.0 : inner(forces[i], difference(u, ul)));
    visc.push_back(-nu * inner(ul, laplacian(u)));
    grad2.push_back(gradient_norm_squared(u));
    if (i == 0) u0_avg = ul;
    if (i + 1 == snapshots.size()) ut_avg = ul;
  }
  const Field& u0 = snapshots.front();
  const Field& ut = snapshots.back();
  const double la = std::pow(ell, alpha);

  auto ratio = [](AuditTerm& t) { t.ratio = t.bound > 0.0 ? t.measured / t.bound : (t.measured > 0.0 ? INFINITY : 0.0); };

  AuditTerm& t1 = a.terms[0];
  t1.name = "boundary";
  t1.measured = 0.5 * (l1(pointwise_dot(u0, difference(u0_avg, u0))) + l1(pointwise_dot(ut, difference(ut_avg, ut))));
  t1.bound = 0.5 * la * (l2_norm(u0) * besov.front() + l2_norm(ut) * besov.back());
  ratio(t1);

  AuditTerm& t2 = a.terms[1];
  t2.name = "forcing";
  t2.measured = std::abs(cumulative_integral(work, h).back());
  t2.bound = time_norm(fnorm, 1.0 + sigma, h, TimeQuadrature::simpson) * la *
             time_norm(besov, (1.0 + sigma) / sigma, h, TimeQuadrature::simpson);
  ratio(t2);

  AuditTerm& t3 = a.terms[2];
  t3.name = "viscous";
  t3.measured = std::abs(cumulative_integral(visc, h).back());
  t3.bound = nu * std::sqrt(std::max(0.0, cumulative_integral(grad2, h).back())) * la / ell *
             time_norm(besov, 2.0, h, TimeQuadrature::simpson);
  ratio(t3);

  a.boundary_raw = 0.5 * (inner(u0, u0) - inner(u0_avg, u0) + inner(ut_avg, ut) - inner(ut, ut));
  return a;
}

void write_balance_json(const std::filesystem::path& path, const BalanceReport& r) {
  write_text(path, r.to_json().dump(2) + "\n");
}

void write_balance_csv(const std::filesystem::path& path, std::span<const BalanceReport> reports) {
  std::string text = BalanceReport::csv_header() + "\n";
  for (const auto& r : reports) text += r.csv_row() + "\n";
  write_text(path, text);
}

}  // namespace kolmo
