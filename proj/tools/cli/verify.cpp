#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "commands.hpp"
#include "kolmo/kernels.hpp"
#include "kolmo/random.hpp"
#include "kolmo/sphere_rule.hpp"
#include "kolmo/structure.hpp"
#include "kolmo/tensors.hpp"

namespace kolmo::cli {

using nlohmann::ordered_json;

namespace {

class Suite {
 public:
  explicit Suite(std::string name) : name_(std::move(name)) {}

  // Passes when measured <= tolerance.
  void check(const std::string& name, double measured, double tolerance) {
    const bool ok = std::isfinite(measured) && measured <= tolerance;
    pass_ = pass_ && ok;
    checks_.push_back({{"name", name}, {"measured", measured}, {"tolerance", tolerance}, {"pass", ok}});
  }

  bool pass() const { return pass_; }
  ordered_json json() const { return {{"name", name_}, {"pass", pass_}, {"checks", checks_}}; }

 private:
  std::string name_;
  bool pass_ = true;
  ordered_json checks_ = ordered_json::array();
};

Vec random_vec(Rng& rng, int dim) {
  Vec v{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) v[a] = rng.normal();
  return v;
}

double max_entry_diff(const Mat& a, const Mat& b, int dim) {
  double m = 0.0;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  }
  return m;
}

Suite tensors_suite(const VerifyOptions& o) {
  Suite s("tensors");
  for (int d : {2, 3}) {
    Rng rng(o.seed + d);
    double idem = 0.0, orth = 0.0, pyth = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const Vec y = random_vec(rng, d), v = random_vec(rng, d);
      const Vec l = apply_tensor(TensorKind::L, y, v, d), t = apply_tensor(TensorKind::T, y, v, d);
      const Vec ll = apply_tensor(TensorKind::L, y, l, d), tt = apply_tensor(TensorKind::T, y, t, d);
      for (int a = 0; a < d; ++a) idem = std::max({idem, std::abs(ll[a] - l[a]), std::abs(tt[a] - t[a])});
      const double vv = dot(v, v, d);
      orth = std::max(orth, std::abs(dot(l, t, d)) / vv);
      pyth = std::max(pyth, std::abs(vv - dot(l, l, d) - dot(t, t, d)) / vv);
    }
    s.check(fmt::format("projector_idempotent_d{}", d), idem, 1e-14);
    s.check(fmt::format("projector_orthogonal_d{}", d), orth, 1e-14);
    s.check(fmt::format("pythagoras_d{}", d), pyth, 1e-14);

    // C_T of the identity without the factor d carried by S_T
    const double ct = structure_constant(TensorKind::T, d) / d * (1.0 + o.perturb_ct);
    s.check(fmt::format("additivity_constants_d{}", d), std::abs(3.0 / (d + 2) + 1.0 / (4.0 * ct) - 1.0), 1e-15);
    const bool exact = transverse_constant_check(d) == boost::rational<long>(1);
    s.check(fmt::format("additivity_constants_exact_d{}", d), exact ? 0.0 : 1.0, 0.0);
  }
  return s;
}

Suite kernels_suite(const VerifyOptions&) {
  Suite s("kernels");
  for (int d : {2, 3}) {
    KernelSpec special{0.5, 0.0, KernelKind::special};
    s.check(fmt::format("special_kernel_mass_d{}", d), std::abs(kernel_mass(special, d) + 2.0 / (d + 2)), 1e-8);

    const SphereRule rule = sphere_rule(d, 8);
    Mat delta{};
    for (int a = 0; a < d; ++a) delta[a][a] = 1.0 / d;
    s.check(fmt::format("sphere_average_T_L_d{}", d),
            max_entry_diff(sphere_tensor_average(TensorKind::L, rule), delta, d), 1e-12);
    s.check(fmt::format("sphere_rule_exactness_d{}", d), measure_exactness(rule, 8) >= 8 ? 0.0 : 1.0, 0.0);

    const Grid g(d, 16);
    Field c(g, d);
    const Vec value{0.7, -1.3, 0.4};
    for (int a = 0; a < d; ++a) {
      for (double& x : c.component(a)) x = value[a];
    }
    const Field avg = combined_L_average(c, 0.6);
    double err = 0.0;
    for (int a = 0; a < d; ++a) {
      for (double x : avg.component(a)) err = std::max(err, std::abs(x - 3.0 / (d + 2) * value[a]));
    }
    s.check(fmt::format("combined_L_constant_d{}", d), err, 1e-8);
  }
  return s;
}

Suite identity_suite(const VerifyOptions& o) {
  Suite s("identity");
  struct Case {
    int d, n;
  };
  for (const Case k : {Case{2, 32}, Case{3, 16}}) {
    const Grid g(k.d, k.n);
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 4; ++i) {
      InitSpec init;
      init.kind = InitSpec::Kind::random;
      init.seed = o.seed + 100 * i;
      init.kmax = k.n / 4;
      const Field u = make_initial(g, init);
      for (double ell : {0.3, 0.9}) {
        StructureValues v = structure_values(u, ell, default_rule(g, ell));
        v.s[static_cast<int>(TensorKind::T)] *= 1.0 + o.perturb_ct;
        worst = std::max(worst, decomposition_residual(v, k.d));
      }
    }
    s.check(fmt::format("decomposition_identity_d{}_n{}", k.d, k.n), worst, 1e-12);
  }
  return s;
}

}  // namespace

VerifyResult cmd_verify(const VerifyOptions& opts) {
  VerifyResult r;
  r.pass = true;
  r.report["schema"] = "kolmo.verify/1";
  r.report["seed"] = opts.seed;
  if (opts.perturb_ct != 0.0) r.report["perturb_ct"] = opts.perturb_ct;
  r.report["suites"] = ordered_json::array();
  for (const auto& name : opts.suites) {
    Suite s = name == "tensors"    ? tensors_suite(opts)
              : name == "kernels"  ? kernels_suite(opts)
              : name == "identity" ? identity_suite(opts)
                                   : throw ConfigError("--suite", "unknown suite '" + name + "' (tensors, kernels, identity)");
    r.pass = r.pass && s.pass();
    r.report["suites"].push_back(s.json());
  }
  r.report["pass"] = r.pass;
  return r;
}

}  // namespace kolmo::cli
