#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "kolmo/error.hpp"
#include "kolmo/kernels.hpp"
#include "kolmo/norms.hpp"
#include "kolmo/parallel.hpp"
#include "kolmo/spectral.hpp"
#include "kolmo/structure.hpp"
#include "test_support.hpp"

using namespace kolmo;
using kolmo::testing::max_abs;
using kolmo::testing::max_abs_diff;
using std::numbers::pi;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Integrand (sigma . du) |T du|^2 from explicit components.
std::array<double, 3> integrand(const Vec& du, const Vec& s, int d) {
  double l = 0.0, e = 0.0;
  for (int a = 0; a < d; ++a) {
    l += s[a] * du[a];
    e += du[a] * du[a];
  }
  double t = 0.0;
  for (int a = 0; a < d; ++a) t += (du[a] - l * s[a]) * (du[a] - l * s[a]);
  return {l * e, l * l * l, l * t};
}

SphereRule axis_rule() {
  SphereRule r;
  r.dim = 2;
  r.kind = SphereRuleKind::file;
  r.nodes = {{1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}};
  r.weights = {0.25, 0.25, 0.25, 0.25};
  r.exactness = 3;
  r.label = "axes";
  return r;
}

}  // namespace

TEST_CASE("structure functions of trivial and scaled fields") {
  const Grid g(3, 16);
  const SphereRule rule = sphere_rule(3, 8);
  Field c(g, 3);
  for (int k = 0; k < 3; ++k) {
    for (double& v : c.component(k)) v = 0.3 * (k + 1);
  }
  const auto sc = structure_values(c, 0.7, rule);
  for (double s : sc.s) CHECK(std::abs(s) <= 1e-15);
  CHECK(max_abs(flux_field_sphere(c, TensorKind::T, 0.7, rule).values.data()) <= 1e-15);

  const Field u = kolmo::testing::random_solenoidal(g, 11, 4);
  Field v = u;
  for (double& x : v.data()) x *= 1.7;
  const auto su = structure_values(u, 0.6, rule);
  const auto sv = structure_values(v, 0.6, rule);
  for (int k = 0; k < 3; ++k) CHECK(rel(sv.s[k], 1.7 * 1.7 * 1.7 * su.s[k]) <= 1e-12);

  CHECK_THROWS_AS(structure_values(u, 0.0, rule), InvalidArgument);
  CHECK_THROWS_AS(structure_values(u, 1.6, rule), InvalidArgument);
  CHECK_THROWS_AS(structure_values(u, 0.5, sphere_rule(2, 8)), InvalidArgument);
}

TEST_CASE("3D single mode against a real-space double loop") {
  const Grid g(3, 32);
  auto velocity = [](const Vec& x) {
    return Vec{std::cos(2 * x[1] + x[2]), 0.0, std::sin(x[0] - x[1])};
  };
  const Field u = Field::from_function(g, 3, velocity);
  const SphereRule rule = sphere_rule(3, 12);
  const double ell = 0.45;
  const auto got = structure_values(u, ell, rule);
  std::array<double, 3> sum{};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec x = g.point(i);
    const Vec ux = velocity(x);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec& s = rule.nodes[q];
      const Vec uy = velocity({x[0] + ell * s[0], x[1] + ell * s[1], x[2] + ell * s[2]});
      const auto f = integrand({uy[0] - ux[0], uy[1] - ux[1], uy[2] - ux[2]}, s, 3);
      for (int k = 0; k < 3; ++k) sum[k] += rule.weights[q] * f[k];
    }
  }
  for (int k = 0; k < 3; ++k) {
    const double expect = structure_constant(static_cast<TensorKind>(k), 3) * sum[k] * g.cell_volume();
    CHECK(std::abs(got.s[k] - expect) <= 1e-8 * std::max(1.0, std::abs(expect)));
  }
}

TEST_CASE("2D n=16 integer-shift oracle for S and D") {
  const Grid g(2, 16);
  const Field u = kolmo::testing::random_solenoidal(g, 3, 5);
  const SphereRule rule = axis_rule();
  const int shift = 4;
  const double ell = shift * g.spacing();
  Field expect_d(g, 1);
  std::array<double, 3> sum{};
  for (long i = 0; i < 16; ++i) {
    for (long j = 0; j < 16; ++j) {
      const std::size_t here = g.index({i, j, 0});
      double di = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const auto& s = rule.nodes[q];
        const std::size_t there = g.index({i + shift * std::lround(s[0]), j + shift * std::lround(s[1]), 0});
        const Vec du{u.component(0)[there] - u.component(0)[here], u.component(1)[there] - u.component(1)[here], 0.0};
        const auto f = integrand(du, s, 2);
        for (int k = 0; k < 3; ++k) sum[k] += rule.weights[q] * f[k];
        di += rule.weights[q] * f[0];
      }
      expect_d.data()[here] = -0.5 / ell * di;  // C_I = 1/2 in 2D
    }
  }
  const auto got = structure_values(u, ell, rule);
  for (int k = 0; k < 3; ++k) {
    const double expect = structure_constant(static_cast<TensorKind>(k), 2) * sum[k] * g.cell_volume();
    CHECK(std::abs(got.s[k] - expect) <= 1e-10);
  }
  CHECK(max_abs_diff(flux_field_sphere(u, TensorKind::I, ell, rule).values, expect_d) <= 1e-10);
}

TEST_CASE("decomposition identity") {
  SUBCASE("random solenoidal 3D") {
    const Grid g(3, 32);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const Field u = kolmo::testing::random_solenoidal(g, seed, 8);
      CHECK(decomposition_identity(u, 0.5, sphere_rule(3, 16)) <= 1e-12);
    }
  }
  SUBCASE("Taylor-Green 2D") {
    const Grid g(2, 64);
    const Field u = kolmo::testing::taylor_green(g);
    for (double ell : {pi / 16, pi / 4}) CHECK(decomposition_identity(u, ell, default_rule(g, ell)) <= 1e-12);
  }
  SUBCASE("separate evaluations must share the rule and scale") {
    const Grid g(2, 32);
    const Field u = kolmo::testing::random_solenoidal(g, 9, 6);
    const auto a = structure_values(u, 0.5, sphere_rule(2, 16));
    const auto b = structure_values(u, 0.5, sphere_rule(2, 32));
    const auto c = structure_values(u, 0.25, sphere_rule(2, 16));
    CHECK(decomposition_residual(a, a, a, 2) <= 1e-12);
    CHECK_THROWS_AS(decomposition_residual(a, b, a, 2), InvalidArgument);
    CHECK_THROWS_AS(decomposition_residual(a, a, c, 2), InvalidArgument);
  }
}

TEST_CASE("reflected rule gives the same structure functions") {
  const Grid g(3, 32);
  const Field u = kolmo::testing::random_solenoidal(g, 21, 6);
  const SphereRule r = sphere_rule(3, 9, SphereRuleKind::fibonacci);
  const auto a = structure_values(u, 0.8, r);
  const auto b = structure_values(u, 0.8, r.reflected());
  for (int k = 0; k < 3; ++k) CHECK(std::abs(a.s[k] - b.s[k]) <= 1e-12 * a.magnitude);
}

TEST_CASE("sphere flux fields") {
  const Grid g(2, 32);
  const Field u = kolmo::testing::random_solenoidal(g, 4, 6);
  const double ell = 0.6;
  const SphereRule rule = default_rule(g, ell);
  SUBCASE("means reproduce the structure functions") {
    const auto s = structure_values(u, ell, rule);
    const auto d = flux_fields_sphere(u, ell, rule);
    for (int k = 0; k < 3; ++k) {
      CHECK(d[k].projection == static_cast<TensorKind>(k));
      CHECK(rel(-ell * integral(d[k].values.data(), g), s.s[k]) <= 1e-12);
    }
  }
  SUBCASE("translation equivariance") {
    const Vec a{5 * g.spacing(), -3 * g.spacing(), 0.0};
    const Field ua = shift(u, a);
    const Field d0 = flux_field_sphere(u, TensorKind::L, ell, rule).values;
    const Field d1 = flux_field_sphere(ua, TensorKind::L, ell, rule).values;
    CHECK(max_abs_diff(d1, shift(d0, a)) <= 1e-10);
  }
  SUBCASE("thread count does not change the result") {
    const Field one = flux_field_sphere(u, TensorKind::I, ell, rule).values;
    set_thread_count(3);
    const Field three = flux_field_sphere(u, TensorKind::I, ell, rule).values;
    set_thread_count(1);
    CHECK(max_abs_diff(one, three) == 0.0);
  }
  SUBCASE("smooth field: D vanishes like ell^2") {
    const Grid g64(2, 64);
    const Field tg = kolmo::testing::taylor_green(g64);
    std::vector<double> xs, ys;
    for (double l : {pi / 4, pi / 8, pi / 16, pi / 32}) {
      xs.push_back(std::log(l));
      ys.push_back(std::log(max_abs(flux_field_sphere(tg, TensorKind::I, l, default_rule(g64, l)).values.data())));
    }
    const double mx = (xs[0] + xs[1] + xs[2] + xs[3]) / 4, my = (ys[0] + ys[1] + ys[2] + ys[3]) / 4;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 4; ++i) {
      num += (xs[i] - mx) * (ys[i] - my);
      den += (xs[i] - mx) * (xs[i] - mx);
    }
    CHECK(num / den >= 1.9);
  }
}

TEST_CASE("mollified flux") {
  const Grid g(2, 32);
  const SphereRule rule = sphere_rule(2, 64);
  const double ell = 0.7;
  SUBCASE("constant field") {
    Field c(g, 2);
    for (double& v : c.data()) v = -1.25;
    for (double gamma : {0.05, 0.5, 1.0}) CHECK(max_abs(flux_field_mollified(c, ell, gamma, rule).values.data()) <= 1e-15);
  }
  SUBCASE("single mode against an annulus quadrature of the kernel gradient") {
    // u = a cos(k.x), a perpendicular to k
    auto velocity = [](const Vec& x) {
      const double c = std::cos(2 * x[0] + x[1]);
      return Vec{c, -2 * c, 0.0};
    };
    const Field u = Field::from_function(g, 2, velocity);
    const double gamma = 0.3;
    const FluxField got = flux_field_mollified(u, ell, gamma, rule);
    const KernelSpec spec{ell, gamma, KernelKind::standard};
    const auto radial = gauss_legendre(300, ell * (1 - gamma), ell * (1 + gamma));
    const SphereRule fine = sphere_rule(2, 64);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); i += 37) {
      const Vec x = g.point(i);
      const Vec ux = velocity(x);
      double d = 0.0;
      for (std::size_t r = 0; r < radial.nodes.size(); ++r) {
        const double rad = radial.nodes[r];
        for (std::size_t q = 0; q < fine.size(); ++q) {
          const Vec y{rad * fine.nodes[q][0], rad * fine.nodes[q][1], 0.0};
          const Vec grad = kernel_gradient(spec, 2, y);
          const Vec uy = velocity({x[0] + y[0], x[1] + y[1], 0.0});
          const Vec du{uy[0] - ux[0], uy[1] - ux[1], 0.0};
          const double w = radial.weights[r] * 2 * pi * rad * fine.weights[q];
          d += w * 0.25 * (grad[0] * du[0] + grad[1] * du[1]) * (du[0] * du[0] + du[1] * du[1]);
        }
      }
      worst = std::max(worst, std::abs(d - got.values.data()[i]));
    }
    CHECK(worst <= 1e-8);
  }
  SUBCASE("gap to the sphere form shrinks with gamma") {
    const Field u = kolmo::testing::random_solenoidal(g, 8, 6);
    const Field sharp = flux_field_sphere(u, TensorKind::I, ell, rule).values;
    double prev = 1e300;
    for (double gamma : {0.2, 0.1, 0.05}) {
      const double gap = max_abs_diff(flux_field_mollified(u, ell, gamma, rule).values, sharp);
      CHECK(gap <= prev + 1e-10);
      prev = gap;
    }
    CHECK(prev <= 0.05 * max_abs(sharp.data()));
  }
  SUBCASE("gamma = 0 is rejected") {
    Field c(g, 2);
    CHECK_THROWS_WITH_AS(flux_field_mollified(c, ell, 0.0, rule), doctest::Contains("flux_field_sphere"), InvalidArgument);
  }
}

TEST_CASE("combined longitudinal average") {
  SUBCASE("constant vector in 3D") {
    const Grid g(3, 16);
    Field c(g, 3);
    for (double& v : c.component(0)) v = 1.0;
    const Field out = combined_L_average(c, 0.9);
    for (double v : out.component(0)) CHECK(std::abs(v - 0.6) <= 1e-8);
    CHECK(max_abs(out.component(1)) <= 1e-8);
    CHECK(max_abs(out.component(2)) <= 1e-8);
  }
  SUBCASE("linearity") {
    const Grid g(2, 32);
    const Field a = kolmo::testing::random_field(g, 2, 1, 6);
    const Field b = kolmo::testing::random_field(g, 2, 2, 6);
    Field ab = a;
    for (std::size_t i = 0; i < ab.data().size(); ++i) ab.data()[i] += b.data()[i];
    const Field la = combined_L_average(a, 0.5), lb = combined_L_average(b, 0.5);
    Field sum = la;
    for (std::size_t i = 0; i < sum.data().size(); ++i) sum.data()[i] += lb.data()[i];
    CHECK(max_abs_diff(combined_L_average(ab, 0.5), sum) <= 1e-12);
  }
  SUBCASE("plane wave tends to 3/(d+2) u") {
    // For a perpendicular to k the output is alpha(ell|k|) u with
    // alpha(s) = 3/(d+2) + O(s^2); check against a brute-force kernel integral.
    const Grid g(2, 32);
    auto velocity = [](const Vec& x) {
      const double c = std::cos(3 * x[0] - x[1]);
      return Vec{c, 3 * c, 0.0};
    };
    const Field u = Field::from_function(g, 2, velocity);
    const double km = std::sqrt(10.0);
    double prev = 1e300;
    for (double ell : {pi / 4, pi / 8, pi / 16, pi / 32}) {
      Field target = u;
      for (double& v : target.data()) v *= 3.0 / 4.0;
      const Field out = combined_L_average(u, ell);
      Field diff = out;
      for (std::size_t i = 0; i < diff.data().size(); ++i) diff.data()[i] -= target.data()[i];
      const double dist = l2_norm(diff);
      CHECK(dist < prev);
      prev = dist;
      // alpha via the pointwise kernel: int K_11 cos(k.y) dy with khat perpendicular to e_1
      const auto radial = gauss_legendre(120, 0.0, ell);
      const SphereRule fine = sphere_rule(2, 200);
      double alpha = 0.0;
      const Vec kh{1.0, 0.0, 0.0};
      const Vec e{0.0, 1.0, 0.0};  // unit vector perpendicular to kh
      for (std::size_t r = 0; r < radial.nodes.size(); ++r) {
        for (std::size_t q = 0; q < fine.size(); ++q) {
          const Vec y{radial.nodes[r] * fine.nodes[q][0], radial.nodes[r] * fine.nodes[q][1], 0.0};
          const Mat k = combined_L_kernel(ell, 2, y);
          const double kee = e[0] * (k[0][0] * e[0] + k[0][1] * e[1]) + e[1] * (k[1][0] * e[0] + k[1][1] * e[1]);
          alpha += radial.weights[r] * 2 * pi * radial.nodes[r] * fine.weights[q] * kee *
                   std::cos(km * (kh[0] * y[0] + kh[1] * y[1]));
        }
      }
      CHECK(std::abs(dist - std::abs(alpha - 0.75) * l2_norm(u)) <= 1e-9);
    }
  }
}

TEST_CASE("structure analysis and exports") {
  const Grid g(2, 32);
  CHECK(default_scales(Grid(2, 64)) == std::vector<double>{pi / 8, pi / 4, pi / 2});
  std::vector<Field> snaps;
  for (int i = 0; i < 2; ++i) {
    snaps.push_back(kolmo::testing::random_solenoidal(g, 40 + i, 6));
    snaps.back().set_time(0.5 * i);
  }
  const auto scales = default_scales(g);
  const auto an = analyze_structure(snaps, scales);
  for (const auto& t : an.tables) {
    CHECK(t.times.size() == 2);
    CHECK(t.values.size() == 2 * scales.size());
    CHECK(t.rule_labels.size() == scales.size());
  }
  for (double r : an.residuals) CHECK(r <= 1e-12);
  CHECK(an.tables[1].at(1, 0) == doctest::Approx(structure_function(snaps[1], TensorKind::L, scales[0],
                                                                     default_rule(g, scales[0])))
                                     .epsilon(1e-14));

  const auto dir = std::filesystem::temp_directory_path() / "kolmo_structure_test";
  std::filesystem::create_directories(dir);
  write_structure_csv(dir / "s.csv", an.tables);
  std::ifstream in(dir / "s.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,ell,projection,value");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3 * 2 * static_cast<int>(scales.size()));

  const auto d = flux_fields_sphere(snaps[1], 0.5, default_rule(g, 0.5));
  write_flux_csv(dir / "d.csv", d);
  write_flux_field(dir / "d.fld", d[0]);
  CHECK(std::filesystem::file_size(dir / "d.fld") == 36 + 8 * g.size());

  StructureTable bad = an.tables[0];
  std::swap(bad.scales[0], bad.scales[1]);
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = an.tables[0];
  bad.values[0] = NAN;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  CHECK_THROWS_AS(write_structure_csv(dir / "missing" / "s.csv", an.tables), IoError);
  std::filesystem::remove_all(dir);
}
