#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "kolmo/error.hpp"
#include "kolmo/kernels.hpp"
#include "kolmo/norms.hpp"
#include "kolmo/random.hpp"
#include "test_support.hpp"

using namespace kolmo;
using kolmo::testing::max_abs;
using std::numbers::pi;

namespace {

Vec random_vec(Rng& rng, int d) {
  Vec v{0.0, 0.0, 0.0};
  for (int a = 0; a < d; ++a) v[a] = rng.normal();
  return v;
}

double sq(const Vec& v) { return v[0] * v[0] + v[1] * v[1] + v[2] * v[2]; }

double double_factorial(int n) {
  double r = 1.0;
  for (int k = n; k > 1; k -= 2) r *= k;
  return r;
}

// Circle average of cos^a sin^b.
double circle_moment(int a, int b) {
  if (a % 2 || b % 2) return 0.0;
  return double_factorial(a - 1) * double_factorial(b - 1) / double_factorial(a + b);
}

// Brute-force Fourier integral of a matrix kernel supported in the ball of radius ell:
// radial Gauss-Legendre x sphere rule, using only pointwise kernel values.
Mat brute_fourier(const std::function<Mat(const Vec&)>& kernel, int d, double ell, const Vec& k) {
  const auto radial = gauss_legendre(200, 0.0, ell);
  const SphereRule rule = sphere_rule(d, d == 2 ? 400 : 90);
  Mat out{};
  const double area = unit_sphere_area(d);
  for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
    const double r = radial.nodes[i];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec y{r * rule.nodes[q][0], r * rule.nodes[q][1], r * rule.nodes[q][2]};
      const Mat m = kernel(y);
      const double w = radial.weights[i] * area * std::pow(r, d - 1) * rule.weights[q] *
                       std::cos(k[0] * y[0] + k[1] * y[1] + k[2] * y[2]);
      for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) out[a][b] += w * m[a][b];
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("projector algebra on random samples") {
  Rng rng(2024);
  for (int d : {2, 3}) {
    for (int s = 0; s < 10000; ++s) {
      const Vec y = random_vec(rng, d);
      const Vec v = random_vec(rng, d);
      const Vec vi = apply_tensor(TensorKind::I, y, v, d);
      const Vec vl = apply_tensor(TensorKind::L, y, v, d);
      const Vec vt = apply_tensor(TensorKind::T, y, v, d);
      const double scale = sq(v);
      REQUIRE(std::abs(sq(vi) - sq(vl) - sq(vt)) <= 1e-14 * scale);
      const Vec ll = apply_tensor(TensorKind::L, y, vl, d);
      const Vec tt = apply_tensor(TensorKind::T, y, vt, d);
      const Vec lt = apply_tensor(TensorKind::L, y, vt, d);
      for (int a = 0; a < d; ++a) {
        REQUIRE(std::abs(ll[a] - vl[a]) <= 1e-14 * std::sqrt(scale));
        REQUIRE(std::abs(tt[a] - vt[a]) <= 1e-14 * std::sqrt(scale));
        REQUIRE(std::abs(lt[a]) <= 1e-14 * std::sqrt(scale));
      }
      const Mat ml = tensor_matrix(TensorKind::L, y, d);
      const Mat mt = tensor_matrix(TensorKind::T, y, d);
      for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
          REQUIRE(ml[a][b] == ml[b][a]);
          REQUIRE(mt[a][b] == mt[b][a]);
          double prod = 0.0;
          for (int c = 0; c < d; ++c) prod += ml[a][c] * mt[c][b];
          REQUIRE(std::abs(prod) <= 1e-14);
        }
      }
    }
  }
  CHECK_THROWS_AS(tensor_matrix(TensorKind::L, {0.0, 0.0, 0.0}, 3), InvalidArgument);
}

TEST_CASE("structure constants") {
  using R = boost::rational<long>;
  CHECK(structure_constant_exact(TensorKind::I, 3) == R(3, 4));
  CHECK(structure_constant_exact(TensorKind::L, 3) == R(5, 4));
  CHECK(structure_constant_exact(TensorKind::T, 3) == R(15, 8));
  CHECK(structure_constant_exact(TensorKind::T, 2) == R(2, 1));
  for (int d : {2, 3}) {
    CHECK(transverse_constant_check(d) == R(1));
    // 4/d = 12/(d(d+2)) + 4(d-1)/(d(d+2))
    const R lhs = 1 / structure_constant_exact(TensorKind::I, d);
    const R rhs = 1 / structure_constant_exact(TensorKind::L, d) + 1 / structure_constant_exact(TensorKind::T, d);
    CHECK(lhs == rhs);
  }
  CHECK(parse_tensor_kind("L") == TensorKind::L);
  CHECK_THROWS_AS(parse_tensor_kind("X"), InvalidArgument);
}

TEST_CASE("sphere rules") {
  SUBCASE("second moments and odd moments") {
    for (int d : {2, 3}) {
      for (int order : {2, 8, 31}) {
        const SphereRule r = sphere_rule(d, order);
        double wsum = 0.0;
        Mat m{};
        Vec first{0, 0, 0};
        for (std::size_t q = 0; q < r.size(); ++q) {
          wsum += r.weights[q];
          for (int a = 0; a < d; ++a) {
            first[a] += r.weights[q] * r.nodes[q][a];
            for (int b = 0; b < d; ++b) m[a][b] += r.weights[q] * r.nodes[q][a] * r.nodes[q][b];
          }
        }
        CHECK(std::abs(wsum - 1.0) <= 1e-14);
        for (int a = 0; a < d; ++a) {
          CHECK(std::abs(first[a]) <= 1e-14);
          for (int b = 0; b < d; ++b) CHECK(std::abs(m[a][b] - (a == b ? 1.0 / d : 0.0)) <= 1e-12);
        }
        CHECK(r.exactness >= order);
        CHECK(measure_exactness(r, std::min(order + 2, 24)) >= std::min(order, 24));
      }
    }
  }
  SUBCASE("circle monomials up to degree 8 against the closed form") {
    const SphereRule r = sphere_rule(2, 8);
    for (int a = 0; a <= 8; ++a) {
      for (int b = 0; a + b <= 8; ++b) {
        double q = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
          q += r.weights[i] * std::pow(r.nodes[i][0], a) * std::pow(r.nodes[i][1], b);
        }
        CHECK(std::abs(q - circle_moment(a, b)) <= 1e-12);
      }
    }
  }
  SUBCASE("fibonacci points are antipodal with exactness one") {
    const SphereRule r = sphere_rule(3, 40, SphereRuleKind::fibonacci);
    CHECK(r.exactness == 1);
    CHECK(measure_exactness(r, 4, 1e-13) >= 1);
    const Mat m = sphere_tensor_average(TensorKind::L, r);
    CHECK(std::abs(m[0][0] - 1.0 / 3.0) <= 2e-3);
  }
  SUBCASE("unsupported orders are rejected with the maximum") {
    CHECK_THROWS_AS(sphere_rule(3, 1), InvalidArgument);
    try {
      sphere_rule(3, 100000);
      FAIL("expected rejection");
    } catch (const InvalidArgument& e) {
      CHECK(std::string(e.what()).find(std::to_string(max_sphere_order(3, SphereRuleKind::tabulated))) !=
            std::string::npos);
    }
  }
  SUBCASE("rules load from node files") {
    const auto path = std::filesystem::temp_directory_path() / "kolmo_rule.txt";
    const SphereRule r = sphere_rule(3, 5);
    {
      std::ofstream out(path);
      out << "# w x y z\n";
      out.precision(17);
      for (std::size_t q = 0; q < r.size(); ++q) {
        out << r.weights[q] << ' ' << r.nodes[q][0] << ' ' << r.nodes[q][1] << ' ' << r.nodes[q][2] << '\n';
      }
    }
    const SphereRule back = load_sphere_rule(path, 3);
    CHECK(back.size() == r.size());
    CHECK(back.exactness >= 5);
    {
      std::ofstream out(path);
      out << "0.5 1 0 0\n0.4 -1 0 0\n";
    }
    CHECK_THROWS_AS(load_sphere_rule(path, 3), FormatError);
  }
}

TEST_CASE("bump profile") {
  CHECK(bump::normalizer() == doctest::Approx(0.4439938161680793).epsilon(1e-13));
  for (double g : {0.05, 0.3, 1.0}) {
    double prev = 1.0;
    for (int i = 0; i <= 400; ++i) {
      const double s = 2.2 * i / 400.0;
      const double p = bump::profile(s, g);
      CHECK(p >= 0.0);
      CHECK(p <= prev + 1e-15);
      prev = p;
      if (std::abs(s - 1.0) > g + 1e-12) CHECK(bump::profile_derivative(s, g) == 0.0);
    }
    const double s = 1.0 + 0.3 * g;
    const double h = 1e-5 * g;
    const double fd = (bump::profile(s + h, g) - bump::profile(s - h, g)) / (2 * h);
    CHECK(fd == doctest::Approx(bump::profile_derivative(s, g)).epsilon(1e-7));
  }
  const auto rule = bump::radial_rule(64);
  double w = 0.0, m2 = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    w += rule.weights[q];
    m2 += rule.weights[q] * rule.nodes[q] * rule.nodes[q];
  }
  CHECK(w == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m2 == doctest::Approx(bump::second_moment()).epsilon(1e-10));
}

TEST_CASE("kernel moments") {
  for (int d : {2, 3}) {
    CAPTURE(d);
    const SphereRule rule = sphere_rule(d, 8);
    const KernelSpec special{0.7, 0.0, KernelKind::special};
    CHECK(std::abs(kernel_mass(special, d) + 2.0 / (d + 2)) <= 1e-8);
    for (double g : {0.0, 0.1, 0.5, 1.0}) {
      CHECK(std::abs(kernel_mass({0.7, g, KernelKind::standard}, d) - 1.0) <= 1e-10);
    }
    const Mat tl = sphere_tensor_average(TensorKind::L, rule);
    const Mat tt = sphere_tensor_average(TensorKind::T, rule);
    const Mat comb = kernel_tensor_moment({0.7, 0.0, KernelKind::combined_L}, d, TensorKind::L, rule);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        const double delta = a == b ? 1.0 : 0.0;
        CHECK(std::abs(tl[a][b] - delta / d) <= 1e-12);
        CHECK(std::abs(tt[a][b] - delta * (d - 1) / d) <= 1e-12);
        CHECK(std::abs(comb[a][b] - 3.0 * delta / (d + 2)) <= 1e-8);
      }
    }
  }
}

TEST_CASE("standard kernel support and sign") {
  for (double g : {0.1, 0.4}) {
    const KernelSpec k{0.5, g, KernelKind::standard};
    for (int i = 1; i <= 300; ++i) {
      const double r = 0.8 * i / 300.0;
      const Vec y{r * 0.6, r * 0.8, 0.0};
      CHECK(kernel_value(k, 2, y) >= 0.0);
      const Vec grad = kernel_gradient(k, 2, y);
      if (std::abs(r - 0.5) > g * 0.5) CHECK(std::abs(grad[0]) + std::abs(grad[1]) <= 1e-14);
    }
  }
  CHECK_THROWS_AS(kernel_value({2.0, 0.1, KernelKind::standard}, 2, {0, 0, 0}), InvalidArgument);
  CHECK_THROWS_AS(kernel_value({0.5, 1.5, KernelKind::standard}, 2, {0, 0, 0}), InvalidArgument);
}

TEST_CASE("special kernel gradient identity") {
  const KernelSpec k{0.5, 0.0, KernelKind::special};
  CHECK(special_kernel_gradient_identity(k, 3, {0.2, 0.0, 0.0}) <= 1e-12);
  // rotation of y
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    Vec y = random_vec(rng, 3);
    const double r = 0.45 * rng.uniform(0.01, 1.0) / std::sqrt(sq(y));
    for (double& c : y) c *= r;
    CHECK(special_kernel_gradient_identity(k, 3, y) <= 1e-12);
  }
  // homogeneity: ell -> 2 ell, y -> 2 y
  const KernelSpec k2{1.0, 0.0, KernelKind::special};
  CHECK(special_kernel_gradient_identity(k2, 3, {0.4, 0.0, 0.0}) <= 1e-12);
  CHECK(special_kernel_gradient_identity(k2, 2, {0.3, -0.5, 0.0}) <= 1e-12);
  // continuity at |y| = ell
  CHECK(std::abs(kernel_value(k, 3, {0.5 - 1e-12, 0.0, 0.0})) <= 1e-9);
  CHECK_THROWS_AS(special_kernel_gradient_identity(k, 3, {0.0, 0.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(special_kernel_gradient_identity(k, 3, {0.5, 0.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(special_kernel_gradient_identity(k, 3, {0.7, 0.0, 0.0}), InvalidArgument);
}

TEST_CASE("Fourier multipliers against pointwise kernels") {
  for (int d : {2, 3}) {
    CAPTURE(d);
    const double ell = 0.6;
    for (const Vec& k : {Vec{1.0, 0.0, 0.0}, Vec{2.0, -3.0, 0.0}, Vec{4.0, 1.0, d == 3 ? 5.0 : 0.0}}) {
      const double km = std::sqrt(sq(k));
      const Vec kh{k[0] / km, k[1] / km, k[2] / km};

      const Mat ball = brute_fourier(
          [&](const Vec& y) {
            Mat m{};
            const double v = kernel_value({ell, 0.0, KernelKind::standard}, d, y);
            for (int a = 0; a < d; ++a) m[a][a] = v;
            return m;
          },
          d, ell, k);
      CHECK(ball[0][0] == doctest::Approx(ball_multiplier(d, ell * km)).epsilon(1e-10));

      const Mat sp = brute_fourier(
          [&](const Vec& y) {
            Mat m{};
            const double v = kernel_value({ell, 0.0, KernelKind::special}, d, y);
            for (int a = 0; a < d; ++a) m[a][a] = v;
            return m;
          },
          d, ell, k);
      CHECK(std::abs(sp[0][0] - special_kernel_multiplier(d, ell * km)) <= 1e-10);

      const Mat comb = brute_fourier([&](const Vec& y) { return combined_L_kernel(ell, d, y); }, d, ell, k);
      const auto ab = combined_L_multiplier(d, ell * km);
      for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
          CHECK(std::abs(comb[a][b] - (ab.a * (a == b) + ab.b * kh[a] * kh[b])) <= 1e-10);
        }
      }

      // sphere averages of e^{i s khat.sigma} and sigma sigma^T e^{...} with a fine rule
      const SphereRule rule = sphere_rule(d, d == 2 ? 200 : 80);
      const double s = 1.7 * km;
      double plain = 0.0;
      Mat tens{};
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec& sg = rule.nodes[q];
        const double c = rule.weights[q] * std::cos(s * (kh[0] * sg[0] + kh[1] * sg[1] + kh[2] * sg[2]));
        plain += c;
        for (int a = 0; a < d; ++a) {
          for (int b = 0; b < d; ++b) tens[a][b] += c * sg[a] * sg[b];
        }
      }
      CHECK(std::abs(plain - sphere_multiplier(d, s)) <= 1e-11);
      const auto st = sphere_tensor_multiplier(d, s);
      for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) CHECK(std::abs(tens[a][b] - (st.a * (a == b) + st.b * kh[a] * kh[b])) <= 1e-11);
      }
    }
    // small-argument branches join the Bessel branches smoothly
    const double lo = 1e-3 * (1 - 1e-9), hi = 1e-3 * (1 + 1e-9);
    CHECK(std::abs(sphere_multiplier(d, lo) - sphere_multiplier(d, hi)) <= 1e-13);
    CHECK(std::abs(ball_multiplier(d, lo) - ball_multiplier(d, hi)) <= 1e-13);
    CHECK(std::abs(sphere_tensor_multiplier(d, lo).a - sphere_tensor_multiplier(d, hi).a) <= 1e-13);
    CHECK(std::abs(sphere_tensor_multiplier(d, lo).b - sphere_tensor_multiplier(d, hi).b) <= 1e-13);
    CHECK(combined_L_multiplier(d, 0.0).a == doctest::Approx(3.0 / (d + 2)).epsilon(1e-14));
    CHECK(combined_L_multiplier(d, 0.0).b == 0.0);
  }
}

TEST_CASE("mollifier multiplier matches the radial profile integral") {
  // int phi_{ell,gamma}(y) e^{ik.y} dy = c |S| ell^{-d} int psi(r/ell) r^{d-1} j(r|k|) dr
  for (int d : {2, 3}) {
    const double ell = 0.8, gamma = 0.3, km = 5.0;
    const KernelSpec spec{ell, gamma, KernelKind::standard};
    const auto gl = gauss_legendre(400, 0.0, ell * (1 + gamma));
    double s = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double r = gl.nodes[i];
      const double j = d == 2 ? std::cyl_bessel_j(0.0, r * km) : std::sin(r * km) / (r * km);
      s += gl.weights[i] * kernel_value(spec, d, {r, 0.0, 0.0}) * std::pow(r, d - 1) * j;
    }
    s *= unit_sphere_area(d);
    CHECK(std::abs(s - mollifier_multiplier(d, ell * km, gamma, bump::radial_rule(64))) <= 1e-7);
  }
}

TEST_CASE("spherical average") {
  const Grid g(3, 16);
  const SphereRule rule = sphere_rule(3, 40);
  SUBCASE("constants are fixed points") {
    Field c(g, 1);
    for (auto& v : c.data()) v = 2.5;
    const Field a = spherical_average(c, 0.9, rule);
    for (double v : a.data()) CHECK(std::abs(v - 2.5) <= 1e-13);
  }
  SUBCASE("single mode picks up the sinc factor") {
    const std::array<int, 3> k{2, -1, 3};
    const Field f = Field::scalar_from_function(g, [&](const Vec& x) { return std::cos(k[0] * x[0] + k[1] * x[1] + k[2] * x[2]); });
    const double ell = 0.7;
    const double km = std::sqrt(14.0);
    const Field a = spherical_average(f, ell, rule);
    const double factor = std::sin(ell * km) / (ell * km);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(a.data()[i] - factor * f.data()[i]) <= 1e-12);
  }
  SUBCASE("L2 norm does not grow, ell = 0 is the identity") {
    const Field f = kolmo::testing::random_field(g, 3, 17, 6);
    CHECK(l2_norm(spherical_average(f, 1.2, rule)) <= l2_norm(f) * (1 + 1e-10));
    CHECK(kolmo::testing::max_abs_diff(spherical_average(f, 0.0, rule), f) == 0.0);
    CHECK_THROWS_AS(spherical_average(f, 2.0, rule), InvalidArgument);
  }
}

TEST_CASE("mollifier to sphere limit") {
  const Grid g(2, 32);
  const double ell = 0.9;
  const std::vector<double> gammas{0.1, 0.05, 0.025};
  SUBCASE("constant field has zero gap") {
    Field c(g, 2);
    for (auto& v : c.data()) v = 1.0;
    const auto rec = mollifier_to_sphere_limit(c, ell, gammas);
    for (double gap : rec.gaps) CHECK(gap <= 1e-14);
  }
  SUBCASE("single mode against a dense radial sweep") {
    const std::array<int, 3> k{3, 2, 0};
    const double km = std::sqrt(13.0);
    const Field f = Field::scalar_from_function(g, [&](const Vec& x) { return std::cos(k[0] * x[0] + k[1] * x[1]); });
    const auto rec = mollifier_to_sphere_limit(f, ell, gammas);
    CHECK(rec.monotone);
    for (std::size_t i = 0; i < gammas.size(); ++i) {
      // trapezoid in z on the bump, J0 from the standard library
      const int m = 20000;
      double num = 0.0, den = 0.0;
      for (int j = 1; j < m; ++j) {
        const double z = -1.0 + 2.0 * j / m;
        const double w = std::exp(-1.0 / (1.0 - z * z));
        num += w * std::cyl_bessel_j(0.0, ell * (1 + gammas[i] * z) * km);
        den += w;
      }
      const double expect = std::abs(num / den - std::cyl_bessel_j(0.0, ell * km));
      CHECK(rec.gaps[i] == doctest::Approx(expect).epsilon(1e-8));
    }
    CHECK(rec.gaps[1] < rec.gaps[0]);
    CHECK(rec.gaps[2] < rec.gaps[1]);
  }
  SUBCASE("rejects increasing gammas") {
    Field c(g, 1);
    const std::vector<double> bad{0.05, 0.1};
    CHECK_THROWS_AS(mollifier_to_sphere_limit(c, ell, bad), InvalidArgument);
  }
}
