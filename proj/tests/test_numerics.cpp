#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "allee/numerics.hpp"

using namespace allee;

TEST_CASE("find_root: linear root") {
  auto f = [](double x) { return x - 0.5; };
  const auto res = find_root(f, 0.0, 1.0);
  CHECK(res.x == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(res.residual) <= 1e-12);
}

TEST_CASE("find_root: no sign change is rejected") {
  auto f = [](double x) { return x * x + 1; };
  CHECK_THROWS_AS(find_root(f, 0.0, 1.0), InvalidBracket);
  CHECK_THROWS_AS(make_bracket(f, 1.0, 0.0), InvalidBracket);
}

TEST_CASE("find_root: result stays inside the bracket and reports both tolerances") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    const double root = u(rng);
    const double lo = root - std::abs(u(rng)) - 1e-3;
    const double hi = root + std::abs(u(rng)) + 1e-3;
    auto f = [&](double x) { return std::tanh(x - root) * 5.0; };
    RootOptions opt;
    opt.ftol = 0;
    const auto res = find_root(f, lo, hi, opt);
    CHECK(res.x >= lo);
    CHECK(res.x <= hi);
    CHECK(res.width <= 1e-12);
    CHECK(std::abs(res.x - root) <= 1e-12);
    CHECK(res.residual == f(res.x));
  }
}

TEST_CASE("find_root: exact zero at an endpoint") {
  auto f = [](double x) { return x; };
  CHECK(find_root(f, 0.0, 1.0).x == 0.0);
}

TEST_CASE("scan_roots: constructed cubic") {
  auto f = [](double x) { return (x - 0.2) * (x - 0.5) * (x - 0.8); };
  const auto scan = scan_roots(f, 0.0, 1.0, 64);
  REQUIRE(scan.roots.size() == 3);
  CHECK(scan.roots[0].x == doctest::Approx(0.2).epsilon(1e-11));
  CHECK(scan.roots[1].x == doctest::Approx(0.5).epsilon(1e-11));
  CHECK(scan.roots[2].x == doctest::Approx(0.8).epsilon(1e-11));
}

TEST_CASE("scan_roots: tangential double root depends on the grid") {
  // An exact double root between grid points has no sign change.
  auto tangent = [](double x) { return (x - 0.37) * (x - 0.37); };
  CHECK(scan_roots(tangent, 0.0, 1.0, 64).roots.empty());

  // A split pair narrower than one cell is also invisible; a fine grid sees both.
  auto pair = [](double x) { return (x - 0.37) * (x - 0.37) - 1e-8; };
  CHECK(scan_roots(pair, 0.0, 1.0, 64).roots.empty());
  RootOptions opt;
  opt.ftol = 0;
  const auto fine = scan_roots(pair, 0.0, 1.0, 1 << 16, opt);
  REQUIRE(fine.roots.size() == 2);
  CHECK(fine.roots[0].x == doctest::Approx(0.37 - 1e-4).epsilon(1e-9));
  CHECK(fine.roots[1].x == doctest::Approx(0.37 + 1e-4).epsilon(1e-9));
}

TEST_CASE("scan_roots: roots never exceed sign changes and all have small residual") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double r1 = u(rng), r2 = u(rng), r3 = u(rng);
    auto f = [&](double x) { return (x - r1) * (x - r2) * (x - r3); };
    const auto scan = scan_roots(f, 0.0, 1.0, 256);
    CHECK(scan.roots.size() <= scan.sign_changes);
    for (std::size_t i = 0; i < scan.roots.size(); ++i) {
      CHECK(std::abs(f(scan.roots[i].x)) <= 1e-12);
      if (i > 0) CHECK(scan.roots[i].x > scan.roots[i - 1].x);
    }
  }
}

TEST_CASE("scan_roots: argument checks") {
  auto f = [](double x) { return x; };
  CHECK_THROWS_AS(scan_roots(f, 1.0, 0.0, 8), DomainError);
  CHECK_THROWS_AS(scan_roots(f, 0.0, 1.0, 1), DomainError);
}

TEST_CASE("eig2: repeated, rotation and triangular cases") {
  const auto rep = eig2(2.0, 1.0);
  CHECK(rep.first.real() == doctest::Approx(1.0));
  CHECK(rep.second.real() == doctest::Approx(1.0));
  CHECK(rep.first.imag() == 0.0);

  const auto rot = eig2(0.0, 1.0);
  CHECK(rot.is_complex());
  CHECK(rot.first.real() == 0.0);
  CHECK(std::abs(rot.first.imag()) == doctest::Approx(1.0));
  CHECK(rot.first.imag() == -rot.second.imag());
  CHECK(std::abs(rot.first) == doctest::Approx(1.0));
  CHECK(std::abs(rot.second) == doctest::Approx(1.0));

  // J(E1) at a = 0.5, r = 2, beta = 1
  const auto e1 = eig2(2.0, 0.75);
  CHECK(e1.first.real() == doctest::Approx(1.5));
  CHECK(e1.second.real() == doctest::Approx(0.5));
}

TEST_CASE("eig2: matrix overload matches trace/det form") {
  Eigen::Matrix2d m;
  m << 1.5, -0.5, 0.0, 0.5;
  const auto e = eig2(m);
  CHECK(e.first.real() == doctest::Approx(1.5));
  CHECK(e.second.real() == doctest::Approx(0.5));
}

TEST_CASE("eig2: trace and determinant are reconstructed for random inputs") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  int failures = 0;
  for (int i = 0; i < 100000; ++i) {
    const double tr = u(rng);
    const double det = u(rng);
    const auto e = eig2(tr, det);
    const auto sum = e.first + e.second;
    const auto prod = e.first * e.second;
    const double tol_t = 1e-12 * std::max(1.0, std::abs(tr));
    const double tol_d = 1e-12 * std::max(1.0, std::abs(det));
    if (std::abs(sum.real() - tr) > tol_t || std::abs(sum.imag()) > tol_t ||
        std::abs(prod.real() - det) > tol_d || std::abs(prod.imag()) > tol_d) {
      ++failures;
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("classify_moduli") {
  CHECK(classify_moduli(eig2(1.0, 0.2)) == FixedPointClass::Stable);
  CHECK(classify_moduli(eig2(2.0, 0.75)) == FixedPointClass::Saddle);
  CHECK(classify_moduli(eig2(0.5, 4.0)) == FixedPointClass::Repeller);
  CHECK(classify_moduli(eig2(0.0, 1.0)) == FixedPointClass::NonHyperbolic);
}

TEST_CASE("detect_cycle: constant tail has period 1") {
  std::vector<double> s(200, 0.3);
  CHECK(detect_cycle(s, 64, 1e-9) == 1);
}

TEST_CASE("detect_cycle: period 3 sequence and an aperiodic one") {
  std::vector<double> s;
  for (int i = 0; i < 300; ++i) s.push_back(std::array<double, 3>{0.1, 0.7, 0.4}[i % 3]);
  CHECK(detect_cycle(s, 64, 1e-9) == 3);

  std::vector<double> irr;
  for (int i = 0; i < 300; ++i) irr.push_back(std::fmod(i * std::sqrt(2.0), 1.0));
  CHECK_FALSE(detect_cycle(irr, 64, 1e-6).has_value());
}

TEST_CASE("detect_cycle: planar samples and the length precondition") {
  std::vector<Eigen::Vector2d> s;
  for (int i = 0; i < 40; ++i) s.emplace_back(i % 2 ? 1.0 : 2.0, 0.5);
  CHECK(detect_cycle(s, 8, 1e-12) == 2);
  CHECK_THROWS_AS(detect_cycle(s, 64, 1e-12), DomainError);
}

TEST_CASE("finite_diff: cubic and constant") {
  auto cube = [](double x) { return x * x * x; };
  CHECK(std::abs(finite_diff(cube, 1.0, 3) - 6.0) < 1e-4);
  CHECK(std::abs(finite_diff(cube, 1.0, 2) - 6.0) < 1e-6);
  CHECK(std::abs(finite_diff(cube, 1.0, 1) - 3.0) < 1e-9);
  auto c = [](double) { return 4.25; };
  for (int order = 1; order <= 3; ++order) {
    CHECK(std::abs(finite_diff(c, 0.7, order)) < 1e-12);
  }
  CHECK_THROWS_AS(finite_diff(c, 0.7, 4), DomainError);
}
