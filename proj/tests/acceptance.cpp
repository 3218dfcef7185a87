// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "allee/host_parasitoid.hpp"
#include "allee/numerics.hpp"
#include "allee/scalar_map.hpp"

using namespace allee;
using SP = SystemParams<double>;
using S = State<double>;

namespace {

// Tolerances, fixed here and nowhere else.
constexpr double kBetaCTol = 2e-3;
constexpr double kR0Tol = 1e-5;
constexpr double kSchwarzianRel = 1e-9;
constexpr double kBasinExclusion = 1e-3;
constexpr double kThresholdBand = 1e-6;
constexpr double kFdRel = 1e-6;
constexpr double kRescaleTol = 1e-10;
constexpr double kCycleTol = 1e-6;
constexpr int kMaxPeriod = 64;
constexpr double kBoxBound = 10.0;

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", n, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void criterion1() {
  const double rs[] = {0.5, 1.0, 1.5, 2.0, 3.0, 3.9, 3.99};
  const double expected[] = {1.318, 1.3378, 1.35765, 1.3777, 1.41819, 1.45519, 1.4589};
  double worst = 0;
  bool ok = true;
  for (int i = 0; i < 7; ++i) {
    try {
      const double bc = find_beta_c(0.5, rs[i]).beta_c;
      worst = std::max(worst, std::abs(bc - expected[i]));
    } catch (const Error&) {
      ok = false;
    }
  }
  ok = ok && worst <= kBetaCTol;
  report(1, ok, "beta_c table at a=0.5, max abs error " + fmt("%.3g", worst));
}

bool has_two_cycle(double a, double r) {
  return locate_two_cycle(ScalarParams<double>{r, a}).has_value();
}

void criterion2() {
  double worst = 0;
  bool ok = true;
  for (double a : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double r0 = allee_threshold_r0(a);
    double lo = 0.5 * r0, hi = 1.5 * r0;
    if (has_two_cycle(a, lo) || !has_two_cycle(a, hi)) {
      ok = false;
      continue;
    }
    while (hi - lo > 1e-8) {
      const double mid = 0.5 * (lo + hi);
      (has_two_cycle(a, mid) ? hi : lo) = mid;
    }
    worst = std::max(worst, std::abs(hi - r0));
  }
  ok = ok && worst <= kR0Tol;
  report(2, ok, "2-cycle birth vs 2/(1-a), max abs error " + fmt("%.3g", worst));
}

void criterion3() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> ua(0.01, 0.99);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const double a = ua(rng);
    const double r0 = allee_threshold_r0(a);
    const double expected = 2 * r0 * (a - 4 - 3 * r0);
    const double s = schwarzian(1.0, ScalarParams<double>{r0, a});
    worst = std::max(worst, std::abs(s - expected) / std::abs(expected));
  }
  report(3, worst <= kSchwarzianRel, "Sf(1) at r0, max rel error " + fmt("%.3g", worst));
}

void criterion4() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> ua(0.05, 0.95), ut(0.05, 0.98);
  long mismatches = 0, compared = 0, unresolved = 0;
  for (int i = 0; i < 20; ++i) {
    const double a = ua(rng);
    const ScalarParams<double> p{allee_threshold_r0(a) * ut(rng), a};
    const double xa = solve_xa(p);
    const int n = 10000;
    for (int k = 0; k < n; ++k) {
      const double x0 = 2 * xa * k / (n - 1);
      if (std::abs(x0 - a) < kBasinExclusion || std::abs(x0 - xa) < kBasinExclusion) continue;
      const auto want = analytic_basin(x0, p, xa);
      const auto got = simulated_basin(x0, p);
      ++compared;
      if (got.budget_exhausted) ++unresolved;
      if (got.attractor != want.attractor) ++mismatches;
    }
  }
  report(4, mismatches == 0 && compared > 0,
         std::to_string(compared) + " points, " + std::to_string(mismatches) +
             " mismatches, " + std::to_string(unresolved) + " unresolved");
}

void criterion5() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> ua(0.02, 0.98), ut(0.0, 1.0);
  long bad_count = 0, bad_bracket = 0, bad_slope = 0, errors = 0;
  for (int i = 0; i < 10000; ++i) {
    const double a = ua(rng);
    const double r = allee_threshold_r0(a) * (0.001 + 0.998 * ut(rng));
    const double inv = a + (1 - a) * (0.001 + 0.998 * ut(rng));
    const SP p{r, a, 1 / inv};
    try {
      const auto eqs = find_interior_equilibria(p);
      if (eqs.size() != 1) {
        ++bad_count;
        continue;
      }
      const auto& e = eqs.front();
      if (!(e.x > std::max(1 / p.beta, a) && e.x < 1 && e.y > 0)) ++bad_bracket;
      if (!(p.beta * e.x * std::exp(-e.y) < 1)) ++bad_slope;
    } catch (const Error&) {
      ++errors;
    }
  }
  long nonempty = 0;
  for (int i = 0; i < 2000; ++i) {
    const double a = ua(rng);
    const double r = allee_threshold_r0(a) * (0.001 + 1.998 * ut(rng));
    const double beta = i % 2 == 0 ? 0.01 + 0.99 * ut(rng) : (1 + 2 * ut(rng)) / a;
    try {
      if (!find_interior_equilibria(SP{r, a, beta}).empty()) ++nonempty;
    } catch (const Error&) {
      ++errors;
    }
  }
  const bool ok = bad_count == 0 && bad_bracket == 0 && bad_slope == 0 && nonempty == 0 &&
                  errors == 0;
  report(5, ok,
         "count " + std::to_string(bad_count) + ", bracket " + std::to_string(bad_bracket) +
             ", slope " + std::to_string(bad_slope) + ", outside range " +
             std::to_string(nonempty) + ", errors " + std::to_string(errors));
}

void criterion6() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> ua(0.02, 0.98), ut(0.0, 1.0);
  int checked[2] = {0, 0};
  long disagreements = 0, errors = 0;
  for (int i = 0; checked[0] < 1000 || checked[1] < 1000; ++i) {
    const int regime = i % 2;
    if (checked[regime] >= 1000) continue;
    const double a = ua(rng);
    const double r0 = allee_threshold_r0(a);
    const double r = regime == 0 ? r0 * (0.01 + 0.98 * ut(rng)) : r0 * (1.01 + 4 * ut(rng));
    const double inv = a + (1 - a) * (0.001 + 0.998 * ut(rng));
    const SP p{r, a, 1 / inv};
    try {
      const auto th = solve_stability_thresholds(p);
      for (const auto& e : find_interior_equilibria(p)) {
        if (std::abs(e.x - th.x_hat) < kThresholdBand) continue;
        const auto c = classify_interior(e.x, e.eigenvalues, p, th, kThresholdBand);
        if (c.near_threshold) continue;
        ++checked[regime];
        if (!c.agrees) ++disagreements;
      }
    } catch (const Error&) {
      ++errors;
    }
  }
  report(6, disagreements == 0 && errors == 0,
         std::to_string(checked[0]) + " points with r<r0, " + std::to_string(checked[1]) +
             " with r>r0, " + std::to_string(disagreements) + " disagreements, " +
             std::to_string(errors) + " errors");
}

void criterion7() {
  const std::array<SP, 5> sets = {SP{1.0, 0.5, 3.0}, SP{3.5, 0.5, 3.0}, SP{0.5, 0.2, 8.0},
                                  SP{2.5, 0.7, 1.8}, SP{10.0, 0.85, 1.5}};
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> ux(0.0, 3.0), uy(0.0, 3.0);
  long failed = 0;
  bool certified = true;
  for (const auto& p : sets) {
    if (!global_extinction_check(p).holds) certified = false;
    for (int k = 0; k < 1000; ++k) {
      double y = uy(rng);
      while (!(y > 0)) y = uy(rng);
      const auto orbit = simulate_orbit(S(ux(rng), y), p, 100000);
      if (orbit.verdict.kind != VerdictKind::Extinct) ++failed;
    }
  }
  report(7, certified && failed == 0,
         std::string(certified ? "" : "parameter set not certified, ") + "5000 orbits, " +
             std::to_string(failed) + " not extinct");
}

bool quasi_periodic(const S& s0, const SP& p, std::string& why) {
  OrbitOptions opt;
  opt.cycle_tol = kCycleTol;
  opt.k_max = kMaxPeriod;
  const auto orbit = simulate_orbit(s0, p, 50000, opt);
  if (orbit.verdict.kind != VerdictKind::Budget) {
    why = to_string(orbit.verdict.kind);
    return false;
  }
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& s : orbit.states) lo = std::min({lo, s.x(), s.y()});
  if (!(orbit.max_state.maxCoeff() < kBoxBound && lo > 0)) {
    why = "left the box";
    return false;
  }
  const std::vector<S> tail(orbit.states.end() - 2 * kMaxPeriod, orbit.states.end());
  if (detect_cycle(tail, kMaxPeriod, kCycleTol)) {
    why = "periodic tail";
    return false;
  }
  const auto& last = orbit.states.back();
  const auto& prev = orbit.states[orbit.states.size() - 2];
  if ((last - prev).norm() < kCycleTol) {
    why = "settled";
    return false;
  }
  return true;
}

void criterion8() {
  std::string why1, why2;
  const bool a = quasi_periodic(S(0.7512, 0.2437), SP{3.99, 0.5, 1.5}, why1);
  const bool b = quasi_periodic(S(0.7811, 0.0308), SP{0.5, 0.5, 1.325}, why2);
  report(8, a && b,
         std::string("r=3.99 beta=1.5 ") + (a ? "quasi-periodic" : why1) +
             "; r=0.5 beta=1.325 " + (b ? "quasi-periodic" : why2));
}

void criterion9() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> ua(0.05, 0.95), ur(0.1, 8.0), ux(0.01, 3.0),
      ut(0.0, 1.0);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const ScalarParams<double> p{ur(rng), ua(rng)};
    const double x = ux(rng);
    auto f = [&](double t) { return eval_map(t, p); };
    const auto d = eval_derivatives(x, p);
    const double cf[3] = {d.d1, d.d2, d.d3};
    for (int k = 0; k < 3; ++k) {
      const double fd = finite_diff(f, x, k + 1);
      worst = std::max(worst, std::abs(fd - cf[k]) / std::max(1.0, std::abs(cf[k])));
    }
  }
  long not_decreasing = 0;
  for (int i = 0; i < 100; ++i) {
    const double a = ua(rng);
    const SP p{0.05 + 30 * ut(rng), a, 1.0};
    const double x_hat = (1 + a) / 2;
    const int n = 2000;
    double prev_d = 0, prev_t = 0;
    for (int k = 0; k < n; ++k) {
      const double x = x_hat + (1 - x_hat) * k / n;
      const auto st = stability_functions(x, p);
      if (k > 0 && !(st.D < prev_d && st.T < prev_t)) ++not_decreasing;
      prev_d = st.D;
      prev_t = st.T;
    }
  }
  report(9, worst <= kFdRel && not_decreasing == 0,
         "derivative max rel error " + fmt("%.3g", worst) + ", " +
             std::to_string(not_decreasing) + " non-decreasing D/T steps");
}

void criterion10() {
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> uk(1.0, 500.0), ua(0.1, 0.9), ut(0.05, 0.95),
      ub(0.01, 2.0);
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    const double K = uk(rng), b = ub(rng), a = ua(rng);
    const double r_hat = allee_threshold_r0(a) * ut(rng);
    const double beta_hat = 0.5 + 2.5 * ut(rng);
    const RawParams<double> raw{r_hat / K, K, a * K, b, beta_hat / (b * K)};
    const SP p = rescale(raw);
    S raw_state(K * (a + (1 - a) * ut(rng)), ut(rng) / b);
    S hat = rescale_state(raw_state, raw);
    for (int t = 0; t < 1000; ++t) {
      raw_state = eval_raw_system(raw_state, raw);
      hat = eval_system(hat, p);
      worst = std::max(worst, (rescale_state(raw_state, raw) - hat).cwiseAbs().maxCoeff());
    }
  }
  report(10, worst <= kRescaleTol, "max pointwise difference " + fmt("%.3g", worst));
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  return failures == 0 ? 0 : 1;
}
