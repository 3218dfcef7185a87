#pragma once

// Scalar Allee-Ricker map f(x) = x exp(r (1-x)(x-a)) on x >= 0.
//
// Fixed points are 0 (always stable), a (always unstable) and 1, which loses
// stability through a period-doubling at r0 = 2/(1-a). For r < r0 the basins
// are B(0) = [0,a) u (x_a,inf) and B(1) = (a,x_a), where x_a > max(1, x_m)
// solves f(x_a) = a on the decreasing branch.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "allee/errors.hpp"
#include "allee/numerics.hpp"

namespace allee {

template <typename Scalar = double>
struct ScalarParams {
  Scalar r;  // intrinsic growth rate
  Scalar a;  // Allee threshold, 0 < a < 1
};

template <typename Scalar>
void validate(const ScalarParams<Scalar>& p) {
  if (!(p.r > 0) || !std::isfinite(static_cast<double>(p.r))) {
    throw DomainError("growth rate must satisfy r > 0");
  }
  if (!(p.a > 0 && p.a < 1)) {
    throw DomainError("Allee threshold must satisfy 0 < a < 1");
  }
}

/// Exponent r(1-x)(x-a) of the per-capita growth factor.
template <typename Scalar>
Scalar growth_exponent(Scalar x, const ScalarParams<Scalar>& p) {
  return p.r * (1 - x) * (x - p.a);
}

template <typename Scalar>
Scalar eval_map(Scalar x, const ScalarParams<Scalar>& p) {
  if (x == Scalar(0)) return Scalar(0);
  return x * std::exp(growth_exponent(x, p));
}

template <typename Scalar>
struct Derivatives {
  Scalar d1;
  Scalar d2;
  Scalar d3;
};

/// f', f'' and f''' in closed form. f''' = r P4(z) e^E with z = 2x - 1 - a.
template <typename Scalar>
Derivatives<Scalar> eval_derivatives(Scalar x, const ScalarParams<Scalar>& p) {
  const Scalar r = p.r, a = p.a;
  const Scalar e = std::exp(growth_exponent(x, p));
  const Scalar u = 1 + a - 2 * x;
  const Scalar d1 = e * (1 + x * r * u);
  const Scalar d2 = r * (r * x * u * u + 3 * u - (1 + a)) * e;
  const Scalar z = 2 * x - 1 - a;
  const Scalar z2 = z * z;
  const Scalar p4 = -(r * r / 2) * z2 * z2 - (r * r * (1 + a) / 2) * z2 * z +
                    6 * r * z2 + 3 * r * (1 + a) * z - 6;
  return {d1, d2, r * p4 * e};
}

/// Mixed partial d^2 f / dx dr.
template <typename Scalar>
Scalar mixed_partial_xr(Scalar x, const ScalarParams<Scalar>& p) {
  const Scalar u = 1 + p.a - 2 * x;
  const Scalar q = (1 - x) * (x - p.a);  // dE/dr
  const Scalar e = std::exp(p.r * q);
  return e * (q * (1 + x * p.r * u) + x * u);
}

/// Sf = f'''/f' - 3/2 (f''/f')^2. Throws DegenerateDerivative where
/// |f'(x)| < tol, i.e. at (or numerically next to) the critical point x_m.
template <typename Scalar>
Scalar schwarzian(Scalar x, const ScalarParams<Scalar>& p,
                  Scalar tol = Scalar(1e-12)) {
  const auto d = eval_derivatives(x, p);
  if (std::abs(d.d1) < tol) {
    throw DegenerateDerivative("Schwarzian undefined: f'(x) vanishes");
  }
  const Scalar q = d.d2 / d.d1;
  return d.d3 / d.d1 - Scalar(1.5) * q * q;
}

template <typename Scalar>
Scalar allee_threshold_r0(Scalar a) {
  if (!(a > 0 && a < 1)) {
    throw DomainError("Allee threshold must satisfy 0 < a < 1");
  }
  return 2 / (1 - a);
}

/// Maximiser of f, the positive root of 1 + r x (1 + a - 2x) = 0.
template <typename Scalar>
Scalar critical_point_xm(const ScalarParams<Scalar>& p) {
  const Scalar r = p.r, a = p.a;
  return (1 + a) / 4 + std::sqrt((a + 1) * (a + 1) * r * r + 8 * r) / (4 * r);
}

/// Unique x_a > max(1, x_m) with f(x_a) = a. The upper bracket doubles
/// until f drops below a.
template <typename Scalar>
Scalar solve_xa(const ScalarParams<Scalar>& p, const RootOptions& opt = {}) {
  validate(p);
  const Scalar lo = std::max(Scalar(1), critical_point_xm(p));
  auto g = [&](Scalar x) { return eval_map(x, p) - p.a; };
  Scalar hi = 2 * lo;
  int doublings = 0;
  while (!(g(hi) < 0)) {
    hi *= 2;
    if (++doublings > 60 || !std::isfinite(static_cast<double>(hi))) {
      throw BracketError("solve_xa: could not bracket f(x) = a from above");
    }
  }
  return find_root(g, lo, hi, opt).x;
}

// ---------------------------------------------------------------------------
// Fixed points
// ---------------------------------------------------------------------------

enum class Stability { Stable, Unstable, NonHyperbolic };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "Stable";
    case Stability::Unstable: return "Unstable";
    case Stability::NonHyperbolic: return "NonHyperbolic";
  }
  return "?";
}

template <typename Scalar>
struct ScalarEquilibrium {
  Scalar x;
  Scalar multiplier;
  Stability stability;
  // Set for a multiplier of -1: Sf < 0 there makes the point stable.
  std::optional<Scalar> schwarzian;
  bool locally_stable;
};

template <typename Scalar>
Stability classify_multiplier(Scalar m, Scalar tol = Scalar(1e-9)) {
  const Scalar am = std::abs(m);
  if (std::abs(am - 1) <= tol) return Stability::NonHyperbolic;
  return am < 1 ? Stability::Stable : Stability::Unstable;
}

template <typename Scalar>
std::vector<ScalarEquilibrium<Scalar>> classify_scalar_equilibria(
    const ScalarParams<Scalar>& p) {
  validate(p);
  const Scalar r = p.r, a = p.a;
  std::vector<ScalarEquilibrium<Scalar>> out;
  auto add = [&](Scalar x, Scalar m) {
    ScalarEquilibrium<Scalar> eq{x, m, classify_multiplier(m), std::nullopt,
                                 std::abs(m) < 1};
    if (eq.stability == Stability::NonHyperbolic && m < 0) {
      eq.schwarzian = schwarzian(x, p);
      eq.locally_stable = *eq.schwarzian < 0;
    }
    out.push_back(eq);
  };
  add(Scalar(0), std::exp(-r * a));
  add(a, 1 + a * r * (1 - a));
  add(Scalar(1), 1 + r * (a - 1));
  return out;
}

// ---------------------------------------------------------------------------
// Period-doubling at r0
// ---------------------------------------------------------------------------

template <typename Scalar>
struct PeriodDoublingCheck {
  Scalar r0;
  Scalar mixed_partial;       // d^2 f / dx dr at (1, r0)
  Scalar cubic_coefficient;   // (f''^2)/2 + f'''/3 at (1, r0)
  bool mixed_nonzero;
  bool cubic_nonzero;
};

template <typename Scalar>
PeriodDoublingCheck<Scalar> verify_period_doubling_at_r0(Scalar a) {
  const Scalar r0 = allee_threshold_r0(a);
  const ScalarParams<Scalar> p{r0, a};
  const auto d = eval_derivatives(Scalar(1), p);
  const Scalar mixed = mixed_partial_xr(Scalar(1), p);
  const Scalar cubic = d.d2 * d.d2 / 2 + d.d3 / 3;
  return {r0, mixed, cubic, mixed != Scalar(0), cubic != Scalar(0)};
}

// ---------------------------------------------------------------------------
// Two-cycles
// ---------------------------------------------------------------------------

/// Left side of the 2-cycle equation (1-x)(x-a) + (1-f)(f-a), written
/// directly. Loses all relative accuracy next to x = 1.
template <typename Scalar>
Scalar cycle_residual_direct(Scalar x, const ScalarParams<Scalar>& p) {
  const Scalar fx = eval_map(x, p);
  return (1 - x) * (x - p.a) + (1 - fx) * (fx - p.a);
}

/// Same function in shifted variables v = x - 1, w = f(x) - 1:
/// -(v (v + 1 - a) + w (w + 1 - a)), with w from expm1 so both terms keep
/// full relative precision as x -> 1.
template <typename Scalar>
Scalar cycle_residual(Scalar x, const ScalarParams<Scalar>& p) {
  const Scalar c = 1 - p.a;
  const Scalar v = x - 1;
  const Scalar w = x == Scalar(0)
                       ? Scalar(-1)
                       : std::expm1(std::log1p(v) + growth_exponent(x, p));
  return -(v * (v + c) + w * (w + c));
}

template <typename Scalar>
struct TwoCycle {
  Scalar x1;          // in (a, 1)
  Scalar x2;          // f(x1) > 1
  Scalar multiplier;  // (f^2)'(x1) = f'(x1) f'(x2)
};

/// Product form of (f^2)' at a 2-cycle.
template <typename Scalar>
Scalar two_cycle_multiplier(Scalar x1, Scalar x2, const ScalarParams<Scalar>& p) {
  const Scalar r = p.r, a = p.a;
  const Scalar e = std::exp(r * ((1 - x1) * (x1 - a) + (1 - x2) * (x2 - a)));
  return e * (1 + r * x1 * (1 - 2 * x1 + a)) * (1 + r * x2 * (1 - 2 * x2 + a));
}

struct TwoCycleScan {
  std::size_t subintervals = 2048;
  double edge = 1e-9;       // scan (a + edge, 1 - edge)
  double residual = 1e-10;  // acceptance on |f(x2) - x1|, |f(x1) - x2|
};

/// Purely numerical search: sign changes of the cycle residual inside
/// (a, 1), refined by bisection; the largest root whose image exceeds 1 is
/// returned. No use is made of the known birth at r0.
template <typename Scalar>
std::optional<TwoCycle<Scalar>> locate_two_cycle(const ScalarParams<Scalar>& p,
                                                 const TwoCycleScan& scan = {}) {
  validate(p);
  auto g = [&](Scalar x) { return cycle_residual(x, p); };
  RootOptions opt;
  opt.ftol = 0;
  const auto found = scan_roots(g, p.a + Scalar(scan.edge), 1 - Scalar(scan.edge),
                                scan.subintervals, opt);
  for (auto it = found.roots.rbegin(); it != found.roots.rend(); ++it) {
    const Scalar x1 = it->x;
    const Scalar x2 = eval_map(x1, p);
    if (!(x1 > p.a && x1 < 1 && x2 > 1)) continue;
    if (std::abs(eval_map(x2, p) - x1) > Scalar(scan.residual)) continue;
    return TwoCycle<Scalar>{x1, x2, two_cycle_multiplier(x1, x2, p)};
  }
  return std::nullopt;
}

/// The positive 2-cycle {x1 < 1 < x2}, which exists exactly for r > r0.
/// Throws SolveError when r is clearly above r0 but the scan finds nothing;
/// callers can retry with more subintervals.
template <typename Scalar>
std::optional<TwoCycle<Scalar>> find_two_cycle(const ScalarParams<Scalar>& p,
                                               const TwoCycleScan& scan = {}) {
  validate(p);
  const Scalar r0 = allee_threshold_r0(p.a);
  if (p.r <= r0) return std::nullopt;
  auto cycle = locate_two_cycle(p, scan);
  if (!cycle && p.r > r0 + Scalar(1e-9)) {
    throw SolveError("no 2-cycle sign change found although r > r0; "
                     "retry with a finer scan");
  }
  return cycle;
}

// ---------------------------------------------------------------------------
// Iteration, basins, bifurcation sweeps
// ---------------------------------------------------------------------------

struct IterationOptions {
  long budget = 100000;
  double converge_tol = 1e-9;
  int converge_steps = 10;
  double escape = 1e-15;
  int cycle_check_every = 1024;
  int k_max = 64;
  double cycle_tol = 1e-9;
};

enum class Attractor { Zero, One, Cycle, Other };
enum class BasinMode { Analytic, Simulated };

inline const char* to_string(Attractor a) {
  switch (a) {
    case Attractor::Zero: return "Zero";
    case Attractor::One: return "One";
    case Attractor::Cycle: return "Cycle";
    case Attractor::Other: return "Other";
  }
  return "?";
}

struct BasinLabel {
  Attractor attractor;
  BasinMode source;
  long steps = 0;
  bool budget_exhausted = false;  // simulated mode found no verdict
  std::optional<int> period;      // for Attractor::Cycle
};

/// Basin label from the closed-form basins, valid for r < r0. Points within
/// 1e-12 of the boundary points a and x_a are labelled Other.
template <typename Scalar>
BasinLabel analytic_basin(Scalar x0, const ScalarParams<Scalar>& p, Scalar x_a) {
  const Scalar eps = Scalar(1e-12);
  if (std::abs(x0 - p.a) <= eps || std::abs(x0 - x_a) <= eps) {
    return {Attractor::Other, BasinMode::Analytic, 0, false, std::nullopt};
  }
  if (x0 < p.a || x0 > x_a) {
    return {Attractor::Zero, BasinMode::Analytic, 0, false, std::nullopt};
  }
  return {Attractor::One, BasinMode::Analytic, 0, false, std::nullopt};
}

template <typename Scalar>
BasinLabel simulated_basin(Scalar x0, const ScalarParams<Scalar>& p,
                           const IterationOptions& opt = {}) {
  const Scalar fixed[3] = {Scalar(0), p.a, Scalar(1)};
  int near_count[3] = {0, 0, 0};
  std::vector<Scalar> history;
  const std::size_t window = 2 * static_cast<std::size_t>(opt.k_max);
  history.reserve(window + 1);

  Scalar x = x0;
  for (long t = 1; t <= opt.budget; ++t) {
    x = eval_map(x, p);
    if (x < Scalar(opt.escape)) return {Attractor::Zero, BasinMode::Simulated, t, false, std::nullopt};
    for (int i = 0; i < 3; ++i) {
      near_count[i] = std::abs(x - fixed[i]) < Scalar(opt.converge_tol)
                          ? near_count[i] + 1
                          : 0;
      if (near_count[i] >= opt.converge_steps) {
        const Attractor att = i == 0   ? Attractor::Zero
                              : i == 2 ? Attractor::One
                                       : Attractor::Other;
        return {att, BasinMode::Simulated, t, false, std::nullopt};
      }
    }
    // Only the window preceding each checkpoint is kept.
    const long phase = t % opt.cycle_check_every;
    if (phase == 0 || phase > opt.cycle_check_every - static_cast<long>(window)) {
      history.push_back(x);
    }
    if (phase == 0) {
      if (history.size() == window) {
        const auto k = detect_cycle(std::span<const Scalar>(history), opt.k_max,
                                    Scalar(opt.cycle_tol));
        if (k && *k >= 2) {
          return {Attractor::Cycle, BasinMode::Simulated, t, false, *k};
        }
      }
      history.clear();
    }
  }
  return {Attractor::Other, BasinMode::Simulated, opt.budget, true, std::nullopt};
}

template <typename Scalar>
BasinLabel basin_of(Scalar x0, const ScalarParams<Scalar>& p, BasinMode mode,
                    const IterationOptions& opt = {}) {
  validate(p);
  if (!(x0 >= 0)) throw DomainError("initial state must be nonnegative");
  if (mode == BasinMode::Analytic) {
    if (!(p.r < allee_threshold_r0(p.a))) {
      throw DomainError("analytic basins require r < r0 = 2/(1-a)");
    }
    return analytic_basin(x0, p, solve_xa(p));
  }
  return simulated_basin(x0, p, opt);
}

template <typename Scalar>
struct SweepRow {
  Scalar r;
  std::vector<Scalar> samples;
};

template <typename Scalar>
Scalar default_sweep_seed(Scalar a) {
  return (1 + a) / 2 + Scalar(0.01);
}

/// Iterates f from one deterministic seed for each r on the inclusive grid
/// r_lo..r_hi, drops `transient` steps and records the next `record`.
/// Orbits that fall below 1e-15 are recorded as 0.
template <typename Scalar>
std::vector<SweepRow<Scalar>> bifurcation_sweep(Scalar a, Scalar r_lo, Scalar r_hi,
                                                std::size_t steps, long transient,
                                                std::size_t record,
                                                std::optional<Scalar> seed = {}) {
  if (!(r_lo > 0 && r_lo < r_hi)) throw DomainError("sweep requires 0 < r_lo < r_hi");
  if (steps < 2) throw DomainError("sweep requires at least 2 grid points");
  if (transient < 1 || record < 1) {
    throw DomainError("transient and record counts must be positive");
  }
  const Scalar x_seed = seed.value_or(default_sweep_seed(a));
  std::vector<SweepRow<Scalar>> rows;
  rows.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const Scalar r = i + 1 == steps
                         ? r_hi
                         : r_lo + (r_hi - r_lo) * Scalar(i) / Scalar(steps - 1);
    const ScalarParams<Scalar> p{r, a};
    validate(p);
    Scalar x = x_seed;
    auto step = [&] {
      x = x < Scalar(1e-15) ? Scalar(0) : eval_map(x, p);
    };
    for (long t = 0; t < transient; ++t) step();
    SweepRow<Scalar> row{r, {}};
    row.samples.reserve(record);
    for (std::size_t t = 0; t < record; ++t) {
      step();
      row.samples.push_back(x < Scalar(1e-15) ? Scalar(0) : x);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Number of clusters among the samples when values closer than tol are
/// merged (single linkage on the sorted values).
template <typename Scalar>
std::size_t count_distinct(std::span<const Scalar> samples, Scalar tol) {
  if (samples.empty()) return 0;
  std::vector<Scalar> v(samples.begin(), samples.end());
  std::sort(v.begin(), v.end());
  std::size_t n = 1;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] - v[i - 1] > tol) ++n;
  }
  return n;
}

template <typename Scalar>
std::size_t count_distinct(const std::vector<Scalar>& samples, Scalar tol) {
  return count_distinct(std::span<const Scalar>(samples), tol);
}

}  // namespace allee
