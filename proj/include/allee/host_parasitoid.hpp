#pragma once

// Rescaled host-parasitoid system
//
//   x' = x exp(r (1-x)(x-a) - y)
//   y' = beta x (1 - exp(-y))
//
// with boundary equilibria E0 = (0,0), E1 = (a,0), E2 = (1,0) and up to three
// interior equilibria on the isocline y = r(1-x)(x-a). Interior stability is
// governed by D(x) = det J and T(x) = 1 + tr J + det J along that isocline.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "allee/errors.hpp"
#include "allee/numerics.hpp"
#include "allee/scalar_map.hpp"

namespace allee {

template <typename Scalar = double>
struct SystemParams {
  Scalar r;
  Scalar a;
  Scalar beta;

  ScalarParams<Scalar> host() const { return {r, a}; }
};

template <typename Scalar>
void validate(const SystemParams<Scalar>& p) {
  validate(p.host());
  if (!(p.beta > 0) || !std::isfinite(static_cast<double>(p.beta))) {
    throw DomainError("conversion parameter must satisfy beta > 0");
  }
}

/// Parameters of the dimensional model before rescaling.
template <typename Scalar = double>
struct RawParams {
  Scalar r_raw;     // 1/(density * time)
  Scalar K;         // carrying capacity
  Scalar a_raw;     // Allee threshold, 0 < a_raw < K
  Scalar b;         // searching efficiency
  Scalar beta_raw;  // conversion
};

template <typename Scalar>
void validate(const RawParams<Scalar>& raw) {
  if (!(raw.r_raw > 0 && raw.K > 0 && raw.a_raw > 0 && raw.b > 0 &&
        raw.beta_raw > 0)) {
    throw DomainError("raw parameters must all be positive");
  }
  if (!(raw.a_raw < raw.K)) {
    throw DomainError("Allee threshold must satisfy 0 < a < K");
  }
}

template <typename Scalar>
using State = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

template <typename Scalar>
SystemParams<Scalar> rescale(const RawParams<Scalar>& raw) {
  validate(raw);
  return {raw.r_raw * raw.K, raw.a_raw / raw.K, raw.beta_raw * raw.b * raw.K};
}

/// Dimensional state (host, parasitoid) to rescaled (x/K, b y).
template <typename Scalar>
State<Scalar> rescale_state(const State<Scalar>& s, const RawParams<Scalar>& raw) {
  return State<Scalar>(s.x() / raw.K, raw.b * s.y());
}

template <typename Scalar>
State<Scalar> unscale_state(const State<Scalar>& s, const RawParams<Scalar>& raw) {
  return State<Scalar>(s.x() * raw.K, s.y() / raw.b);
}

/// One step of the dimensional model.
template <typename Scalar>
State<Scalar> eval_raw_system(const State<Scalar>& s, const RawParams<Scalar>& raw) {
  const Scalar x = s.x(), y = s.y();
  const Scalar growth = raw.r_raw * (1 - x / raw.K) * (x - raw.a_raw);
  const Scalar escape = std::exp(-raw.b * y);
  return State<Scalar>(x * std::exp(growth) * escape,
                       raw.beta_raw * x * (1 - escape));
}

template <typename Scalar>
State<Scalar> eval_system(const State<Scalar>& s, const SystemParams<Scalar>& p) {
  const Scalar x = s.x(), y = s.y();
  if (x == Scalar(0)) return State<Scalar>::Zero();
  return State<Scalar>(x * std::exp(growth_exponent(x, p.host()) - y),
                       -p.beta * x * std::expm1(-y));
}

/// Jacobian of the map at an arbitrary state.
template <typename Scalar>
Matrix2<Scalar> system_jacobian(const State<Scalar>& s, const SystemParams<Scalar>& p) {
  const Scalar x = s.x(), y = s.y();
  const Scalar e = std::exp(growth_exponent(x, p.host()) - y);
  Matrix2<Scalar> j;
  j << e * (1 + x * p.r * (1 - 2 * x + p.a)), -x * e,
       -p.beta * std::expm1(-y), p.beta * x * std::exp(-y);
  return j;
}

// ---------------------------------------------------------------------------
// Extinction regions
// ---------------------------------------------------------------------------

enum class ExtinctionReason { None, Gamma, Delta, Overkill };

inline const char* to_string(ExtinctionReason r) {
  switch (r) {
    case ExtinctionReason::None: return "None";
    case ExtinctionReason::Gamma: return "Gamma";
    case ExtinctionReason::Delta: return "Delta";
    case ExtinctionReason::Overkill: return "Overkill";
  }
  return "?";
}

struct ExtinctionVerdict {
  bool extinct;
  ExtinctionReason reason;
};

/// Parasitoid level above which a host in (a, 1) is pushed to x(1) <= a.
template <typename Scalar>
Scalar overkill_threshold(Scalar x, const SystemParams<Scalar>& p) {
  return std::log(x / p.a) + growth_exponent(x, p.host());
}

/// Sufficient conditions for convergence to E0:
///   Gamma:    x <= a, excluding E1
///   Delta:    x >= x_a, excluding (x_a, 0)
///   Overkill: a < x < 1 and y large enough that x(1) <= a
template <typename Scalar>
ExtinctionVerdict in_extinction_region(const State<Scalar>& s,
                                       const SystemParams<Scalar>& p, Scalar x_a) {
  const Scalar x = s.x(), y = s.y();
  if (x <= p.a && !(x == p.a && y == Scalar(0))) {
    return {true, ExtinctionReason::Gamma};
  }
  if (x >= x_a && !(x == x_a && y == Scalar(0))) {
    return {true, ExtinctionReason::Delta};
  }
  if (x > p.a && x < 1 && y >= overkill_threshold(x, p)) {
    return {true, ExtinctionReason::Overkill};
  }
  return {false, ExtinctionReason::None};
}

template <typename Scalar>
ExtinctionVerdict in_extinction_region(const State<Scalar>& s,
                                       const SystemParams<Scalar>& p) {
  validate(p);
  return in_extinction_region(s, p, solve_xa(p.host()));
}

// ---------------------------------------------------------------------------
// Boundary equilibria
// ---------------------------------------------------------------------------

template <typename Scalar>
struct EquilibriumReport {
  std::string name;
  State<Scalar> location;
  Matrix2<Scalar> jacobian;
  EigenPair<Scalar> eigenvalues;
  FixedPointClass cls;
};

/// E0, E1, E2 with their (upper triangular) Jacobians. The classes follow
/// from the diagonal: E0 is always stable, E1 is a saddle for beta a < 1 and
/// a repeller for beta a > 1, E2 is stable iff r < r0 and beta < 1.
template <typename Scalar>
std::array<EquilibriumReport<Scalar>, 3> boundary_equilibria_report(
    const SystemParams<Scalar>& p) {
  validate(p);
  const Scalar r = p.r, a = p.a, beta = p.beta;
  auto make = [](std::string name, Scalar x, Matrix2<Scalar> j) {
    const auto eig = eig2(j);
    return EquilibriumReport<Scalar>{std::move(name), State<Scalar>(x, 0), j, eig,
                                     classify_moduli(eig)};
  };
  Matrix2<Scalar> j0, j1, j2;
  j0 << std::exp(-a * r), 0, 0, 0;
  j1 << 1 + a * r * (1 - a), -a, 0, beta * a;
  j2 << 1 - r * (1 - a), -1, 0, beta;
  return {make("E0", Scalar(0), j0), make("E1", a, j1), make("E2", Scalar(1), j2)};
}

// ---------------------------------------------------------------------------
// Isoclines and interior equilibria
// ---------------------------------------------------------------------------

template <typename Scalar>
struct Isoclines {
  SystemParams<Scalar> p;

  /// Host isocline y = g(x).
  Scalar g(Scalar x) const { return growth_exponent(x, p.host()); }

  /// Parasitoid isocline x = h(y); h(0+) = 1/beta.
  Scalar h(Scalar y) const {
    if (std::abs(y) < Scalar(1e-5)) {
      return (1 + y / 2 + y * y / 12) / p.beta;
    }
    return y / (-p.beta * std::expm1(-y));
  }
};

template <typename Scalar>
Isoclines<Scalar> isoclines(const SystemParams<Scalar>& p) {
  validate(p);
  return {p};
}

/// R(x) = beta x (1 - e^{-g(x)}) - g(x); interior equilibria are its roots in
/// (max(a, 1/beta), 1), with y = g(x).
template <typename Scalar>
Scalar interior_residual(Scalar x, const SystemParams<Scalar>& p) {
  const Scalar g = growth_exponent(x, p.host());
  return -p.beta * x * std::expm1(-g) - g;
}

template <typename Scalar>
struct InteriorJacobian {
  Matrix2<Scalar> matrix;
  Scalar trace;
  Scalar det;
  EigenPair<Scalar> eigenvalues;
};

/// Jacobian at an interior equilibrium, simplified with the equilibrium
/// identities e^{g(x) - y} = 1 and beta (1 - e^{-y}) = y / x.
template <typename Scalar>
InteriorJacobian<Scalar> interior_jacobian(Scalar x, Scalar y,
                                           const SystemParams<Scalar>& p) {
  const Scalar df = 1 + x * p.r * (1 - 2 * x + p.a);
  const Scalar q = p.beta * x * std::exp(-y);
  InteriorJacobian<Scalar> out;
  out.matrix << df, -x, y / x, q;
  out.trace = df + q;
  out.det = q * df + y;
  out.eigenvalues = eig2(out.trace, out.det);
  return out;
}

template <typename Scalar>
struct InteriorEquilibrium {
  Scalar x;
  Scalar y;
  Scalar trace;
  Scalar det;
  EigenPair<Scalar> eigenvalues;
  FixedPointClass cls;
};

template <typename Scalar>
InteriorJacobian<Scalar> interior_jacobian(const InteriorEquilibrium<Scalar>& eq,
                                           const SystemParams<Scalar>& p) {
  return interior_jacobian(eq.x, eq.y, p);
}

/// D(x) = det J and T(x) = 1 + tr J + det J along the host isocline.
template <typename Scalar>
struct StabilityFunctions {
  Scalar D;
  Scalar T;
};

template <typename Scalar>
StabilityFunctions<Scalar> stability_functions(Scalar x, const SystemParams<Scalar>& p) {
  if (!(x > p.a && x < 1)) {
    throw DomainError("stability functions are defined for a < x < 1");
  }
  const Scalar y = growth_exponent(x, p.host());
  const Scalar slope = p.r * x * (1 + p.a - 2 * x);
  const Scalar ratio = y / std::expm1(y);  // y e^{-y} / (1 - e^{-y})
  return {(1 + slope) * ratio + y, (2 + slope) * (1 + ratio) + y};
}

template <typename Scalar>
struct StabilityThresholds {
  Scalar x_hat;               // isocline vertex (1 + a)/2
  Scalar x_m;                 // critical point of the host map
  std::optional<Scalar> x_D;  // D(x) = 1 on (x_hat, 1)
  std::optional<Scalar> x_T;  // T(x) = 0 on (x_hat, 1)
};

/// D and T are strictly decreasing on [x_hat, 1), so each has at most one
/// crossing there. x_D exists for every r > 0 in exact arithmetic; x_T exists
/// iff r > r0.
template <typename Scalar>
StabilityThresholds<Scalar> solve_stability_thresholds(const SystemParams<Scalar>& p) {
  validate(p);
  StabilityThresholds<Scalar> out{(1 + p.a) / 2, critical_point_xm(p.host()),
                                  std::nullopt, std::nullopt};
  const Scalar lo = out.x_hat;
  const Scalar hi = 1 - Scalar(1e-12);
  auto d = [&](Scalar x) { return stability_functions(x, p).D - 1; };
  auto t = [&](Scalar x) { return stability_functions(x, p).T; };
  if (d(lo) > 0 && d(hi) < 0) out.x_D = find_root(d, lo, hi).x;
  if (t(lo) > 0 && t(hi) < 0) out.x_T = find_root(t, lo, hi).x;
  return out;
}

// ---------------------------------------------------------------------------
// Interior classification
// ---------------------------------------------------------------------------

/// Stability predicted from the position of x relative to x_hat, x_D, x_T.
enum class RegimeClass { Stable, Repeller, Saddle, Unstable };

inline const char* to_string(RegimeClass c) {
  switch (c) {
    case RegimeClass::Stable: return "Stable";
    case RegimeClass::Repeller: return "Repeller";
    case RegimeClass::Saddle: return "Saddle";
    case RegimeClass::Unstable: return "Unstable";
  }
  return "?";
}

template <typename Scalar>
struct InteriorClassification {
  FixedPointClass cls;          // final answer
  FixedPointClass eigen_class;  // from eigenvalue moduli
  RegimeClass regime_class;     // from threshold positions
  std::string rationale;        // which regime applied
  bool near_threshold;          // x within the band of x_D or x_T
  bool agrees;
};

inline bool regime_agrees(RegimeClass table, FixedPointClass eig) {
  switch (table) {
    case RegimeClass::Stable: return eig == FixedPointClass::Stable;
    case RegimeClass::Repeller: return eig == FixedPointClass::Repeller;
    case RegimeClass::Saddle: return eig == FixedPointClass::Saddle;
    case RegimeClass::Unstable:
      return eig == FixedPointClass::Saddle || eig == FixedPointClass::Repeller;
  }
  return false;
}

/// Eigenvalue moduli are the ground truth. The threshold regime gives the
/// rationale:
///   r <= r0: stable iff x > x_D, otherwise a repeller;
///   r >  r0: x < x_hat is unstable (det J > 1); else saddle if T(x) < 0,
///            repeller if D(x) > 1, stable otherwise.
/// Within `band` of x_D or x_T the answer is NonHyperbolic.
template <typename Scalar>
InteriorClassification<Scalar> classify_interior(
    Scalar x, const EigenPair<Scalar>& eig, const SystemParams<Scalar>& p,
    const StabilityThresholds<Scalar>& th, Scalar band = Scalar(1e-6)) {
  InteriorClassification<Scalar> out;
  out.eigen_class = classify_moduli(eig);

  const bool above_d = th.x_D ? x > *th.x_D : false;  // D(x) < 1
  const bool above_t = th.x_T ? x > *th.x_T : false;  // T(x) < 0
  const Scalar r0 = allee_threshold_r0(p.a);
  if (p.r <= r0) {
    out.regime_class = above_d ? RegimeClass::Stable : RegimeClass::Repeller;
    out.rationale = above_d ? "r<=r0; x>x_D" : "r<=r0; x<x_D";
  } else if (x < th.x_hat) {
    out.regime_class = RegimeClass::Unstable;
    out.rationale = "r>r0; x<x_hat; det>1";
  } else if (above_t) {
    out.regime_class = RegimeClass::Saddle;
    out.rationale = "r>r0; x>x_T";
  } else if (!above_d) {
    out.regime_class = RegimeClass::Repeller;
    out.rationale = "r>r0; x_hat<=x<x_D";
  } else {
    out.regime_class = RegimeClass::Stable;
    out.rationale = "r>r0; x_D<x<x_T";
  }

  out.near_threshold = (th.x_D && std::abs(x - *th.x_D) < band) ||
                       (th.x_T && std::abs(x - *th.x_T) < band);
  out.agrees = regime_agrees(out.regime_class, out.eigen_class);
  out.cls = out.near_threshold ? FixedPointClass::NonHyperbolic : out.eigen_class;
  return out;
}

template <typename Scalar>
InteriorClassification<Scalar> classify_interior(const InteriorEquilibrium<Scalar>& eq,
                                                 const SystemParams<Scalar>& p) {
  return classify_interior(eq.x, eq.eigenvalues, p, solve_stability_thresholds(p));
}

struct InteriorSolveOptions {
  double edge = 1e-9;
  std::size_t subintervals = 4096;
  std::size_t max_subintervals = 65536;
};

/// Interior equilibria sorted by x. Empty when beta <= 1 or beta a >= 1.
/// The scan is repeated on doubled grids while it reports more than three
/// roots, which the cubic bound on the root count rules out.
template <typename Scalar>
std::vector<InteriorEquilibrium<Scalar>> find_interior_equilibria(
    const SystemParams<Scalar>& p, const InteriorSolveOptions& opt = {}) {
  validate(p);
  std::vector<InteriorEquilibrium<Scalar>> out;
  if (p.beta <= 1 || p.beta * p.a >= 1) return out;

  // Here 1/beta lies in (a, 1). The edges shrink with the gaps so the
  // bracket survives beta -> 1 and beta -> 1/a, where the root approaches
  // an end of the interval.
  const Scalar left = 1 / p.beta;
  const Scalar gap = 1 - left;
  const Scalar lo = left + std::min(Scalar(opt.edge), Scalar(1e-3) * std::min(left - p.a, gap));
  const Scalar hi = 1 - std::min(Scalar(opt.edge), Scalar(1e-3) * gap);
  auto residual = [&](Scalar x) { return interior_residual(x, p); };
  RootOptions ropt;
  ropt.ftol = 0;

  std::size_t n = opt.subintervals;
  ScanResult<Scalar> scan = scan_roots(residual, lo, hi, n, ropt);
  while (scan.roots.size() > 3 && n < opt.max_subintervals) {
    n *= 2;
    scan = scan_roots(residual, lo, hi, n, ropt);
  }
  if (scan.roots.size() > 3) {
    throw SolveError("more than three interior equilibria detected");
  }

  const auto th = solve_stability_thresholds(p);
  for (const auto& root : scan.roots) {
    InteriorEquilibrium<Scalar> eq;
    eq.x = root.x;
    eq.y = growth_exponent(root.x, p.host());
    const auto jac = interior_jacobian(eq.x, eq.y, p);
    eq.trace = jac.trace;
    eq.det = jac.det;
    eq.eigenvalues = jac.eigenvalues;
    eq.cls = classify_interior(eq.x, eq.eigenvalues, p, th).cls;
    out.push_back(eq);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Neimark-Sacker locus
// ---------------------------------------------------------------------------

template <typename Scalar>
struct BetaCResult {
  Scalar beta_c;
  Scalar width;  // final bracket width in beta
  Scalar x;      // interior equilibrium at beta_c
  Scalar x_D;
  int iterations;
};

/// beta at which the interior equilibrium crosses D(x) = 1. Bisection in beta
/// on x(beta) - x_D over (1, 1/a); x(beta) must decrease along the way.
template <typename Scalar>
BetaCResult<Scalar> find_beta_c(Scalar a, Scalar r, Scalar tol = Scalar(1e-6)) {
  validate(ScalarParams<Scalar>{r, a});
  const SystemParams<Scalar> probe{r, a, Scalar(1)};
  const auto th = solve_stability_thresholds(probe);
  if (!th.x_D) throw NotFound("D(x) = 1 has no crossing on (x_hat, 1)");
  const Scalar x_d = *th.x_D;

  auto eq_x = [&](Scalar beta) {
    const auto eqs = find_interior_equilibria(SystemParams<Scalar>{r, a, beta});
    if (eqs.size() > 1) {
      throw NonUnique("several interior equilibria at beta = " +
                      std::to_string(static_cast<double>(beta)));
    }
    if (eqs.empty()) {
      throw NotFound("no interior equilibrium at beta = " +
                     std::to_string(static_cast<double>(beta)));
    }
    return eqs.front().x;
  };

  Scalar lo = 1 + Scalar(1e-9), hi = 1 / a - Scalar(1e-9);
  Scalar x_lo = eq_x(lo), x_hi = eq_x(hi);
  if (!(x_lo > x_d && x_hi < x_d)) {
    throw NotFound("x(beta) - x_D does not change sign on (1, 1/a)");
  }
  int it = 0;
  while (hi - lo > tol && it < 200) {
    const Scalar mid = lo + (hi - lo) / 2;
    const Scalar x_mid = eq_x(mid);
    if (!(x_mid < x_lo && x_mid > x_hi)) {
      throw SolveError("interior equilibrium is not monotone in beta");
    }
    if (x_mid > x_d) {
      lo = mid;
      x_lo = x_mid;
    } else {
      hi = mid;
      x_hi = x_mid;
    }
    ++it;
  }
  const Scalar beta_c = lo + (hi - lo) / 2;
  return {beta_c, hi - lo, eq_x(beta_c), x_d, it};
}

// ---------------------------------------------------------------------------
// Stable manifold of E1
// ---------------------------------------------------------------------------

/// Quadratic expansion y = c1 u + c2 u^2 + O(u^3), u = x - a, of the stable
/// manifold of the saddle E1. c1 and c2 are the published closed forms;
/// c2_invariant solves the second-order invariance equation and differs
/// from c2 (the published curve is only tangent to the manifold).
template <typename Scalar>
struct ManifoldExpansion {
  Scalar a;
  Scalar beta;
  Scalar c1;
  Scalar c2;
  Scalar c2_invariant;

  /// Published quadratic in the original coordinates,
  /// beta a - ((beta a + 1 + a r (1-a))/a) x + ((1 + a r (1-a))/a^2) x^2.
  Scalar gamma(Scalar x) const {
    const Scalar u = x - a;
    return c1 * u + c2 * u * u;
  }

  Scalar gamma_invariant(Scalar x) const {
    const Scalar u = x - a;
    return c1 * u + c2_invariant * u * u;
  }
};

template <typename Scalar>
ManifoldExpansion<Scalar> stable_manifold_coeffs(const SystemParams<Scalar>& p) {
  validate(p);
  const Scalar a = p.a, r = p.r, beta = p.beta;
  const Scalar mu = beta * a;
  if (!(mu < 1)) throw DomainError("E1 is a saddle only when beta a < 1");
  const Scalar lambda = 1 + a * r * (1 - a);
  const Scalar c1 = (1 - mu + a * r * (1 - a)) / a;
  const Scalar c2 = lambda / (a * a);
  const Scalar c2_inv =
      c1 * (1 + 2 * mu + 2 * a * a * r - mu * lambda) / (2 * a * (mu * mu - lambda));
  return {a, beta, c1, c2, c2_inv};
}

// ---------------------------------------------------------------------------
// Global extinction
// ---------------------------------------------------------------------------

template <typename Scalar>
struct ExtinctionCertificate {
  bool holds;                 // beta a > e^{(1-a)/2} and r < r0
  Scalar bound;               // e^{(1-a)/2}
  std::optional<Scalar> zbar; // positive fixed point of z -> beta a (1 - e^{-z})
};

template <typename Scalar>
ExtinctionCertificate<Scalar> global_extinction_check(const SystemParams<Scalar>& p) {
  validate(p);
  const Scalar mu = p.beta * p.a;
  const Scalar half_gap = (1 - p.a) / 2;
  ExtinctionCertificate<Scalar> out{
      mu > std::exp(half_gap) && p.r < allee_threshold_r0(p.a), std::exp(half_gap),
      std::nullopt};
  if (mu > 1) {
    auto s = [&](Scalar z) { return -mu * std::expm1(-z) - z; };
    // s > 0 on (0, 2(mu - 1)/mu) to second order, and s(mu) < 0.
    const Scalar lo = Scalar(1e-3) * (mu - 1) / mu;
    out.zbar = find_root(s, lo, mu).x;
    if (out.holds && !(*out.zbar > half_gap)) {
      throw SolveError("extinction certificate: zbar does not exceed (1-a)/2");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Orbits
// ---------------------------------------------------------------------------

enum class VerdictKind { ConvergedTo, Cycle, Extinct, Budget };

inline const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::ConvergedTo: return "ConvergedTo";
    case VerdictKind::Cycle: return "Cycle";
    case VerdictKind::Extinct: return "Extinct";
    case VerdictKind::Budget: return "Budget";
  }
  return "?";
}

template <typename Scalar>
struct OrbitVerdict {
  VerdictKind kind = VerdictKind::Budget;
  std::string target;          // "E0", "E1", "E2", "E*1".. or "fixed point"
  State<Scalar> point = State<Scalar>::Zero();
  int period = 0;
};

struct OrbitOptions {
  long stride = 1;             // keep every stride-th state
  double converge_tol = 1e-9;
  int converge_steps = 10;
  double extinct = 1e-15;
  int cycle_check_every = 1024;
  int k_max = 64;
  double cycle_tol = 1e-9;
};

template <typename Scalar>
struct Orbit {
  std::vector<State<Scalar>> states;  // states at t = 0, stride, 2 stride, ...
  long stride = 1;
  long steps = 0;                     // iterations performed
  OrbitVerdict<Scalar> verdict;
  State<Scalar> max_state = State<Scalar>::Zero();  // componentwise, t >= 1
};

/// Iterates the system for up to `budget` steps, stopping early once the
/// orbit stays within converge_tol of a known equilibrium for converge_steps
/// consecutive steps, once x drops below `extinct`, or once a cycle of period
/// 2..k_max is seen at a checkpoint. Settling at E0 is reported as Extinct.
template <typename Scalar>
Orbit<Scalar> simulate_orbit(const State<Scalar>& s0, const SystemParams<Scalar>& p,
                             long budget, const OrbitOptions& opt = {}) {
  validate(p);
  if (!(s0.x() >= 0 && s0.y() >= 0)) throw DomainError("initial state must be nonnegative");
  if (budget < 1) throw DomainError("step budget must be positive");
  if (opt.stride < 1) throw DomainError("stride must be positive");

  std::vector<std::pair<std::string, State<Scalar>>> targets = {
      {"E0", State<Scalar>(0, 0)}, {"E1", State<Scalar>(p.a, 0)},
      {"E2", State<Scalar>(1, 0)}};
  try {
    int i = 0;
    for (const auto& eq : find_interior_equilibria(p)) {
      targets.push_back({"E*" + std::to_string(++i), State<Scalar>(eq.x, eq.y)});
    }
  } catch (const SolveError&) {
    // interior targets are a convenience for early termination only
  }
  std::vector<int> near(targets.size(), 0);

  Orbit<Scalar> orbit;
  orbit.stride = opt.stride;
  orbit.states.push_back(s0);
  const std::size_t window = 2 * static_cast<std::size_t>(opt.k_max);
  std::vector<State<Scalar>> history;
  history.reserve(window);

  State<Scalar> s = s0;
  for (long t = 1; t <= budget; ++t) {
    s = eval_system(s, p);
    orbit.steps = t;
    orbit.max_state = orbit.max_state.cwiseMax(s);
    if (t % opt.stride == 0) orbit.states.push_back(s);

    if (s.x() < Scalar(opt.extinct)) {
      orbit.verdict = {VerdictKind::Extinct, "E0", State<Scalar>::Zero(), 0};
      return orbit;
    }
    for (std::size_t i = 0; i < targets.size(); ++i) {
      near[i] = (s - targets[i].second).norm() < Scalar(opt.converge_tol) ? near[i] + 1 : 0;
      if (near[i] >= opt.converge_steps) {
        const auto kind = i == 0 ? VerdictKind::Extinct : VerdictKind::ConvergedTo;
        orbit.verdict = {kind, targets[i].first, targets[i].second, 0};
        return orbit;
      }
    }
    const long phase = t % opt.cycle_check_every;
    if (phase == 0 || phase > opt.cycle_check_every - static_cast<long>(window)) {
      history.push_back(s);
    }
    if (phase == 0) {
      if (history.size() == window) {
        const auto k = detect_cycle(std::span<const State<Scalar>>(history), opt.k_max,
                                    Scalar(opt.cycle_tol));
        if (k) {
          orbit.verdict = *k == 1
              ? OrbitVerdict<Scalar>{VerdictKind::ConvergedTo, "fixed point", s, 0}
              : OrbitVerdict<Scalar>{VerdictKind::Cycle, "", s, *k};
          return orbit;
        }
      }
      history.clear();
    }
  }
  orbit.verdict = {VerdictKind::Budget, "", s, 0};
  return orbit;
}

}  // namespace allee
