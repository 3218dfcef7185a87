#pragma once

// Shared numerical kernels: bracketed bisection, sign-change root scanning,
// the 2x2 characteristic-polynomial eigen solver, cycle detection on sampled
// orbits and finite-difference derivatives used as independent oracles.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "allee/errors.hpp"

namespace allee {

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

template <typename Scalar>
struct Bracket {
  Scalar lo;
  Scalar hi;
  Scalar f_lo;
  Scalar f_hi;
};

/// Evaluates f at both ends and checks for a sign change.
/// An endpoint where f is exactly zero counts as a valid bracket.
template <typename Scalar, typename F>
Bracket<Scalar> make_bracket(F&& f, Scalar lo, Scalar hi) {
  if (!(lo < hi)) throw InvalidBracket("bracket requires lo < hi");
  const Scalar f_lo = f(lo);
  const Scalar f_hi = f(hi);
  if (!std::isfinite(static_cast<double>(f_lo)) ||
      !std::isfinite(static_cast<double>(f_hi))) {
    throw InvalidBracket("function is not finite at the bracket ends");
  }
  if (f_lo * f_hi > Scalar(0)) {
    throw InvalidBracket("function has the same sign at both bracket ends");
  }
  return {lo, hi, f_lo, f_hi};
}

struct RootOptions {
  double xtol = 1e-12;
  double ftol = 1e-12;  // set to 0 to stop on bracket width only
  int max_iter = 200;
};

template <typename Scalar>
struct RootResult {
  Scalar x;
  Scalar residual;  // f(x)
  Scalar width;     // final bracket width
  int iterations;
};

/// Bisection. The result always lies inside the input bracket and is
/// returned once |f(x)| <= ftol or the bracket is narrower than xtol.
template <typename Scalar, typename F>
RootResult<Scalar> find_root(F&& f, const Bracket<Scalar>& b,
                             const RootOptions& opt = {}) {
  if (!(b.lo < b.hi) || b.f_lo * b.f_hi > Scalar(0)) {
    throw InvalidBracket("find_root: not a sign-change bracket");
  }
  if (b.f_lo == Scalar(0)) return {b.lo, b.f_lo, b.hi - b.lo, 0};
  if (b.f_hi == Scalar(0)) return {b.hi, b.f_hi, b.hi - b.lo, 0};

  Scalar lo = b.lo, hi = b.hi;
  const bool lo_negative = b.f_lo < Scalar(0);
  Scalar mid{}, fmid{};
  int it = 0;
  while (true) {
    mid = lo + (hi - lo) / 2;
    fmid = f(mid);
    ++it;
    if (fmid == Scalar(0) || std::abs(fmid) <= Scalar(opt.ftol)) break;
    if ((fmid < Scalar(0)) == lo_negative) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= Scalar(opt.xtol) || it >= opt.max_iter) {
      mid = lo + (hi - lo) / 2;
      fmid = f(mid);
      break;
    }
  }
  return {mid, fmid, hi - lo, it};
}

template <typename Scalar, typename F>
RootResult<Scalar> find_root(F&& f, Scalar lo, Scalar hi,
                             const RootOptions& opt = {}) {
  return find_root(f, make_bracket<Scalar>(f, lo, hi), opt);
}

template <typename Scalar>
struct ScanResult {
  std::vector<RootResult<Scalar>> roots;  // ascending, deduplicated
  std::size_t sign_changes = 0;
};

/// Uniform n-interval scan of [lo, hi]; every cell whose end values differ
/// in sign (or hit zero exactly) is refined by bisection. Roots closer than
/// 10*xtol are merged. A tangential double root produces no sign change and
/// is invisible to the scan; callers retry on a finer grid when they can
/// detect the miss.
template <typename Scalar, typename F>
ScanResult<Scalar> scan_roots(F&& f, Scalar lo, Scalar hi, std::size_t n,
                              const RootOptions& opt = {}) {
  if (!(lo < hi)) throw DomainError("scan_roots requires lo < hi");
  if (n < 2) throw DomainError("scan_roots requires at least 2 intervals");

  ScanResult<Scalar> out;
  const Scalar step = (hi - lo) / Scalar(n);
  auto grid = [&](std::size_t i) {
    return i == n ? hi : lo + step * Scalar(i);
  };

  Scalar x0 = grid(0);
  Scalar f0 = f(x0);
  for (std::size_t i = 1; i <= n; ++i) {
    const Scalar x1 = grid(i);
    const Scalar f1 = f(x1);
    if (f0 == Scalar(0)) {
      ++out.sign_changes;
      out.roots.push_back({x0, f0, Scalar(0), 0});
    } else if (f1 != Scalar(0) && (f0 < Scalar(0)) != (f1 < Scalar(0))) {
      ++out.sign_changes;
      out.roots.push_back(find_root(f, Bracket<Scalar>{x0, x1, f0, f1}, opt));
    }
    x0 = x1;
    f0 = f1;
  }
  if (f0 == Scalar(0)) {
    ++out.sign_changes;
    out.roots.push_back({x0, f0, Scalar(0), 0});
  }

  std::sort(out.roots.begin(), out.roots.end(),
            [](const auto& l, const auto& r) { return l.x < r.x; });
  const Scalar radius = Scalar(10 * opt.xtol);
  std::vector<RootResult<Scalar>> unique;
  for (const auto& root : out.roots) {
    if (unique.empty() || root.x - unique.back().x > radius) {
      unique.push_back(root);
    }
  }
  out.roots = std::move(unique);
  return out;
}

// ---------------------------------------------------------------------------
// 2x2 eigenvalues
// ---------------------------------------------------------------------------

template <typename Scalar>
struct EigenPair {
  std::complex<Scalar> first;   // larger modulus for real pairs
  std::complex<Scalar> second;
  Scalar discriminant;          // trace^2 - 4 det

  bool is_complex() const { return discriminant < Scalar(0); }
  Scalar max_modulus() const {
    return std::max(std::abs(first), std::abs(second));
  }
  Scalar min_modulus() const {
    return std::min(std::abs(first), std::abs(second));
  }
};

/// Roots of lambda^2 - trace*lambda + det = 0. For real pairs the larger
/// magnitude root is formed without cancellation and the other one from
/// Vieta's product.
template <typename Scalar>
EigenPair<Scalar> eig2(Scalar trace, Scalar det) {
  using std::abs;
  using std::sqrt;
  const Scalar disc = std::fma(trace, trace, Scalar(-4) * det);
  if (disc < Scalar(0)) {
    const Scalar re = trace / 2;
    const Scalar im = sqrt(-disc) / 2;
    return {{re, im}, {re, -im}, disc};
  }
  const Scalar s = sqrt(disc);
  const Scalar big = (trace >= Scalar(0) ? trace + s : trace - s) / 2;
  const Scalar small = big != Scalar(0) ? det / big : Scalar(0);
  return {{big, Scalar(0)}, {small, Scalar(0)}, disc};
}

template <typename Derived>
EigenPair<typename Derived::Scalar> eig2(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const Scalar tr = m(0, 0) + m(1, 1);
  const Scalar det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return eig2(tr, det);
}

/// Local type of a planar fixed point from its eigenvalue moduli.
enum class FixedPointClass { Stable, Repeller, Saddle, NonHyperbolic };

inline const char* to_string(FixedPointClass c) {
  switch (c) {
    case FixedPointClass::Stable: return "Stable";
    case FixedPointClass::Repeller: return "Repeller";
    case FixedPointClass::Saddle: return "Saddle";
    case FixedPointClass::NonHyperbolic: return "NonHyperbolic";
  }
  return "?";
}

template <typename Scalar>
FixedPointClass classify_moduli(const EigenPair<Scalar>& e, Scalar tol = Scalar(1e-9)) {
  const Scalar m1 = std::abs(e.first);
  const Scalar m2 = std::abs(e.second);
  if (std::abs(m1 - 1) <= tol || std::abs(m2 - 1) <= tol) {
    return FixedPointClass::NonHyperbolic;
  }
  const int outside = (m1 > 1) + (m2 > 1);
  if (outside == 0) return FixedPointClass::Stable;
  if (outside == 2) return FixedPointClass::Repeller;
  return FixedPointClass::Saddle;
}

// ---------------------------------------------------------------------------
// Cycle detection
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
auto sample_distance(const T& a, const T& b) {
  if constexpr (std::is_arithmetic_v<T>) {
    return std::abs(a - b);
  } else {
    return (a - b).norm();
  }
}

}  // namespace detail

/// Smallest period k <= k_max such that every pair (s[i], s[i+k]) inside the
/// trailing window of 2*k_max samples lies within tol of each other.
template <typename Sample, typename Scalar>
std::optional<int> detect_cycle(std::span<const Sample> samples, int k_max,
                                Scalar tol) {
  if (k_max < 1) throw DomainError("detect_cycle requires k_max >= 1");
  const std::size_t window = 2 * static_cast<std::size_t>(k_max);
  if (samples.size() < window) {
    throw DomainError("detect_cycle needs at least 2*k_max samples");
  }
  const std::size_t start = samples.size() - window;
  for (int k = 1; k <= k_max; ++k) {
    bool matched = true;
    for (std::size_t i = start; i + k < samples.size(); ++i) {
      if (!(detail::sample_distance(samples[i], samples[i + k]) < tol)) {
        matched = false;
        break;
      }
    }
    if (matched) return k;
  }
  return std::nullopt;
}

template <typename Sample, typename Scalar>
std::optional<int> detect_cycle(const std::vector<Sample>& samples, int k_max,
                                Scalar tol) {
  return detect_cycle(std::span<const Sample>(samples), k_max, tol);
}

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

/// Central finite-difference derivative of order 1, 2 or 3. All three
/// stencils have O(h^4) truncation error:
///   order 1: 5-point, h = max(1e-5, 1e-5 |x|)
///   order 2: 5-point, h = 1e-3 max(1, |x|)
///   order 3: 7-point, h = 1.5e-3 max(1, |x|)
template <typename Scalar, typename F>
Scalar finite_diff(F&& f, Scalar x, int order) {
  using std::abs;
  using std::max;
  const Scalar ax = abs(x);
  switch (order) {
    case 1: {
      const Scalar h = max(Scalar(1e-5), Scalar(1e-5) * ax);
      return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) /
             (12 * h);
    }
    case 2: {
      const Scalar h = Scalar(1e-3) * max(Scalar(1), ax);
      return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) -
              f(x - 2 * h)) /
             (12 * h * h);
    }
    case 3: {
      const Scalar h = Scalar(1.5e-3) * max(Scalar(1), ax);
      return (-f(x + 3 * h) + 8 * f(x + 2 * h) - 13 * f(x + h) +
              13 * f(x - h) - 8 * f(x - 2 * h) + f(x - 3 * h)) /
             (8 * h * h * h);
    }
    default:
      throw DomainError("finite_diff supports orders 1, 2 and 3");
  }
}

}  // namespace allee
