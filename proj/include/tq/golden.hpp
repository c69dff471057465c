#ifndef TQ_GOLDEN_HPP
#define TQ_GOLDEN_HPP

#include <cmath>
#include <limits>
#include <utility>

namespace tq {

inline constexpr double kGoldenRatio = 0.6180339887498948482;

struct ScalarMin {
  double x = 0.0;
  double value = 0.0;
};

// Golden-section minimization of a unimodal f on [a, b].
// Plateaus resolve to the leftmost point of the final bracket.
template <typename F>
ScalarMin golden_min(F&& f, double a, double b, double tol = 1e-10,
                     int max_iter = 400) {
  if (b < a) std::swap(a, b);
  const double c = 1.0 - kGoldenRatio;
  double x1 = a + c * (b - a);
  double x2 = b - c * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = a + c * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = b - c * (b - a);
      f2 = f(x2);
    }
  }
  const double xm = f1 <= f2 ? x1 : x2;
  return {xm, f1 <= f2 ? f1 : f2};
}

template <typename F>
ScalarMin golden_max(F&& f, double a, double b, double tol = 1e-10,
                     int max_iter = 400) {
  auto r = golden_min([&](double x) { return -f(x); }, a, b, tol, max_iter);
  return {r.x, -r.value};
}

struct ConcaveMaxResult {
  double x = 0.0;
  double value = 0.0;
  bool unbounded = false;  // supremum escapes toward an infinite endpoint
  int evaluations = 0;
};

// Maximize a concave g over the open interval (lo, hi); either end may be
// infinite. A bracket is grown outward from x0 (which must lie inside).
// Toward a finite endpoint the step halves the remaining gap, so the
// boundary is approached but never evaluated. If g keeps increasing past
// |x| ~ 1e9 toward an infinite endpoint the supremum is declared unbounded.
template <typename F>
ConcaveMaxResult maximize_concave(F&& g, double lo, double hi, double x0 = 0.0,
                                  double tol = 1e-10) {
  const double inf = std::numeric_limits<double>::infinity();
  const double escape = 1e9;
  int evals = 0;
  auto gv = [&](double x) {
    ++evals;
    return g(x);
  };

  double fm = gv(x0);
  // dir = +1 grows toward hi, -1 toward lo. Returns the bracket edge.
  auto grow = [&](int dir, double& f_edge) {
    const double bound = dir > 0 ? hi : lo;
    double edge = x0;
    f_edge = fm;
    double step = 1.0;
    for (int i = 0; i < 200; ++i) {
      double cand;
      if (std::isfinite(bound)) {
        cand = bound - 0.5 * (bound - edge);
        if (std::abs(bound - cand) < 1e-15 * (1.0 + std::abs(bound))) break;
      } else {
        cand = edge + dir * step;
        step *= 2.0;
      }
      const double fc = gv(cand);
      if (fc <= f_edge) {
        edge = cand;
        f_edge = fc;
        break;  // started decreasing: bracket closed on this side
      }
      edge = cand;
      f_edge = fc;
      if (!std::isfinite(bound) && std::abs(edge) > escape) return edge;
    }
    return edge;
  };

  double f_hi, f_lo;
  const double b = grow(+1, f_hi);
  if (!std::isfinite(hi) && b > escape && f_hi > fm)
    return {b, f_hi, true, evals};
  const double a = grow(-1, f_lo);
  if (!std::isfinite(lo) && a < -escape && f_lo > fm)
    return {a, f_lo, true, evals};

  auto r = golden_max(gv, a, b, tol);
  // Guard against a bracket edge beating the interior refinement.
  if (f_hi > r.value) r = {b, f_hi};
  if (f_lo > r.value) r = {a, f_lo};
  return {r.x, r.value, false, evals};
}

// Bisection for a root of f on [a, b]; f(a) and f(b) must differ in sign.
template <typename F>
double bisect(F&& f, double a, double b, double tol = 1e-13,
              int max_iter = 200) {
  double fa = f(a);
  for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fa <= 0.0) == (fm <= 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace tq

#endif  // TQ_GOLDEN_HPP
