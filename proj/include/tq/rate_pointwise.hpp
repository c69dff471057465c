#ifndef TQ_RATE_POINTWISE_HPP
#define TQ_RATE_POINTWISE_HPP

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tq/arrival_model.hpp"
#include "tq/golden.hpp"
#include "tq/service_model.hpp"

namespace tq {

// Nonnegative extended-real rate plus optimizer diagnostics.
struct RateValue {
  double value = 0.0;
  std::vector<double> optimizer;  // argmin/argmax when one was computed
  int iterations = 0;
  double residual = 0.0;

  static RateValue infinite() { return {kInf, {}, 0, 0.0}; }
  static RateValue of(double v) { return {v, {}, 0, 0.0}; }
};

// Ordered time points 0 <= t_1 < ... < t_d <= t defining increments.
struct Partition {
  double t = 0.0;
  std::vector<double> points;

  Partition(double horizon, std::vector<double> pts)
      : t(horizon), points(std::move(pts)) {
    if (points.empty()) throw std::invalid_argument("partition needs d >= 1");
    double prev = -1.0;
    for (double p : points) {
      if (!(p > prev)) throw std::invalid_argument("partition not increasing");
      if (p < 0.0 || p > t) throw std::invalid_argument("partition outside [0,t]");
      prev = p;
    }
  }
};

namespace detail {
// x log(x / y) with the 0 log 0 := 0 convention; +inf when y <= 0 < x.
inline double xlogxy(double x, double y) {
  if (x == 0.0) return 0.0;
  if (y <= 0.0 || x < 0.0) return kInf;
  return x * std::log(x / y);
}
}  // namespace detail

// Ordered-statistics rate I_t(x) = t log(t/x) + (1-t) log((1-t)/(1-x)).
inline RateValue rate_os(double t, double x) {
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("t must be in (0,1)");
  if (x < 0.0 || x > 1.0) return RateValue::infinite();
  const double v = detail::xlogxy(t, x) + detail::xlogxy(1.0 - t, 1.0 - x);
  return RateValue::of(v);
}

// General-arrival rate tilde I_t(y) = I_t(F(y)) for strictly increasing,
// absolutely continuous F.
inline RateValue rate_os_general(double t, double y,
                                 const ArrivalModel& arrival) {
  if (!(arrival.strictly_increasing && arrival.absolutely_continuous))
    throw std::invalid_argument(
        "general rate needs strictly increasing, absolutely continuous F");
  if (y < 0.0) return RateValue::infinite();
  return rate_os(t, arrival.cdf(y));
}

// Cramer rate for the service partial sum at horizon t:
// Lambda*_t(x) = sup_theta {theta x - t phi(theta)}, computed by
// safeguarded concave maximization over the CGF domain.
inline RateValue legendre(const ServiceModel& model, double t, double x) {
  if (!(t > 0.0 && t <= 1.0))
    throw std::invalid_argument("t must be in (0,1]");
  if (x < 0.0) return RateValue::infinite();
  auto g = [&](double th) {
    const double phi = model.cgf(th);
    if (!std::isfinite(phi)) return -kInf;
    return th * x - t * phi;
  };
  auto r = maximize_concave(g, model.domain_lo(), model.domain_hi(), 0.0,
                            1e-10);
  if (r.unbounded) {
    RateValue rv = RateValue::infinite();
    rv.iterations = r.evaluations;
    return rv;
  }
  RateValue rv;
  rv.value = std::max(0.0, r.value);
  rv.optimizer = {r.x};
  rv.iterations = r.evaluations;
  return rv;
}

// Offered-load rate J_t(y) = inf over x1 in (max(y,0), 1) of
// I_t(x1) + Lambda*_t(x1 - y).
inline RateValue rate_offered(double t, double y, const ServiceModel& model) {
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("t must be in (0,1)");
  const double lo = std::max(y, 0.0);
  if (lo >= 1.0) return RateValue::infinite();
  auto objective = [&](double x1) {
    const double i = rate_os(t, x1).value;
    if (!std::isfinite(i)) return kInf;
    const double l = legendre(model, t, x1 - y).value;
    return i + l;
  };
  const double eps = 1e-12 * (1.0 + std::abs(lo));
  auto r = golden_min(objective, lo + eps, 1.0 - eps, 1e-10);
  if (!std::isfinite(r.value)) return RateValue::infinite();
  RateValue rv;
  rv.value = std::max(0.0, r.value);
  rv.optimizer = {r.x};
  return rv;
}

// Stationarity analysis of the exponential(mean 1) offered-load objective.
struct CubicReport {
  double root = 0.0;              // stationary point of the objective
  double objective_value = 0.0;   // J_t evaluated at the root
  double derived_cubic_residual = 0.0;
  double alternative_cubic_residual = 0.0;
  bool interior_root = true;      // false: infimum reported at a boundary
};

// Root of the first-order condition -t/x + (1-t)/(1-x) - t/(x-y) + 1 = 0
// on (max(y,0), 1) for exponential(mean 1) service. Also evaluates two
// cubic forms at the root: the one this condition expands to,
// x^3 - (2+t+y)x^2 + 2(t+y)x - ty, and the alternative form
// x^3 - yx^2 - 2tx + ty, whose residual is reported for comparison.
inline CubicReport cubic_stationarity_exp(double t, double y) {
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("t must be in (0,1)");
  const double lo = std::max(y, 0.0);
  if (lo >= 1.0) throw std::invalid_argument("empty feasible interval");
  auto foc = [&](double x) {
    return -t / x + (1.0 - t) / (1.0 - x) - t / (x - y) + 1.0;
  };
  auto objective = [&](double x) {
    return detail::xlogxy(t, x) + detail::xlogxy(1.0 - t, 1.0 - x) +
           detail::xlogxy(t, x - y) + (x - y - t);
  };
  // The objective diverges to +inf at both ends, so the FOC changes sign
  // from negative to positive across the interior minimum.
  const double a = lo + 1e-9, b = 1.0 - 1e-9;
  CubicReport rep;
  const double fa = foc(a);
  const double fb = foc(b);
  if (fa > 0.0 || fb < 0.0) {
    rep.root = fa > 0.0 ? a : b;
    rep.interior_root = false;
  } else {
    rep.root = bisect(foc, a, b, 1e-14);
  }
  const double x = rep.root;
  rep.objective_value = objective(x);
  rep.derived_cubic_residual =
      x * x * x - (2.0 + t + y) * x * x + 2.0 * (t + y) * x - t * y;
  rep.alternative_cubic_residual = x * x * x - y * x * x - 2.0 * t * x + t * y;
  return rep;
}

// Increment rate for a d-partition of [0,t]:
// hat Lambda_j(y) = sum_i (t_i - t_{i-1}) log((t_i - t_{i-1}) / y_i)
//                 + (1-t) log((1-t) / (1 - sum_l y_l)),  t_0 = 0.
inline RateValue rate_increments(const Partition& j,
                                 const std::vector<double>& y) {
  if (y.size() != j.points.size())
    throw std::invalid_argument("increment vector size mismatch");
  double total = 0.0;
  for (double v : y) {
    if (v <= 0.0) return RateValue::infinite();
    total += v;
  }
  if (total >= 1.0) return RateValue::infinite();
  double sum = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sum += detail::xlogxy(j.points[i] - prev, y[i]);
    prev = j.points[i];
  }
  sum += detail::xlogxy(1.0 - j.t, 1.0 - total);
  if (!std::isfinite(sum)) return RateValue::infinite();
  return RateValue::of(sum);
}

}  // namespace tq

#endif  // TQ_RATE_POINTWISE_HPP
