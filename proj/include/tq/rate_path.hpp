#ifndef TQ_RATE_PATH_HPP
#define TQ_RATE_PATH_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "tq/rate_pointwise.hpp"
#include "tq/rng.hpp"
#include "tq/service_model.hpp"

namespace tq {

// A path on the uniform grid s_k = k t / m, k = 0..m, with value 0 at 0.
// Derivatives are the backward-difference slopes d_k = (v_k - v_{k-1}) m/t.
struct GridPath {
  double horizon = 1.0;
  std::vector<double> values;  // v_0..v_m

  GridPath() = default;
  GridPath(double t, std::vector<double> v)
      : horizon(t), values(std::move(v)) {
    if (values.size() < 2) throw std::invalid_argument("grid path needs m >= 1");
    if (values.front() != 0.0)
      throw std::invalid_argument("grid path must start at 0");
    if (!(horizon > 0.0 && horizon <= 1.0))
      throw std::invalid_argument("horizon must be in (0,1]");
  }

  std::size_t segments() const { return values.size() - 1; }
  double mesh() const { return horizon / static_cast<double>(segments()); }
  double terminal() const { return values.back(); }

  std::vector<double> slopes() const {
    const double h = mesh();
    std::vector<double> d(segments());
    for (std::size_t k = 0; k < d.size(); ++k)
      d[k] = (values[k + 1] - values[k]) / h;
    return d;
  }

  static GridPath from_slopes(double t, const std::vector<double>& d) {
    std::vector<double> v(d.size() + 1, 0.0);
    const double h = t / static_cast<double>(d.size());
    for (std::size_t k = 0; k < d.size(); ++k) v[k + 1] = v[k] + h * d[k];
    return GridPath(t, std::move(v));
  }

  template <typename F>
  static GridPath from_function(F&& f, double t, std::size_t m) {
    std::vector<double> v(m + 1);
    for (std::size_t k = 0; k <= m; ++k)
      v[k] = f(t * static_cast<double>(k) / static_cast<double>(m));
    v[0] = 0.0;
    return GridPath(t, std::move(v));
  }

  // Terminal value of the reflected path, psi(t) - min_k psi(s_k).
  double reflected_terminal() const {
    double mn = 0.0;
    for (double v : values) mn = std::min(mn, v);
    return values.back() - mn;
  }
};

struct PathOptimizerConfig {
  std::size_t m = 200;          // grid segments
  double tolerance = 1e-9;      // objective decrease threshold
  int max_iterations = 4000;
  int multistarts = 8;          // rate_workload only

  void validate() const {
    if (m < 10) throw std::invalid_argument("need m >= 10 grid segments");
  }
};

// Arrival path functional
// hat Lambda_t(phi) = -int_0^t log(phi'(s)) ds
//                     + (1-t) log((1-t)/(1-phi(t))),
// discretized as a left Riemann sum over segment slopes.
inline RateValue rate_os_path(const GridPath& phi) {
  const double t = phi.horizon;
  const double h = phi.mesh();
  if (phi.terminal() >= 1.0) return RateValue::infinite();
  double sum = 0.0;
  for (double d : phi.slopes()) {
    if (d <= 0.0) return RateValue::infinite();
    sum -= h * std::log(d);
  }
  sum += detail::xlogxy(1.0 - t, 1.0 - phi.terminal());
  if (sum < 0.0 && sum > -1e-9) sum = 0.0;  // float dust on feasible paths
  return RateValue::of(sum);
}

// Service path functional hat I_t(sigma) = int_0^t Lambda*(sigma'(s)) ds
// with the per-unit Cramer transform; singular parts are identically zero
// on grids.
inline RateValue rate_service_path(const GridPath& sigma,
                                   const ServiceModel& model) {
  const double h = sigma.mesh();
  double sum = 0.0;
  for (double d : sigma.slopes()) {
    if (d < 0.0) return RateValue::infinite();
    const double r = model.cramer_rate(d);
    if (!std::isfinite(r)) return RateValue::infinite();
    sum += h * r;
  }
  return RateValue::of(sum);
}

namespace detail {

// Offered-load decomposition on a common grid: arrival path phi with
// slopes a_k > 0, offered-load path psi with slopes c_k, service path
// sigma = phi + psi with slopes g_k = a_k + c_k >= 0.
//
// Discretized objective in the slope variables:
//   F(a, g) = sum_k h (-log a_k + Lambda*(g_k))
//           + (1-t) log((1-t)/(1 - h sum a_k)).
struct OfferedObjective {
  double t = 0.0;
  double h = 0.0;
  const ServiceModel* model = nullptr;

  double value(const std::vector<double>& a,
               const std::vector<double>& g) const {
    double s = 0.0, phi_t = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a[k] <= 0.0 || g[k] < 0.0) return kInf;
      const double lr = model->cramer_rate(g[k]);
      if (!std::isfinite(lr)) return kInf;
      s += h * (-std::log(a[k]) + lr);
      phi_t += h * a[k];
    }
    if (phi_t >= 1.0) return kInf;
    s += xlogxy(1.0 - t, 1.0 - phi_t);
    return s;
  }

  // Gradient in (a, g); requires a feasible point.
  void gradient(const std::vector<double>& a, const std::vector<double>& g,
                std::vector<double>& da, std::vector<double>& dg) const {
    double phi_t = 0.0;
    for (double ak : a) phi_t += h * ak;
    const double term = (1.0 - t) / (1.0 - phi_t);
    for (std::size_t k = 0; k < a.size(); ++k) {
      da[k] = h * (-1.0 / a[k] + term);
      dg[k] = h * model->cramer_rate_derivative(g[k]);
    }
  }
};

// Barzilai-Borwein gradient descent with Armijo backtracking on an
// unconstrained smooth(ish) objective. Returns the achieved value.
inline double bb_minimize(
    const std::function<double(const std::vector<double>&)>& f,
    const std::function<void(const std::vector<double>&, std::vector<double>&)>&
        grad,
    std::vector<double>& x, int max_iter, double tol) {
  const std::size_t n = x.size();
  std::vector<double> g(n), g_old(n), x_old(n), cand(n);
  double fx = f(x);
  grad(x, g);
  double step = 1e-3;
  for (int it = 0; it < max_iter; ++it) {
    double gnorm2 = 0.0;
    for (double v : g) gnorm2 += v * v;
    if (gnorm2 < 1e-24) break;
    // Armijo backtracking along -g
    double s = step;
    double f_new = kInf;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t i = 0; i < n; ++i) cand[i] = x[i] - s * g[i];
      f_new = f(cand);
      if (f_new <= fx - 1e-4 * s * gnorm2) break;
      s *= 0.5;
    }
    if (!(f_new < fx)) break;
    x_old = x;
    g_old = g;
    x = cand;
    const double decrease = fx - f_new;
    fx = f_new;
    grad(x, g);
    // BB1 step for the next iterate
    double sy = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double si = x[i] - x_old[i];
      const double yi = g[i] - g_old[i];
      sy += si * yi;
      ss += si * si;
    }
    step = (sy > 1e-18) ? std::clamp(ss / sy, 1e-8, 1e3) : std::max(s, 1e-8);
    if (decrease < tol && it > 10) break;
  }
  return fx;
}

}  // namespace detail

// Offered-load path rate
//   hat J_t(psi) = inf over nondecreasing phi with phi(t) < 1 of
//                  hat Lambda_t(phi) + hat I_t(phi + psi),
// subject to phi' > 0 and phi' + psi' >= 0. Convex minimization over the
// phi slope variables; returns the value and the optimal phi in
// RateValue::optimizer (grid values, length m+1).
inline RateValue rate_offered_path(const GridPath& psi,
                                   const ServiceModel& model,
                                   const PathOptimizerConfig& cfg = {}) {
  cfg.validate();
  const double t = psi.horizon;
  const std::size_t m = psi.segments();
  const double h = psi.mesh();
  const std::vector<double> c = psi.slopes();

  // Slope floor: a_k > lo_k := max(0, -c_k). If even the floor pushes
  // phi(t) to 1 there is no feasible arrival path.
  std::vector<double> lo(m);
  double lo_sum = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    lo[k] = std::max(0.0, -c[k]);
    lo_sum += h * lo[k];
  }
  if (lo_sum >= 1.0) return RateValue::infinite();

  detail::OfferedObjective obj{t, h, &model};

  // Reparameterize a_k = lo_k + exp(u_k): positivity and the slope
  // constraint hold by construction.
  auto unpack = [&](const std::vector<double>& u, std::vector<double>& a,
                    std::vector<double>& g) {
    for (std::size_t k = 0; k < m; ++k) {
      a[k] = lo[k] + std::exp(std::clamp(u[k], -40.0, 40.0));
      g[k] = a[k] + c[k];
    }
  };
  std::vector<double> a(m), g(m), da(m), dg(m);
  auto f = [&](const std::vector<double>& u) {
    unpack(u, a, g);
    return obj.value(a, g);
  };
  auto grad = [&](const std::vector<double>& u, std::vector<double>& out) {
    unpack(u, a, g);
    obj.gradient(a, g, da, dg);
    for (std::size_t k = 0; k < m; ++k) {
      const double e = std::exp(std::clamp(u[k], -40.0, 40.0));
      out[k] = (da[k] + dg[k]) * e;
    }
  };

  // Start near the identity arrival path, scaled into feasibility.
  double start_scale = 1.0;
  double trial_sum = 0.0;
  for (std::size_t k = 0; k < m; ++k) trial_sum += h * (lo[k] + 1.0);
  if (trial_sum >= 1.0) start_scale = 0.5 * (1.0 - lo_sum) / (trial_sum - lo_sum);
  std::vector<double> u(m, std::log(std::max(start_scale, 1e-8)));

  if (!std::isfinite(f(u))) {
    // shrink toward the floor until feasible
    bool ok = false;
    for (int i = 0; i < 60 && !ok; ++i) {
      for (auto& v : u) v -= 1.0;
      ok = std::isfinite(f(u));
    }
    if (!ok) return RateValue::infinite();
  }

  const double fx =
      detail::bb_minimize(f, grad, u, cfg.max_iterations, cfg.tolerance);
  if (!std::isfinite(fx)) return RateValue::infinite();
  unpack(u, a, g);
  RateValue rv;
  rv.value = (fx < 0.0 && fx > -1e-9) ? 0.0 : fx;
  GridPath phi = GridPath::from_slopes(t, a);
  rv.optimizer = phi.values;
  return rv;
}

// Result of the workload rate optimization: the achieving offered-load
// path is certified feasible, so the value is always a valid upper bound.
struct WorkloadRateResult {
  RateValue rate;            // residual = |Gamma(psi)(t) - y|
  GridPath psi;
  bool upper_bound_only = false;  // constraint not met to 1e-6
};

// Workload rate tilde J_t(y) = inf { hat J_t(psi) : Gamma(psi)(t) = y },
// by joint minimization over (phi, sigma) slopes with an escalating
// quadratic penalty on the reflection constraint and deterministic
// multistart. Ties resolve to the lowest start index.
inline WorkloadRateResult rate_workload(double t, double y,
                                        const ServiceModel& model,
                                        const PathOptimizerConfig& cfg = {}) {
  cfg.validate();
  if (y < 0.0) throw std::invalid_argument("workload level must be >= 0");
  const std::size_t m = cfg.m;
  const double h = t / static_cast<double>(m);
  detail::OfferedObjective obj{t, h, &model};
  const double mean = model.mean();

  // Variables: u (log phi slopes), v (log sigma slopes); psi = sigma - phi.
  std::vector<double> a(m), g(m), c(m), da(m), dg(m), psi_vals(m + 1);
  double rho = 0.0;

  auto unpack = [&](const std::vector<double>& x) {
    for (std::size_t k = 0; k < m; ++k) {
      a[k] = std::exp(std::clamp(x[k], -40.0, 40.0));
      g[k] = std::exp(std::clamp(x[m + k], -40.0, 40.0));
      c[k] = g[k] - a[k];
    }
    psi_vals[0] = 0.0;
    for (std::size_t k = 0; k < m; ++k)
      psi_vals[k + 1] = psi_vals[k] + h * c[k];
  };
  auto gamma_terminal = [&](std::size_t* argmin = nullptr) {
    double mn = 0.0;
    std::size_t ki = 0;
    for (std::size_t k = 0; k <= m; ++k)
      if (psi_vals[k] < mn) {
        mn = psi_vals[k];
        ki = k;
      }
    if (argmin) *argmin = ki;
    return psi_vals[m] - mn;
  };
  auto f = [&](const std::vector<double>& x) {
    unpack(x);
    const double base = obj.value(a, g);
    if (!std::isfinite(base)) return base;
    const double viol = gamma_terminal() - y;
    return base + rho * viol * viol;
  };
  auto grad = [&](const std::vector<double>& x, std::vector<double>& out) {
    unpack(x);
    obj.gradient(a, g, da, dg);
    std::size_t kmin = 0;
    const double viol = gamma_terminal(&kmin) - y;
    for (std::size_t k = 0; k < m; ++k) {
      // dGamma/dc_k = h for k past the running minimum, 0 before it
      const double dgam = (k >= kmin) ? h : 0.0;
      const double pen = 2.0 * rho * viol * dgam;
      out[k] = (da[k] - pen) * a[k];
      out[m + k] = (dg[k] + pen) * g[k];
    }
  };

  // Deterministic multistart seeds in slope space.
  auto make_start = [&](int idx) {
    std::vector<double> x(2 * m);
    double base_gamma = t * std::max(0.0, mean - 1.0);  // fluid reflection
    double frac = 0.5;
    switch (idx) {
      case 0: frac = 1.0; break;   // uniform lift
      case 1: frac = 0.25; break;  // late ramp variants
      case 2: frac = 0.5; break;
      case 3: frac = 0.75; break;
      default: frac = 1.0; break;
    }
    const double lift = (y - base_gamma) / (frac * t);
    const std::size_t k0 = static_cast<std::size_t>(
        static_cast<double>(m) * (1.0 - frac));
    Rng rng({0xc0ffee, static_cast<std::uint64_t>(idx)});
    for (std::size_t k = 0; k < m; ++k) {
      double ak = 1.0;
      double gk = mean + ((k >= k0) ? lift : 0.0);
      gk = std::max(gk, 0.05 * mean);
      if (idx >= 4) {
        ak *= std::exp(0.3 * rng.normal());
        gk *= std::exp(0.3 * rng.normal());
      }
      x[k] = std::log(ak);
      x[m + k] = std::log(gk);
    }
    return x;
  };

  WorkloadRateResult best;
  best.rate.value = kInf;
  bool have_best = false;
  for (int s = 0; s < std::max(1, cfg.multistarts); ++s) {
    std::vector<double> x = make_start(s);
    double resid = kInf;
    for (rho = 100.0; rho <= 1e12; rho *= 10.0) {
      detail::bb_minimize(f, grad, x, cfg.max_iterations, cfg.tolerance);
      unpack(x);
      resid = std::abs(gamma_terminal() - y);
      if (resid < 1e-6) break;
    }
    unpack(x);
    GridPath psi = GridPath::from_slopes(t, c);
    // Polish the arrival path against the recovered psi; the inner
    // problem is convex, so this can only improve the bound.
    RateValue inner = rate_offered_path(psi, model, cfg);
    const double base = std::isfinite(inner.value)
                            ? inner.value
                            : obj.value(a, g);
    if (!have_best || base < best.rate.value) {
      have_best = true;
      best.rate.value = base;
      best.rate.residual = resid;
      best.psi = psi;
      best.upper_bound_only = !(resid < 1e-6);
    }
  }
  if (best.rate.value < 0.0 && best.rate.value > -1e-9) best.rate.value = 0.0;
  return best;
}

}  // namespace tq

#endif  // TQ_RATE_PATH_HPP
