#ifndef TQ_BANDWIDTH_HPP
#define TQ_BANDWIDTH_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tq/queue_sim.hpp"
#include "tq/rate_path.hpp"

namespace tq {

struct BandwidthQuery {
  double w = 0.0;          // buffer level
  double p = 1.0;          // target exceedance probability
  std::size_t n = 100;     // population size
  std::vector<double> t_grid;
  ServiceModel model = ServiceModel::exponential(1.0);
  PathOptimizerConfig cfg;

  void validate() const {
    if (!(w >= 0.0)) throw std::invalid_argument("buffer level must be >= 0");
    if (!(p > 0.0 && p <= 1.0))
      throw std::invalid_argument("target probability must be in (0,1]");
    if (t_grid.empty()) throw std::invalid_argument("empty time grid");
    double prev = 0.0;
    for (double t : t_grid) {
      if (!(t > prev && t <= 1.0))
        throw std::invalid_argument("t grid must be increasing in (0,1]");
      prev = t;
    }
  }
};

// Fluid workload level bar W(t) for uniform arrivals and mu = 1/mean.
inline double fluid_workload_level(double t, const ServiceModel& model) {
  const double mu = 1.0 / model.mean();
  // F - M = s - mu s is monotone, so the reflection is available directly.
  return (1.0 / mu) * std::max(0.0, t * (1.0 - mu));
}

struct TailRateResult {
  RateValue rate;      // inf over y > w of the workload rate
  double y_at_min = 0.0;
  bool upper_bound_only = false;
};

// tilde J_t((w, inf)) = inf_{y > w} tilde J_t(y). By monotonicity above
// the fluid level this sits at y = max(w, bar W(t)) + eps; a short y-scan
// guards the claim.
inline TailRateResult rate_tail(double t, double w, const ServiceModel& model,
                                const PathOptimizerConfig& cfg = {}) {
  if (!(w >= 0.0)) throw std::invalid_argument("buffer level must be >= 0");
  TailRateResult out;
  const double fluid = fluid_workload_level(t, model);
  if (w < fluid) {
    out.rate = RateValue::of(0.0);
    out.y_at_min = fluid;
    return out;
  }
  const double eps = 1e-6;
  const double y0 = std::max(w, fluid) + eps;
  const double delta = 0.02 * (1.0 + w);
  out.rate.value = kInf;
  for (int i = 0; i < 5; ++i) {
    const double y = y0 + static_cast<double>(i) * delta;
    auto r = rate_workload(t, y, model, cfg);
    if (r.rate.value < out.rate.value) {
      out.rate = r.rate;
      out.y_at_min = y;
      out.upper_bound_only = r.upper_bound_only;
    }
  }
  return out;
}

struct CriticalTimeRow {
  double t = 0.0;
  double rate = 0.0;
  double bound = 0.0;  // exp(-n rate)
  double residual = 0.0;
  bool upper_bound_only = false;
};

struct CriticalTimeResult {
  double t_star = kInf;  // +inf sentinel when the bound never crosses p
  std::vector<CriticalTimeRow> table;
};

// t* = inf{ t in grid : exp(-n tilde J_t((w,inf))) <= p }, grid-resolved.
inline CriticalTimeResult critical_time(const BandwidthQuery& q) {
  q.validate();
  CriticalTimeResult out;
  for (double t : q.t_grid) {
    auto r = rate_tail(t, q.w, q.model, q.cfg);
    CriticalTimeRow row;
    row.t = t;
    row.rate = r.rate.value;
    row.bound = std::exp(-static_cast<double>(q.n) * r.rate.value);
    row.residual = r.rate.residual;
    row.upper_bound_only = r.upper_bound_only;
    out.table.push_back(row);
    if (!std::isfinite(out.t_star) && row.bound <= q.p) out.t_star = t;
  }
  return out;
}

}  // namespace tq

#endif  // TQ_BANDWIDTH_HPP
