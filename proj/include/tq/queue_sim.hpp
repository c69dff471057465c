#ifndef TQ_QUEUE_SIM_HPP
#define TQ_QUEUE_SIM_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "tq/arrival_model.hpp"
#include "tq/order_stats.hpp"
#include "tq/sample_path.hpp"

namespace tq {

// One realization of the n-job system: ordered epochs T_(1..n) and raw
// services nu_1..n. Population acceleration divides services by n.
struct QueueRealization {
  std::size_t n = 0;
  std::vector<double> epochs;    // T_(1) <= ... <= T_(n)
  std::vector<double> services;  // nu_1..nu_n, positive

  QueueRealization(std::size_t n_, std::vector<double> epochs_,
                   std::vector<double> services_)
      : n(n_), epochs(std::move(epochs_)), services(std::move(services_)) {
    if (epochs.size() != n || services.size() != n)
      throw std::invalid_argument("realization size mismatch");
    if (!std::is_sorted(epochs.begin(), epochs.end()))
      throw std::invalid_argument("epochs must be sorted");
  }

  double scaled_service(std::size_t i) const {  // nu_i / n, 1-based
    return services[i - 1] / static_cast<double>(n);
  }
};

inline QueueRealization simulate_realization(std::size_t n,
                                             const ArrivalModel& arrival,
                                             const ServiceModel& service,
                                             OrderStatMethod method, Rng& rng) {
  auto epochs = sample_uniform_order_stats(n, method, rng);
  if (arrival.kind == ArrivalKind::general)
    for (auto& e : epochs) e = arrival.quantile(e);
  auto services = sample_service(n, service, rng);
  return QueueRealization(n, std::move(epochs), std::move(services));
}

// Offered load X^n as a step path on {0, 1/n, ..., 1}:
// X^n(j/n) = n^{-1} sum_{i<=j} nu_i - T_(j), with T_(0) = 0, nu_0 = 0.
inline SamplePath offered_load_path(const QueueRealization& q) {
  const double n = static_cast<double>(q.n);
  std::vector<double> grid(q.n + 1), values(q.n + 1);
  double cum = 0.0;
  grid[0] = 0.0;
  values[0] = 0.0;
  for (std::size_t j = 1; j <= q.n; ++j) {
    cum += q.services[j - 1] / n;
    grid[j] = static_cast<double>(j) / n;
    values[j] = cum - q.epochs[j - 1];
  }
  return SamplePath(std::move(grid), std::move(values), PathKind::step);
}

// Lindley recursion for the accelerated workload ahead of each job:
// W_j = (W_{j-1} + nu^n_{j-1} - (T_(j) - T_(j-1)))_+, W_0 = 0.
// Returns W_0..W_n.
inline std::vector<double> lindley_workload(const QueueRealization& q) {
  std::vector<double> w(q.n + 1, 0.0);
  double prev_epoch = 0.0;
  double prev_service = 0.0;  // nu^n_0 = 0
  for (std::size_t j = 1; j <= q.n; ++j) {
    const double t = q.epochs[j - 1];
    if (t < prev_epoch) throw std::invalid_argument("epochs must be sorted");
    w[j] = std::max(0.0, w[j - 1] + prev_service - (t - prev_epoch));
    prev_epoch = t;
    prev_service = q.scaled_service(j);
  }
  return w;
}

// Unraveled max representation:
// W_j = (S_{j-1} - T_(j)) + max_{0<=i<=j-1} (-(S_i - T_(i+1))),
// with S_i the accelerated service partial sums. Pathwise equal to the
// recursion; kept as an independent route for verification.
inline std::vector<double> workload_max_representation(
    const QueueRealization& q) {
  const double n = static_cast<double>(q.n);
  std::vector<double> w(q.n + 1, 0.0);
  double s_prev = 0.0;         // S_{j-1}
  double running_max = 0.0;    // max_i -(S_i - T_(i+1))), i <= j-1
  for (std::size_t j = 1; j <= q.n; ++j) {
    // include i = j-1: -(S_{j-1} - T_(j))
    running_max = std::max(running_max, -(s_prev - q.epochs[j - 1]));
    w[j] = (s_prev - q.epochs[j - 1]) + running_max;
    s_prev += q.services[j - 1] / n;
  }
  return w;
}

// W^n(t) = W_{floor(nt)}.
inline double workload_at(const QueueRealization& q,
                          const std::vector<double>& w, double t) {
  const std::size_t j =
      std::min<std::size_t>(q.n, static_cast<std::size_t>(std::floor(
                                     static_cast<double>(q.n) * t)));
  return w[j];
}

// Step workload path on {0, 1/n, ..., 1}.
inline SamplePath workload_path(const QueueRealization& q) {
  auto w = lindley_workload(q);
  std::vector<double> grid(q.n + 1);
  for (std::size_t j = 0; j <= q.n; ++j)
    grid[j] = static_cast<double>(j) / static_cast<double>(q.n);
  return SamplePath(std::move(grid), std::move(w), PathKind::step);
}

// Right-hand side of the interpolation sup-norm inequality
// ||X^n - tilde X^n|| <= max_i nu_i/n + max_j (T_(j) - T_(j-1)).
inline double interpolation_gap_bound(const QueueRealization& q) {
  const double n = static_cast<double>(q.n);
  double max_service = 0.0, max_spacing = 0.0, prev = 0.0;
  for (std::size_t j = 1; j <= q.n; ++j) {
    max_service = std::max(max_service, q.services[j - 1] / n);
    max_spacing = std::max(max_spacing, q.epochs[j - 1] - prev);
    prev = q.epochs[j - 1];
  }
  return max_service + max_spacing;
}

// Fluid limit bar W = (1/mu) Gamma(F - M) with M(t) = mu t, evaluated on
// the given grid (default 1001 uniform points on [0,1]).
inline SamplePath fluid_workload(const ArrivalModel& arrival, double mu,
                                 std::vector<double> grid = {}) {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (grid.empty()) {
    grid.resize(1001);
    for (std::size_t i = 0; i < grid.size(); ++i)
      grid[i] = static_cast<double>(i) / 1000.0;
  }
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    values[i] = arrival.cdf(grid[i]) - mu * grid[i];
  SamplePath netput(std::move(grid), std::move(values), PathKind::linear);
  SamplePath refl = reflect(netput);
  for (auto& v : refl.values) v /= mu;
  return refl;
}

}  // namespace tq

#endif  // TQ_QUEUE_SIM_HPP
