#ifndef TQ_ORDER_STATS_HPP
#define TQ_ORDER_STATS_HPP

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "tq/rng.hpp"
#include "tq/service_model.hpp"

namespace tq {

enum class OrderStatMethod { sort, expo_ratio };

// Self-normalized exponential representation of uniform order statistics:
// given xi_1..xi_{n+1}, returns T_(j) = Z_j / Z_{n+1} with Z_j the prefix
// sums. The output is increasing by construction.
inline std::vector<double> order_stats_from_exponentials(
    const std::vector<double>& xi) {
  if (xi.size() < 2)
    throw std::invalid_argument("need at least two exponential draws");
  const std::size_t n = xi.size() - 1;
  std::vector<double> epochs(n);
  double z = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    z += xi[j];
    epochs[j] = z;
  }
  const double total = z + xi[n];
  for (auto& e : epochs) e /= total;
  return epochs;
}

// Ordered epochs of n i.i.d. Uniform(0,1) draws. Both methods realize the
// same joint law.
inline std::vector<double> sample_uniform_order_stats(std::size_t n,
                                                      OrderStatMethod method,
                                                      Rng& rng) {
  if (n == 0) throw std::invalid_argument("population size must be positive");
  if (method == OrderStatMethod::sort) {
    std::vector<double> epochs(n);
    for (auto& e : epochs) e = rng.uniform();
    std::sort(epochs.begin(), epochs.end());
    return epochs;
  }
  std::vector<double> xi(n + 1);
  for (auto& x : xi) x = rng.exponential(1.0);
  return order_stats_from_exponentials(xi);
}

inline std::vector<double> sample_service(std::size_t n,
                                          const ServiceModel& model,
                                          Rng& rng) {
  if (n == 0) throw std::invalid_argument("population size must be positive");
  std::vector<double> out(n);
  for (auto& v : out) v = model.sample(rng);
  return out;
}

}  // namespace tq

#endif  // TQ_ORDER_STATS_HPP
