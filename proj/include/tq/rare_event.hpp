#ifndef TQ_RARE_EVENT_HPP
#define TQ_RARE_EVENT_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "tq/queue_sim.hpp"
#include "tq/rate_pointwise.hpp"

namespace tq {

// Monte Carlo probability estimate with confidence intervals and the tilt
// parameters that produced it.
struct McEstimate {
  double p_hat = 0.0;
  std::size_t replications = 0;
  double variance = 0.0;  // variance of the estimator (per-mean)
  double ci_lo = 0.0, ci_hi = 0.0;          // normal (Wilson at low counts)
  double log_ci_lo = 0.0, log_ci_hi = 0.0;  // log-scale interval
  double theta1 = 0.0, theta2 = 0.0, theta3 = 0.0;

  double std_error() const { return std::sqrt(variance); }
};

struct TailQuery {
  std::size_t n = 1;
  double t = 1.0;
  double threshold = 0.0;
  bool exceed = true;  // true: P(W > w); false: P(T_(floor(nt)) <= a)
};

struct LogProb {
  double p = 0.0;
  double log_p = 0.0;
};

namespace detail {

inline double log_sum_exp(const std::vector<double>& terms) {
  double mx = -kInf;
  for (double v : terms) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return -kInf;
  double s = 0.0;
  for (double v : terms) s += std::exp(v - mx);
  return mx + std::log(s);
}

struct KahanSum {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

}  // namespace detail

// Exact tail of the ordered-statistics process:
// P(T_(floor(nt)) <= a) = P(Binomial(n, a) >= floor(nt)),
// summed in log space. floor(nt) = 0 returns probability 1.
inline LogProb exact_os_tail(std::size_t n, double t, double a) {
  if (n == 0) throw std::invalid_argument("n must be >= 1");
  if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("a must be in [0,1]");
  const std::size_t k = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * t));
  if (k == 0) return {1.0, 0.0};
  if (a == 0.0) return {0.0, -kInf};
  if (a == 1.0) return {1.0, 0.0};
  const double la = std::log(a), l1a = std::log1p(-a);
  const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
  auto log_pmf = [&](std::size_t i) {
    const double di = static_cast<double>(i);
    return lgn - std::lgamma(di + 1.0) -
           std::lgamma(static_cast<double>(n - i) + 1.0) + di * la +
           (static_cast<double>(n) - di) * l1a;
  };
  // Sum whichever tail carries less mass, for full relative precision.
  std::vector<double> terms;
  if (static_cast<double>(k) >= a * static_cast<double>(n + 1)) {
    terms.reserve(n - k + 1);
    for (std::size_t i = k; i <= n; ++i) terms.push_back(log_pmf(i));
    const double lp = detail::log_sum_exp(terms);
    return {std::exp(lp), lp};
  }
  terms.reserve(k);
  for (std::size_t i = 0; i < k; ++i) terms.push_back(log_pmf(i));
  const double lq = detail::log_sum_exp(terms);
  const double p = -std::expm1(lq);
  return {p, std::log(p)};
}

// Tilt parameters for the importance sampler: theta1 twists the epoch
// exponentials of the first floor(nt) block, theta3 the complementary
// block, theta2 the services.
struct TiltSpec {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double theta3 = 0.0;
};

// Chernoff-motivated defaults: push T_(floor(nt)) toward epoch_target
// and the mean service toward service_target.
inline TiltSpec suggest_tilts(double t, double epoch_target,
                              double service_target,
                              const ServiceModel& model) {
  TiltSpec s;
  const double x = std::clamp(epoch_target, 1e-9, 1.0 - 1e-9);
  s.theta1 = 1.0 - t / x;
  s.theta3 = (t - x) / (1.0 - x);
  double th2 = model.cramer_rate_derivative(service_target);
  const double hi = model.domain_hi();
  if (std::isfinite(hi)) th2 = std::min(th2, hi - 1e-9 * (1.0 + std::abs(hi)));
  const double lo = model.domain_lo();
  if (std::isfinite(lo)) th2 = std::max(th2, lo + 1e-9 * (1.0 + std::abs(lo)));
  s.theta2 = th2;
  return s;
}

namespace detail {

// One tilted replication through the exponential-ratio epoch sampler.
// Returns the workload at t and the log likelihood ratio dP/dQ of the
// draw. Zero tilts give the untilted sampler with log-ratio exactly 0.
inline double tilted_replication(std::size_t n, const ArrivalModel& arrival,
                                 const ServiceModel& model, double t,
                                 const TiltSpec& tilt, Rng& rng,
                                 double& log_ratio) {
  const std::size_t k = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * t));
  std::vector<double> xi(n + 1);
  double sum1 = 0.0, sum3 = 0.0;
  for (std::size_t i = 0; i < n + 1; ++i) {
    const bool first_block = i < k;
    const double theta = first_block ? tilt.theta1 : tilt.theta3;
    xi[i] = rng.exponential(1.0 - theta);
    (first_block ? sum1 : sum3) += xi[i];
  }
  auto epochs = order_stats_from_exponentials(xi);
  if (arrival.kind == ArrivalKind::general)
    for (auto& e : epochs) e = arrival.quantile(e);

  const ServiceModel tilted = model.tilt(tilt.theta2);
  auto services = sample_service(n, tilted, rng);

  log_ratio = 0.0;
  if (tilt.theta1 != 0.0)
    log_ratio += -tilt.theta1 * sum1 -
                 static_cast<double>(k) * std::log(1.0 - tilt.theta1);
  if (tilt.theta3 != 0.0)
    log_ratio += -tilt.theta3 * sum3 -
                 static_cast<double>(n + 1 - k) * std::log(1.0 - tilt.theta3);
  if (tilt.theta2 != 0.0) {
    double sv = 0.0;
    for (double v : services) sv += v;
    log_ratio += -tilt.theta2 * sv +
                 static_cast<double>(n) * model.cgf(tilt.theta2);
  }

  QueueRealization q(n, std::move(epochs), std::move(services));
  auto w = lindley_workload(q);
  return workload_at(q, w, t);
}

inline McEstimate finalize_estimate(const KahanSum& sy, const KahanSum& sy2,
                                    std::size_t reps, std::size_t hits,
                                    bool weighted) {
  McEstimate e;
  e.replications = reps;
  const double r = static_cast<double>(reps);
  e.p_hat = sy.sum / r;
  const double mean2 = sy2.sum / r;
  const double sample_var =
      reps > 1 ? std::max(0.0, (mean2 - e.p_hat * e.p_hat) * r / (r - 1.0))
               : 0.0;
  e.variance = sample_var / r;
  const double se = std::sqrt(e.variance);
  if (!weighted && hits < 30) {
    // Wilson interval at low counts
    const double z = 1.959963984540054;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / r;
    const double center = (e.p_hat + z2 / (2.0 * r)) / denom;
    const double half =
        z *
        std::sqrt(e.p_hat * (1.0 - e.p_hat) / r + z2 / (4.0 * r * r)) / denom;
    e.ci_lo = std::max(0.0, center - half);
    e.ci_hi = std::min(1.0, center + half);
  } else {
    e.ci_lo = e.p_hat - 1.959963984540054 * se;
    e.ci_hi = e.p_hat + 1.959963984540054 * se;
  }
  if (e.p_hat > 0.0) {
    const double rel = 1.959963984540054 * se / e.p_hat;
    e.log_ci_lo = std::exp(std::log(e.p_hat) - rel);
    e.log_ci_hi = std::exp(std::log(e.p_hat) + rel);
  }
  return e;
}

}  // namespace detail

// Importance-sampling estimate of P(W^n(t) > w) with exponentially tilted
// epoch spacings and services. Zero tilts reproduce the naive expo-ratio
// estimator draw for draw.
inline McEstimate is_workload_tail(std::size_t n, const ArrivalModel& arrival,
                                   const ServiceModel& model, double t,
                                   double w, const TiltSpec& tilt,
                                   std::size_t reps, RngSpec rng_spec) {
  if (reps < 100) throw std::invalid_argument("need at least 100 replications");
  if (!(tilt.theta1 < 1.0 && tilt.theta3 < 1.0))
    throw std::invalid_argument("epoch tilts must be < 1");
  if (tilt.theta2 != 0.0 && !model.in_domain(tilt.theta2))
    throw std::invalid_argument("service tilt outside CGF domain");
  // Replications partition into fixed chunks, one stream each, reduced in
  // ascending stream order.
  const std::size_t chunk = 4096;
  detail::KahanSum sy, sy2;
  std::size_t hits = 0;
  std::size_t done = 0;
  for (std::uint64_t stream = 0; done < reps; ++stream) {
    Rng rng(rng_spec.with_stream(rng_spec.stream * 1000003ULL + stream));
    const std::size_t batch = std::min(chunk, reps - done);
    for (std::size_t i = 0; i < batch; ++i) {
      double log_ratio = 0.0;
      const double wl =
          detail::tilted_replication(n, arrival, model, t, tilt, rng, log_ratio);
      if (wl > w) {
        ++hits;
        const double weight = std::exp(log_ratio);
        sy.add(weight);
        sy2.add(weight * weight);
      } else {
        sy.add(0.0);
        sy2.add(0.0);
      }
    }
    done += batch;
  }
  const bool weighted =
      tilt.theta1 != 0.0 || tilt.theta2 != 0.0 || tilt.theta3 != 0.0;
  McEstimate e = detail::finalize_estimate(sy, sy2, reps, hits, weighted);
  e.theta1 = tilt.theta1;
  e.theta2 = tilt.theta2;
  e.theta3 = tilt.theta3;
  return e;
}

// Naive Monte Carlo estimate of P(W^n(t) > w). With the expo-ratio epoch
// method this is is_workload_tail at zero tilts, bit for bit.
inline McEstimate mc_workload_tail(std::size_t n, const ArrivalModel& arrival,
                                   const ServiceModel& model, double t,
                                   double w, std::size_t reps, RngSpec rng_spec,
                                   OrderStatMethod method =
                                       OrderStatMethod::expo_ratio) {
  if (method == OrderStatMethod::expo_ratio)
    return is_workload_tail(n, arrival, model, t, w, TiltSpec{}, reps,
                            rng_spec);
  if (reps < 100) throw std::invalid_argument("need at least 100 replications");
  const std::size_t chunk = 4096;
  detail::KahanSum sy, sy2;
  std::size_t hits = 0, done = 0;
  for (std::uint64_t stream = 0; done < reps; ++stream) {
    Rng rng(rng_spec.with_stream(rng_spec.stream * 1000003ULL + stream));
    const std::size_t batch = std::min(chunk, reps - done);
    for (std::size_t i = 0; i < batch; ++i) {
      auto q = simulate_realization(n, arrival, model, method, rng);
      auto wl = lindley_workload(q);
      const bool hit = workload_at(q, wl, t) > w;
      hits += hit;
      sy.add(hit ? 1.0 : 0.0);
      sy2.add(hit ? 1.0 : 0.0);
    }
    done += batch;
  }
  return detail::finalize_estimate(sy, sy2, reps, hits, false);
}

// Empirical LDP decay-rate report: per n, the gap between -(1/n) log p_n
// and a reference rate value.
struct SlopeRow {
  std::size_t n = 0;
  double p = 0.0;
  double neg_log_p_over_n = 0.0;
  double gap = 0.0;
};

struct SlopeReport {
  std::vector<SlopeRow> rows;
  std::vector<std::size_t> excluded;  // n values with p = 0
  bool gaps_decreasing = false;
  double rate_ref = 0.0;
};

inline SlopeReport ldp_slope(const std::vector<std::size_t>& ns,
                             const std::function<double(std::size_t)>& prob,
                             double rate_ref) {
  if (ns.size() < 3) throw std::invalid_argument("need at least 3 values of n");
  SlopeReport rep;
  rep.rate_ref = rate_ref;
  for (std::size_t n : ns) {
    const double p = prob(n);
    if (p <= 0.0) {
      rep.excluded.push_back(n);
      continue;
    }
    SlopeRow row;
    row.n = n;
    row.p = p;
    row.neg_log_p_over_n = -std::log(p) / static_cast<double>(n);
    row.gap = std::abs(row.neg_log_p_over_n - rate_ref);
    rep.rows.push_back(row);
  }
  rep.gaps_decreasing = rep.rows.size() >= 2;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    if (!(rep.rows[i].gap < rep.rows[i - 1].gap)) rep.gaps_decreasing = false;
  return rep;
}

}  // namespace tq

#endif  // TQ_RARE_EVENT_HPP
