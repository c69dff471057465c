#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "enumeration_oracle.hpp"
#include "tq/tq.hpp"

using namespace tq;

TEST_CASE("binomial-tail oracle hand values") {
  REQUIRE(exact_os_tail(10, 0.5, 0.3).p ==
          Catch::Approx(0.150268).margin(5e-7));
  REQUIRE(exact_os_tail(10, 0.5, 1.0).p == 1.0);
  REQUIRE(exact_os_tail(5, 0.1, 0.3).p == 1.0);  // floor(nt) = 0
  REQUIRE(exact_os_tail(10, 0.5, 0.0).p == 0.0);
}

TEST_CASE("binomial-tail oracle matches two independent summation orders") {
  for (std::size_t n : {10, 50, 200})
    for (double t : {0.25, 0.5, 0.75})
      for (double a : {0.1, 0.3, 0.6, 0.9}) {
        const std::size_t k = static_cast<std::size_t>(
            std::floor(static_cast<double>(n) * t));
        // plain-double upper-tail and complementary lower-tail sums
        double upper = 0.0, lower = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
          const double lp = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) -
                            std::lgamma(n - i + 1.0) +
                            i * std::log(a) + (n - i) * std::log1p(-a);
          (i >= k ? upper : lower) += std::exp(lp);
        }
        const double p = exact_os_tail(n, t, a).p;
        REQUIRE(p == Catch::Approx(upper).margin(1e-12));
        REQUIRE(p == Catch::Approx(1.0 - lower).margin(1e-12));
      }
}

TEST_CASE("binomial-tail oracle converges at the LDP rate") {
  const double rate = rate_os(0.5, 0.3).value;
  const double p = exact_os_tail(2000, 0.5, 0.3).p;
  const double slope = -std::log(p) / 2000.0;
  REQUIRE(std::abs(slope - rate) / rate < 0.03);
}

TEST_CASE("sort-sampler Monte Carlo matches the exact oracle") {
  const std::size_t n = 50, reps = 10000;
  const double t = 0.5, a = 0.42;
  Rng rng({31, 0});
  std::size_t hits = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    auto e = sample_uniform_order_stats(n, OrderStatMethod::sort, rng);
    hits += e[24] <= a;
  }
  const double p_hat = static_cast<double>(hits) / reps;
  const double p = exact_os_tail(n, t, a).p;
  const double se = std::sqrt(p * (1.0 - p) / reps);
  REQUIRE(std::abs(p_hat - p) < 3.0 * se);
}

TEST_CASE("negative threshold makes exceedance certain") {
  auto e = mc_workload_tail(10, ArrivalModel::uniform01(),
                            ServiceModel::exponential(1.0), 0.5, -1.0, 200,
                            {32, 0});
  REQUIRE(e.p_hat == 1.0);
}

TEST_CASE("impossible exceedance has zero estimate") {
  // total work is d = 1 per job, scaled by 1/n, so the workload never
  // exceeds d
  auto e = mc_workload_tail(10, ArrivalModel::uniform01(),
                            ServiceModel::deterministic(1.0), 0.5, 1.5, 200,
                            {33, 0});
  REQUIRE(e.p_hat == 0.0);
  REQUIRE(e.ci_lo >= 0.0);
  REQUIRE(e.ci_hi >= e.ci_lo);
}

TEST_CASE("too few replications are rejected") {
  REQUIRE_THROWS_AS(
      mc_workload_tail(10, ArrivalModel::uniform01(),
                       ServiceModel::exponential(1.0), 0.5, 0.1, 50, {34, 0}),
      std::invalid_argument);
}

TEST_CASE("zero tilt reproduces the naive estimator bit for bit") {
  const RngSpec spec{35, 2};
  auto naive = mc_workload_tail(20, ArrivalModel::uniform01(),
                                ServiceModel::exponential(1.0), 0.5, 0.3,
                                5000, spec, OrderStatMethod::expo_ratio);
  auto is = is_workload_tail(20, ArrivalModel::uniform01(),
                             ServiceModel::exponential(1.0), 0.5, 0.3,
                             TiltSpec{}, 5000, spec);
  REQUIRE(naive.p_hat == is.p_hat);
  REQUIRE(naive.variance == is.variance);
}

TEST_CASE("tilts outside the valid region are rejected") {
  auto m = ServiceModel::exponential(1.0);
  REQUIRE_THROWS_AS(is_workload_tail(10, ArrivalModel::uniform01(), m, 0.5,
                                     0.1, TiltSpec{1.5, 0.0, 0.0}, 200,
                                     {36, 0}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(is_workload_tail(10, ArrivalModel::uniform01(), m, 0.5,
                                     0.1, TiltSpec{0.0, 2.0, 0.0}, 200,
                                     {36, 0}),
                    std::invalid_argument);
}

TEST_CASE("mean likelihood ratio is one under tilting") {
  // estimate P(W > -1) = 1 under tilts: the weighted mean is the LR mean
  const std::size_t reps = 20000;
  TiltSpec tilt{0.3, 0.2, -0.2};
  auto e = is_workload_tail(15, ArrivalModel::uniform01(),
                            ServiceModel::exponential(1.0), 0.5, -1.0, tilt,
                            reps, {37, 0});
  REQUIRE(std::abs(e.p_hat - 1.0) <= 3.0 * e.std_error());
}

TEST_CASE("importance sampling agrees with the enumeration oracle") {
  const std::size_t n = 8;
  const double t = 0.75, w = 0.8;
  std::vector<Atom> atoms = {{1.0, 0.5}, {2.0, 0.5}};
  auto model = ServiceModel::empirical(atoms);
  const double exact = tq_test::exact_workload_tail(n, t, w, model.atoms());
  auto tilt = suggest_tilts(t, 0.55, 1.6, model);
  auto e = is_workload_tail(n, ArrivalModel::uniform01(), model, t, w, tilt,
                            200000, {38, 0});
  REQUIRE(std::abs(e.p_hat - exact) <= 4.0 * e.std_error());
}

TEST_CASE("naive and importance-sampled estimates agree") {
  const std::size_t n = 50;
  const double t = 0.5, w = 0.55;
  auto model = ServiceModel::exponential(1.0 / 1.2);
  auto naive = mc_workload_tail(n, ArrivalModel::uniform01(), model, t, w,
                                200000, {39, 0});
  auto tilt = suggest_tilts(t, 0.4, 1.2 * (w + t) / t, model);
  auto is = is_workload_tail(n, ArrivalModel::uniform01(), model, t, w, tilt,
                             200000, {39, 1});
  const double se =
      std::sqrt(naive.variance + is.variance);
  REQUIRE(naive.p_hat > 0.0);
  REQUIRE(std::abs(naive.p_hat - is.p_hat) <= 3.0 * se);
}

TEST_CASE("tilting reduces variance on a rare target") {
  const std::size_t n = 60, reps = 100000;
  const double t = 0.5, w = 0.4;
  auto model = ServiceModel::exponential(1.0);
  auto naive = mc_workload_tail(n, ArrivalModel::uniform01(), model, t, w,
                                reps, {40, 0});
  // mild tilts: push the target epoch slightly low and the services
  // slightly heavy; aggressive service tilts inflate the likelihood-ratio
  // tail and lose to the naive estimator here
  auto tilt = suggest_tilts(t, 0.44, 1.2, model);
  auto is = is_workload_tail(n, ArrivalModel::uniform01(), model, t, w, tilt,
                             reps, {40, 1});
  REQUIRE(naive.p_hat > 0.0);
  REQUIRE(is.p_hat > 0.0);
  const double vr = naive.variance / is.variance;
  INFO("variance reduction factor " << vr);
  REQUIRE(vr > 1.0);
}

TEST_CASE("decay-rate report over the exact oracle") {
  auto rep = ldp_slope({100, 500, 2000, 5000},
                       [](std::size_t n) { return exact_os_tail(n, 0.5, 0.3).p; },
                       rate_os(0.5, 0.3).value);
  REQUIRE(rep.rows.size() == 4);
  REQUIRE(rep.gaps_decreasing);
  REQUIRE(rep.excluded.empty());
}

TEST_CASE("decay-rate report on a constant source flattens to zero") {
  auto rep = ldp_slope({100, 1000, 10000},
                       [](std::size_t) { return 0.2; }, 0.0);
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    REQUIRE(rep.rows[i].neg_log_p_over_n < rep.rows[i - 1].neg_log_p_over_n);
  REQUIRE(rep.rows.back().neg_log_p_over_n < 1e-3);
}

TEST_CASE("decay-rate report excludes zero-probability entries") {
  auto rep = ldp_slope({100, 500, 2000},
                       [](std::size_t n) { return n == 500 ? 0.0 : 0.1; },
                       0.05);
  REQUIRE(rep.excluded == std::vector<std::size_t>{500});
  REQUIRE(rep.rows.size() == 2);
  REQUIRE_THROWS_AS(ldp_slope({100, 500}, [](std::size_t) { return 0.1; },
                              0.0),
                    std::invalid_argument);
}

TEST_CASE("Monte Carlo confidence band contains the exact oracle gap") {
  const std::size_t n = 100, reps = 20000;
  const double t = 0.5, a = 0.38;
  Rng rng({41, 0});
  std::size_t hits = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    auto e = sample_uniform_order_stats(n, OrderStatMethod::expo_ratio, rng);
    hits += e[49] <= a;
  }
  const double p_hat = static_cast<double>(hits) / reps;
  const double se = std::sqrt(p_hat * (1.0 - p_hat) / reps);
  const double p = exact_os_tail(n, t, a).p;
  REQUIRE(p_hat - 3.0 * se <= p);
  REQUIRE(p <= p_hat + 3.0 * se);
}

TEST_CASE("enumeration oracle building block matches brute force") {
  // P(U_(1) <= 0.3, U_(2) <= 0.5, U_(3) <= 0.9) for three uniforms:
  // inclusion of the constraints evaluated by the polynomial recursion
  // against a quasi-exhaustive midpoint integration.
  const double got = tq_test::ordered_bounds_prob({0.3, 0.5, 0.9});
  // 3! * int_0^{0.3} int_u^{0.5} int_v^{0.9} dw dv du
  double exact = 0.0;
  {
    const int N = 2000;
    for (int i = 0; i < N; ++i) {
      const double u = 0.3 * (i + 0.5) / N;
      // inner double integral in closed form
      exact += (0.9 * (0.5 - u) - 0.5 * (0.25 - u * u)) * 0.3 / N;
    }
    exact *= 6.0;
  }
  REQUIRE(got == Catch::Approx(exact).margin(1e-6));
}
