#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "tq/tq.hpp"

using namespace tq;

namespace {

// Independent code path for the Bernoulli KL divergence.
double bernoulli_kl(double p, double q) {
  auto term = [](double a, double b) {
    if (a == 0.0) return 0.0;
    return a * (std::log(a) - std::log(b));
  };
  return term(p, q) + term(1.0 - p, 1.0 - q);
}

double exp_legendre_closed_form(double t, double x) {
  return x - t + t * std::log(t / x);
}

}  // namespace

TEST_CASE("epoch rate vanishes at the law of large numbers point") {
  REQUIRE(rate_os(0.5, 0.5).value == 0.0);
  REQUIRE(rate_os(0.3, 0.3).value == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("epoch rate frozen values") {
  REQUIRE(rate_os(0.5, 0.3).value == Catch::Approx(0.087177).margin(5e-7));
  REQUIRE(rate_os(0.25, 0.5).value == Catch::Approx(0.130812).margin(5e-7));
}

TEST_CASE("epoch rate boundary conventions") {
  REQUIRE(std::isinf(rate_os(0.5, 0.0).value));
  REQUIRE(std::isinf(rate_os(0.5, 1.0).value));
  REQUIRE(std::isinf(rate_os(0.5, -0.1).value));
  REQUIRE_THROWS_AS(rate_os(0.0, 0.5), std::invalid_argument);
  REQUIRE_THROWS_AS(rate_os(1.0, 0.5), std::invalid_argument);
}

TEST_CASE("epoch rate matches the Bernoulli KL form") {
  for (double t : {0.25, 0.5, 0.75})
    for (double x = 0.05; x < 1.0; x += 0.05)
      REQUIRE(rate_os(t, x).value ==
              Catch::Approx(bernoulli_kl(t, x)).margin(1e-13));
}

TEST_CASE("epoch rate is midpoint convex with interval level sets") {
  const double t = 0.4;
  std::vector<double> xs;
  for (double x = 0.02; x < 1.0; x += 0.02) xs.push_back(x);
  for (std::size_t i = 0; i + 2 < xs.size(); ++i) {
    const double a = xs[i], b = xs[i + 2];
    REQUIRE(rate_os(t, 0.5 * (a + b)).value <=
            0.5 * (rate_os(t, a).value + rate_os(t, b).value) + 1e-12);
  }
  // level set {I_t <= c} scanned as a single interval
  for (double c : {0.01, 0.05, 0.2}) {
    bool inside = false, left_again = false;
    for (double x : xs) {
      const bool in = rate_os(t, x).value <= c;
      if (in && left_again) FAIL("level set is not an interval");
      if (inside && !in) left_again = true;
      inside = in;
    }
  }
}

TEST_CASE("general-arrival rate composes with the CDF") {
  auto uniform = ArrivalModel::uniform01();
  REQUIRE(rate_os_general(0.5, 0.3, uniform).value ==
          Catch::Approx(rate_os(0.5, 0.3).value).margin(1e-14));
  auto square = ArrivalModel::general(
      [](double y) { return y <= 0.0 ? 0.0 : (y >= 1.0 ? 1.0 : y * y); },
      [](double u) { return std::sqrt(u); });
  REQUIRE(rate_os_general(0.5, std::sqrt(0.5), square).value ==
          Catch::Approx(0.0).margin(1e-12));
  REQUIRE(rate_os_general(0.5, 0.3, square).value ==
          Catch::Approx(rate_os(0.5, 0.09).value).margin(1e-12));
}

TEST_CASE("general-arrival rate rejects flat CDFs") {
  auto flat = ArrivalModel::general([](double) { return 0.5; },
                                    [](double) { return 0.5; }, true, false);
  REQUIRE_THROWS_AS(rate_os_general(0.5, 0.3, flat), std::invalid_argument);
}

TEST_CASE("Cramer rate vanishes at the scaled mean") {
  REQUIRE(legendre(ServiceModel::exponential(1.0), 0.5, 0.5).value ==
          Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("Cramer rate frozen value for the unit exponential") {
  REQUIRE(legendre(ServiceModel::exponential(1.0), 0.5, 1.0).value ==
          Catch::Approx(0.153426).margin(5e-7));
}

TEST_CASE("numeric Cramer rate matches the exponential closed form") {
  auto m = ServiceModel::exponential(1.0);
  for (double t : {0.25, 0.5, 0.75})
    for (double x = 0.05; x <= 3.0 + 1e-12; x += 0.05)
      REQUIRE(legendre(m, t, x).value ==
              Catch::Approx(exp_legendre_closed_form(t, x)).margin(1e-8));
}

TEST_CASE("Cramer rate of a point mass") {
  auto m = ServiceModel::deterministic(0.8);
  REQUIRE(legendre(m, 0.5, 0.4).value == Catch::Approx(0.0).margin(1e-10));
  REQUIRE(std::isinf(legendre(m, 0.5, 0.6).value));
  REQUIRE(std::isinf(legendre(m, 0.5, -0.1).value));
}

TEST_CASE("Cramer rate is midpoint convex") {
  auto m = ServiceModel::exponential(1.0);
  for (double x = 0.1; x < 2.5; x += 0.1)
    REQUIRE(legendre(m, 0.5, x + 0.1).value <=
            0.5 * (legendre(m, 0.5, x).value +
                   legendre(m, 0.5, x + 0.2).value) +
                1e-10);
}

TEST_CASE("offered-load rate vanishes at the fluid point") {
  auto r = rate_offered(0.5, 0.0, ServiceModel::exponential(1.0));
  REQUIRE(r.value == Catch::Approx(0.0).margin(1e-9));
  REQUIRE(r.optimizer[0] == Catch::Approx(0.5).margin(1e-4));
}

TEST_CASE("offered-load rate frozen value") {
  auto r = rate_offered(0.5, 0.2, ServiceModel::exponential(1.0));
  REQUIRE(r.value == Catch::Approx(0.0303).margin(2e-4));
  REQUIRE(r.optimizer[0] == Catch::Approx(0.578).margin(1e-3));
}

TEST_CASE("offered-load rate brute-force cross check") {
  auto m = ServiceModel::exponential(1.0);
  for (auto [t, y] : std::vector<std::pair<double, double>>{
           {0.5, 0.2}, {0.3, 0.1}, {0.7, 0.05}}) {
    double best = kInf;
    for (double x1 = std::max(y, 0.0) + 1e-5; x1 < 1.0; x1 += 1e-5) {
      const double v = rate_os(t, x1).value + legendre(m, t, x1 - y).value;
      best = std::min(best, v);
    }
    REQUIRE(rate_offered(t, y, m).value == Catch::Approx(best).margin(1e-7));
  }
}

TEST_CASE("offered-load rate infeasible level") {
  REQUIRE(std::isinf(
      rate_offered(0.5, 1.0, ServiceModel::exponential(1.0)).value));
  REQUIRE(std::isinf(
      rate_offered(0.5, 1.5, ServiceModel::exponential(1.0)).value));
}

TEST_CASE("offered-load rate is midpoint convex in the level") {
  auto m = ServiceModel::exponential(1.0);
  for (double y = -0.2; y < 0.55; y += 0.05)
    REQUIRE(rate_offered(0.5, y + 0.05, m).value <=
            0.5 * (rate_offered(0.5, y, m).value +
                   rate_offered(0.5, y + 0.1, m).value) +
                1e-9);
}

TEST_CASE("stationarity root at the fluid point") {
  auto rep = cubic_stationarity_exp(0.5, 0.0);
  REQUIRE(rep.interior_root);
  REQUIRE(rep.root == Catch::Approx(0.5).margin(1e-10));
}

TEST_CASE("stationarity root matches the optimizer argmin") {
  auto rep = cubic_stationarity_exp(0.5, 0.2);
  REQUIRE(rep.root == Catch::Approx(0.578).margin(1e-3));
  auto r = rate_offered(0.5, 0.2, ServiceModel::exponential(1.0));
  REQUIRE(std::abs(rep.root - r.optimizer[0]) <= 1e-5);
  REQUIRE(std::abs(rep.objective_value - r.value) <= 1e-8);
}

TEST_CASE("derived cubic annihilates the root, alternative form does not") {
  auto rep = cubic_stationarity_exp(0.5, 0.2);
  REQUIRE(std::abs(rep.derived_cubic_residual) <= 1e-10);
  REQUIRE(std::abs(rep.alternative_cubic_residual) > 1e-3);
}

TEST_CASE("increment rate vanishes at identity increments") {
  Partition j(0.5, {0.25, 0.5});
  REQUIRE(rate_increments(j, {0.25, 0.25}).value ==
          Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("single increment reduces to the epoch rate") {
  for (double t1 : {0.25, 0.5, 0.75}) {
    Partition j(t1, {t1});
    for (double y = 0.01; y < 1.0; y += 0.01)
      REQUIRE(rate_increments(j, {y}).value ==
              Catch::Approx(rate_os(t1, y).value).margin(1e-12));
  }
}

TEST_CASE("two-increment hand formula") {
  Partition j(0.5, {0.25, 0.5});
  const double expect = 0.25 * std::log(2.5) + 0.25 * std::log(0.25 / 0.3) +
                        0.5 * std::log(0.5 / 0.6);
  REQUIRE(rate_increments(j, {0.1, 0.3}).value ==
          Catch::Approx(expect).margin(1e-14));
}

TEST_CASE("increment rate rejects mass one or more") {
  Partition j(0.5, {0.25, 0.5});
  REQUIRE(std::isinf(rate_increments(j, {0.5, 0.5}).value));
  REQUIRE(std::isinf(rate_increments(j, {0.7, 0.4}).value));
  REQUIRE(std::isinf(rate_increments(j, {0.0, 0.2}).value));
  REQUIRE_THROWS_AS(rate_increments(j, {0.1}), std::invalid_argument);
}

TEST_CASE("partition validation") {
  REQUIRE_THROWS_AS(Partition(0.5, {}), std::invalid_argument);
  REQUIRE_THROWS_AS(Partition(0.5, {0.3, 0.2}), std::invalid_argument);
  REQUIRE_THROWS_AS(Partition(0.5, {0.3, 0.6}), std::invalid_argument);
}
