#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tq/tq.hpp"

using namespace tq;

namespace {

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                             static_cast<double>(j) / b.size()));
  }
  return d;
}

double ks_critical_1pct(std::size_t n1, std::size_t n2) {
  return 1.628 * std::sqrt(static_cast<double>(n1 + n2) /
                           (static_cast<double>(n1) * static_cast<double>(n2)));
}

}  // namespace

TEST_CASE("single order statistic is one uniform draw") {
  Rng rng({1, 0});
  auto e = sample_uniform_order_stats(1, OrderStatMethod::sort, rng);
  REQUIRE(e.size() == 1);
  REQUIRE(e[0] > 0.0);
  REQUIRE(e[0] < 1.0);
}

TEST_CASE("equal exponentials give equal spacings") {
  auto e = order_stats_from_exponentials({1.0, 1.0, 1.0, 1.0});
  REQUIRE(e.size() == 3);
  REQUIRE(e[0] == Catch::Approx(0.25).margin(1e-15));
  REQUIRE(e[1] == Catch::Approx(0.50).margin(1e-15));
  REQUIRE(e[2] == Catch::Approx(0.75).margin(1e-15));
}

TEST_CASE("zero population size is rejected") {
  Rng rng({1, 0});
  REQUIRE_THROWS_AS(sample_uniform_order_stats(0, OrderStatMethod::sort, rng),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(
      sample_uniform_order_stats(0, OrderStatMethod::expo_ratio, rng),
      std::invalid_argument);
}

TEST_CASE("epoch samples are strictly increasing in (0,1)") {
  Rng rng({2, 0});
  for (auto method : {OrderStatMethod::sort, OrderStatMethod::expo_ratio}) {
    auto e = sample_uniform_order_stats(50, method, rng);
    REQUIRE(e.front() > 0.0);
    REQUIRE(e.back() < 1.0);
    for (std::size_t i = 1; i < e.size(); ++i) REQUIRE(e[i] > e[i - 1]);
  }
}

TEST_CASE("sort and exponential-ratio methods agree in law") {
  const std::size_t n = 200, reps = 5000;
  std::vector<double> a(reps), b(reps);
  Rng r1({3, 0}), r2({3, 1});
  for (std::size_t r = 0; r < reps; ++r) {
    a[r] = sample_uniform_order_stats(n, OrderStatMethod::sort, r1)[99];
    b[r] = sample_uniform_order_stats(n, OrderStatMethod::expo_ratio, r2)[99];
  }
  REQUIRE(ks_statistic(a, b) < ks_critical_1pct(reps, reps));
}

TEST_CASE("epoch spacings are exchangeable in the exponential inputs") {
  // Permuting the underlying exponentials permutes the spacings, so the
  // sorted spacing vector is exactly invariant.
  Rng rng({4, 0});
  std::vector<double> xi(9);
  for (auto& x : xi) x = rng.exponential(1.0);
  auto spacings = [](const std::vector<double>& e) {
    std::vector<double> s;
    double prev = 0.0;
    for (double v : e) {
      s.push_back(v - prev);
      prev = v;
    }
    s.push_back(1.0 - prev);
    std::sort(s.begin(), s.end());
    return s;
  };
  auto base = spacings(order_stats_from_exponentials(xi));
  auto perm = xi;
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[2], perm[5]);
  auto other = spacings(order_stats_from_exponentials(perm));
  for (std::size_t i = 0; i < base.size(); ++i)
    REQUIRE(base[i] == Catch::Approx(other[i]).margin(1e-15));
}

TEST_CASE("deterministic service sampler is a point mass") {
  Rng rng({5, 0});
  auto v = sample_service(3, ServiceModel::deterministic(0.5), rng);
  REQUIRE(v == std::vector<double>{0.5, 0.5, 0.5});
}

TEST_CASE("exponential service sample mean lands in the CLT band") {
  Rng rng({6, 0});
  const std::size_t n = 100000;
  auto v = sample_service(n, ServiceModel::exponential(1.0), rng);
  double mean = 0.0;
  for (double x : v) {
    REQUIRE(x > 0.0);
    mean += x;
  }
  mean /= static_cast<double>(n);
  REQUIRE(std::abs(mean - 1.0) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("two-atom sampler hits the right atom frequency") {
  Rng rng({7, 0});
  const std::size_t n = 100000;
  auto model = ServiceModel::empirical({{1.0, 0.5}, {2.0, 0.5}});
  auto v = sample_service(n, model, rng);
  double frac2 = 0.0;
  for (double x : v) {
    REQUIRE((x == 1.0 || x == 2.0));
    frac2 += (x == 2.0);
  }
  frac2 /= static_cast<double>(n);
  REQUIRE(std::abs(frac2 - 0.5) <
          3.0 * std::sqrt(0.25 / static_cast<double>(n)));
}

TEST_CASE("gamma sampler matches its mean") {
  Rng rng({8, 0});
  const std::size_t n = 100000;
  auto model = ServiceModel::gamma(2.0, 0.7);
  auto v = sample_service(n, model, rng);
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(n);
  const double sd = std::sqrt(2.0) * 0.7;
  REQUIRE(std::abs(mean - 1.4) < 3.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("zero tilt is the identity") {
  auto m = ServiceModel::exponential(1.0);
  auto t = m.tilt(0.0);
  REQUIRE(t.kind() == ServiceKind::exponential);
  REQUIRE(t.rate_param() == 1.0);
}

TEST_CASE("tilting the unit exponential by one half doubles the mean") {
  auto t = ServiceModel::exponential(1.0).tilt(0.5);
  REQUIRE(t.kind() == ServiceKind::exponential);
  REQUIRE(t.rate_param() == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(t.mean() == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("tilt at the domain boundary is rejected") {
  REQUIRE_THROWS_AS(ServiceModel::exponential(1.0).tilt(1.0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(ServiceModel::gamma(2.0, 0.5).tilt(2.0),
                    std::invalid_argument);
}

TEST_CASE("tilt followed by the opposite tilt restores the CGF") {
  std::vector<ServiceModel> models = {
      ServiceModel::exponential(1.0), ServiceModel::gamma(2.0, 0.4),
      ServiceModel::empirical({{1.0, 0.3}, {2.0, 0.7}})};
  for (const auto& m : models) {
    for (double theta : {-0.5, -0.1, 0.1, 0.4}) {
      if (!m.in_domain(theta)) continue;
      auto back = m.tilt(theta).tilt(-theta);
      for (double s : {-1.0, -0.3, 0.0, 0.2, 0.4}) {
        if (!m.in_domain(s)) continue;
        REQUIRE(back.cgf(s) == Catch::Approx(m.cgf(s)).margin(1e-10));
      }
    }
  }
}

TEST_CASE("tilted sampler mean matches the shifted CGF derivative") {
  const std::size_t n = 100000;
  struct Case {
    ServiceModel model;
    double theta;
  };
  std::vector<Case> cases = {{ServiceModel::exponential(1.0), 0.4},
                             {ServiceModel::gamma(2.0, 0.3), 1.0},
                             {ServiceModel::empirical({{1.0, 0.5}, {2.0, 0.5}}),
                              0.7}};
  std::uint64_t stream = 0;
  for (const auto& c : cases) {
    Rng rng({9, stream++});
    auto tilted = c.model.tilt(c.theta);
    auto v = sample_service(n, tilted, rng);
    double mean = 0.0, m2 = 0.0;
    for (double x : v) {
      mean += x;
      m2 += x * x;
    }
    mean /= static_cast<double>(n);
    m2 /= static_cast<double>(n);
    const double sd = std::sqrt(std::max(1e-12, m2 - mean * mean));
    const double target = c.model.cgf_derivative(c.theta);
    REQUIRE(std::abs(mean - target) <
            3.0 * sd / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("mean equals the CGF derivative at zero") {
  std::vector<ServiceModel> models = {
      ServiceModel::exponential(2.0), ServiceModel::deterministic(0.7),
      ServiceModel::gamma(1.5, 0.4),
      ServiceModel::empirical({{0.5, 0.2}, {1.5, 0.8}})};
  const double h = 1e-5;
  for (const auto& m : models) {
    const double fd = (m.cgf(h) - m.cgf(-h)) / (2.0 * h);
    REQUIRE(std::abs(fd - m.mean()) < 1e-9);
  }
}

TEST_CASE("CGF is plus infinity outside the open domain") {
  auto m = ServiceModel::exponential(1.0);
  REQUIRE(std::isinf(m.cgf(1.0)));
  REQUIRE(std::isinf(m.cgf(2.0)));
  REQUIRE(std::isfinite(m.cgf(0.999)));
  auto g = ServiceModel::gamma(2.0, 0.5);
  REQUIRE(std::isinf(g.cgf(2.0)));
}

TEST_CASE("CGF convexity by midpoint test") {
  std::vector<ServiceModel> models = {
      ServiceModel::exponential(1.0), ServiceModel::gamma(2.0, 0.3),
      ServiceModel::empirical({{1.0, 0.5}, {2.0, 0.5}})};
  for (const auto& m : models) {
    for (double a = -2.0; a < 0.8; a += 0.1) {
      const double b = a + 0.15;
      if (!m.in_domain(a) || !m.in_domain(b)) continue;
      REQUIRE(m.cgf(0.5 * (a + b)) <= 0.5 * (m.cgf(a) + m.cgf(b)) + 1e-12);
    }
  }
}

TEST_CASE("invalid model parameters are rejected") {
  REQUIRE_THROWS_AS(ServiceModel::exponential(0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(ServiceModel::deterministic(-1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(ServiceModel::gamma(1.0, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(ServiceModel::empirical({{1.0, 0.0}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(ServiceModel::empirical({{-1.0, 0.5}}),
                    std::invalid_argument);
}

TEST_CASE("identical seed and stream reproduce identical draws") {
  Rng a({123, 7}), b({123, 7});
  for (int i = 0; i < 100; ++i) REQUIRE(a.uniform() == b.uniform());
  Rng c({123, 8});
  bool differs = false;
  Rng d({123, 7});
  for (int i = 0; i < 100; ++i) differs = differs || (c.uniform() != d.uniform());
  REQUIRE(differs);
}
