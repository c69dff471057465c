#ifndef TQ_SERVICE_MODEL_HPP
#define TQ_SERVICE_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "tq/golden.hpp"
#include "tq/rng.hpp"

namespace tq {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ServiceKind { exponential, deterministic, gamma, empirical };

struct Atom {
  double value = 0.0;
  double weight = 0.0;
};

// A service-time law on (0, inf): cumulant generating function with an
// explicit open domain, mean, sampler, and exponential-tilt transform.
// Immutable after construction.
class ServiceModel {
 public:
  static ServiceModel exponential(double rate) {
    require(rate > 0.0, "exponential rate must be positive");
    ServiceModel m;
    m.kind_ = ServiceKind::exponential;
    m.a_ = rate;
    m.mean_ = 1.0 / rate;
    m.dom_hi_ = rate;
    return m;
  }

  static ServiceModel deterministic(double value) {
    require(value > 0.0, "deterministic service must be positive");
    ServiceModel m;
    m.kind_ = ServiceKind::deterministic;
    m.a_ = value;
    m.mean_ = value;
    return m;
  }

  static ServiceModel gamma(double shape, double scale) {
    require(shape > 0.0 && scale > 0.0, "gamma parameters must be positive");
    ServiceModel m;
    m.kind_ = ServiceKind::gamma;
    m.a_ = shape;
    m.b_ = scale;
    m.mean_ = shape * scale;
    m.dom_hi_ = 1.0 / scale;
    return m;
  }

  static ServiceModel empirical(std::vector<Atom> atoms) {
    require(!atoms.empty(), "empirical model needs at least one atom");
    double total = 0.0, mean = 0.0;
    for (const auto& a : atoms) {
      require(a.value > 0.0, "empirical atom values must be positive");
      require(a.weight > 0.0, "empirical atom weights must be positive");
      total += a.weight;
    }
    for (auto& a : atoms) {
      a.weight /= total;
      mean += a.weight * a.value;
    }
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& x, const Atom& y) { return x.value < y.value; });
    ServiceModel m;
    m.kind_ = ServiceKind::empirical;
    m.atoms_ = std::move(atoms);
    m.mean_ = mean;
    return m;
  }

  ServiceKind kind() const { return kind_; }
  double mean() const { return mean_; }
  double rate_param() const { return a_; }     // exponential
  double value_param() const { return a_; }    // deterministic
  double shape_param() const { return a_; }    // gamma
  double scale_param() const { return b_; }    // gamma
  const std::vector<Atom>& atoms() const { return atoms_; }

  // Open CGF domain (domain_lo, domain_hi); evaluation at or past the
  // boundary yields +inf.
  double domain_lo() const { return dom_lo_; }
  double domain_hi() const { return dom_hi_; }
  bool in_domain(double theta) const {
    return theta > dom_lo_ && theta < dom_hi_;
  }

  double cgf(double theta) const {
    if (!in_domain(theta)) return kInf;
    switch (kind_) {
      case ServiceKind::exponential:
        return std::log(a_ / (a_ - theta));
      case ServiceKind::deterministic:
        return theta * a_;
      case ServiceKind::gamma:
        return -a_ * std::log(1.0 - b_ * theta);
      case ServiceKind::empirical: {
        // log sum of w_i exp(theta x_i), stabilized by the largest term.
        double mx = -kInf;
        for (const auto& a : atoms_)
          mx = std::max(mx, std::log(a.weight) + theta * a.value);
        double s = 0.0;
        for (const auto& a : atoms_)
          s += std::exp(std::log(a.weight) + theta * a.value - mx);
        return mx + std::log(s);
      }
    }
    return kInf;
  }

  double cgf_derivative(double theta) const {
    if (!in_domain(theta)) return kInf;
    switch (kind_) {
      case ServiceKind::exponential:
        return 1.0 / (a_ - theta);
      case ServiceKind::deterministic:
        return a_;
      case ServiceKind::gamma:
        return a_ * b_ / (1.0 - b_ * theta);
      case ServiceKind::empirical: {
        const double mx = cgf(theta);
        double s = 0.0;
        for (const auto& a : atoms_)
          s += a.value * std::exp(std::log(a.weight) + theta * a.value - mx);
        return s;
      }
    }
    return kInf;
  }

  double sample(Rng& rng) const {
    switch (kind_) {
      case ServiceKind::exponential:
        return rng.exponential(a_);
      case ServiceKind::deterministic:
        return a_;
      case ServiceKind::gamma:
        return rng.gamma(a_, b_);
      case ServiceKind::empirical: {
        double u = rng.uniform();
        for (const auto& a : atoms_) {
          if (u <= a.weight) return a.value;
          u -= a.weight;
        }
        return atoms_.back().value;
      }
    }
    return 0.0;
  }

  // Exponential change of measure: the tilted law has CGF
  // phi_theta(s) = phi(theta + s) - phi(theta). Closed under all kinds.
  ServiceModel tilt(double theta) const {
    if (theta == 0.0) return *this;
    if (!in_domain(theta))
      throw std::invalid_argument("tilt parameter outside CGF domain");
    switch (kind_) {
      case ServiceKind::exponential:
        return exponential(a_ - theta);
      case ServiceKind::deterministic:
        return *this;
      case ServiceKind::gamma:
        return gamma(a_, b_ / (1.0 - b_ * theta));
      case ServiceKind::empirical: {
        std::vector<Atom> tilted = atoms_;
        const double norm = cgf(theta);
        for (auto& a : tilted)
          a.weight = std::exp(std::log(a.weight) + theta * a.value - norm);
        return empirical(std::move(tilted));
      }
    }
    return *this;
  }

  // Per-unit Cramer transform sup_theta {theta z - phi(theta)}, in closed
  // form where one exists. The numeric route lives in rate_pointwise.
  double cramer_rate(double z) const {
    switch (kind_) {
      case ServiceKind::exponential:
        if (z <= 0.0) return kInf;
        return a_ * z - 1.0 - std::log(a_ * z);
      case ServiceKind::deterministic:
        return z == a_ ? 0.0 : kInf;
      case ServiceKind::gamma:
        if (z <= 0.0) return kInf;
        return z / b_ - a_ + a_ * std::log(a_ * b_ / z);
      case ServiceKind::empirical: {
        const double lo = atoms_.front().value;
        const double hi = atoms_.back().value;
        if (z < lo || z > hi) return kInf;
        if (z == lo) return -std::log(atoms_.front().weight);
        if (z == hi) return -std::log(atoms_.back().weight);
        auto g = [&](double th) { return th * z - cgf(th); };
        return maximize_concave(g, dom_lo_, dom_hi_).value;
      }
    }
    return kInf;
  }

  // d/dz of cramer_rate, which equals the maximizing tilt theta*(z).
  double cramer_rate_derivative(double z) const {
    switch (kind_) {
      case ServiceKind::exponential:
        return a_ - 1.0 / z;
      case ServiceKind::gamma:
        return 1.0 / b_ - a_ / z;
      case ServiceKind::empirical: {
        auto g = [&](double th) { return th * z - cgf(th); };
        return maximize_concave(g, dom_lo_, dom_hi_).x;
      }
      case ServiceKind::deterministic:
        return 0.0;
    }
    return 0.0;
  }

 private:
  static void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
  }

  ServiceKind kind_ = ServiceKind::exponential;
  double a_ = 1.0;  // rate / value / shape
  double b_ = 0.0;  // gamma scale
  double mean_ = 1.0;
  double dom_lo_ = -kInf;
  double dom_hi_ = kInf;
  std::vector<Atom> atoms_;
};

}  // namespace tq

#endif  // TQ_SERVICE_MODEL_HPP
