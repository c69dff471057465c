#ifndef TQ_ARRIVAL_MODEL_HPP
#define TQ_ARRIVAL_MODEL_HPP

#include <functional>
#include <stdexcept>
#include <utility>

namespace tq {

enum class ArrivalKind { uniform01, general };

// Arrival-epoch distribution F on [0, inf). Epochs of the queue are the
// order statistics of n i.i.d. draws from F; sampling goes through the
// quantile transform applied to uniform order statistics.
struct ArrivalModel {
  ArrivalKind kind = ArrivalKind::uniform01;
  std::function<double(double)> cdf;       // F
  std::function<double(double)> quantile;  // F^{-1}
  bool absolutely_continuous = true;
  bool strictly_increasing = true;

  static ArrivalModel uniform01() {
    ArrivalModel m;
    m.kind = ArrivalKind::uniform01;
    m.cdf = [](double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); };
    m.quantile = [](double u) { return u; };
    return m;
  }

  static ArrivalModel general(std::function<double(double)> cdf,
                              std::function<double(double)> quantile,
                              bool absolutely_continuous = true,
                              bool strictly_increasing = true) {
    if (!cdf || !quantile)
      throw std::invalid_argument("general arrival model needs cdf and quantile");
    ArrivalModel m;
    m.kind = ArrivalKind::general;
    m.cdf = std::move(cdf);
    m.quantile = std::move(quantile);
    m.absolutely_continuous = absolutely_continuous;
    m.strictly_increasing = strictly_increasing;
    return m;
  }
};

}  // namespace tq

#endif  // TQ_ARRIVAL_MODEL_HPP
