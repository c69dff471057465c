#ifndef TQ_SAMPLE_PATH_HPP
#define TQ_SAMPLE_PATH_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tq {

enum class PathKind { step, linear };

// A path on [0, grid.back()] given by values at strictly increasing grid
// times (first grid point 0). Step paths are right-continuous; evaluation
// at a grid point returns the post-jump value.
struct SamplePath {
  std::vector<double> grid;
  std::vector<double> values;
  PathKind kind = PathKind::step;

  SamplePath() = default;
  SamplePath(std::vector<double> g, std::vector<double> v, PathKind k)
      : grid(std::move(g)), values(std::move(v)), kind(k) {
    validate();
  }

  void validate() const {
    if (grid.empty() || grid.size() != values.size())
      throw std::invalid_argument("grid/value size mismatch");
    if (grid.front() != 0.0)
      throw std::invalid_argument("path grid must start at 0");
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (!(grid[i] > grid[i - 1]))
        throw std::invalid_argument("path grid must be strictly increasing");
  }

  double horizon() const { return grid.back(); }

  double operator()(double s) const {
    if (s < 0.0 || s > grid.back() * (1.0 + 1e-12))
      throw std::out_of_range("evaluation outside path domain");
    s = std::min(s, grid.back());
    // index of last grid point <= s
    auto it = std::upper_bound(grid.begin(), grid.end(), s);
    std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
    if (kind == PathKind::step || i + 1 >= grid.size() || s == grid[i])
      return values[i];
    const double w = (s - grid[i]) / (grid[i + 1] - grid[i]);
    return values[i] + w * (values[i + 1] - values[i]);
  }
};

// Skorokhod regulator Gamma(x)(t) = x(t) + max_{s<=t} (-x(s)), computed by
// a running minimum over grid points. For step and piecewise-linear paths
// the running extremum over the continuum is attained on the grid.
inline SamplePath reflect(const SamplePath& x) {
  SamplePath out = x;
  double running_min = 0.0;
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    running_min = std::min(running_min, x.values[i]);
    out.values[i] = x.values[i] - running_min;
  }
  return out;
}

// Linear interpolation through the same grid values.
inline SamplePath interpolate(const SamplePath& x) {
  SamplePath out = x;
  out.kind = PathKind::linear;
  return out;
}

// Supremum distance over the union of both grids (exact for step paths
// evaluated just before jumps as well).
inline double sup_distance(const SamplePath& a, const SamplePath& b) {
  std::vector<double> pts;
  pts.reserve(a.grid.size() + b.grid.size());
  pts.insert(pts.end(), a.grid.begin(), a.grid.end());
  pts.insert(pts.end(), b.grid.begin(), b.grid.end());
  std::sort(pts.begin(), pts.end());
  const double hor = std::min(a.horizon(), b.horizon());
  double d = 0.0;
  double prev = -1.0;
  for (double s : pts) {
    if (s > hor || s == prev) continue;
    prev = s;
    d = std::max(d, std::abs(a(s) - b(s)));
    // approach from the left to catch pre-jump gaps
    if (s > 0.0) {
      const double sl = std::nextafter(s, 0.0);
      d = std::max(d, std::abs(a(sl) - b(sl)));
    }
  }
  return d;
}

}  // namespace tq

#endif  // TQ_SAMPLE_PATH_HPP
