#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace centerout {

using Point = std::span<const double>;

inline double dot(Point a, Point b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

inline double norm2(Point a) { return dot(a, a); }

inline double norm(Point a) { return std::sqrt(norm2(a)); }

inline double dist2(Point a, Point b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

inline double dist(Point a, Point b) { return std::sqrt(dist2(a, b)); }

// Row view into an n-by-dim row-major buffer.
inline Point row(const std::vector<double>& buf, int dim, std::size_t i) {
  return Point(buf.data() + i * static_cast<std::size_t>(dim),
               static_cast<std::size_t>(dim));
}

inline bool all_finite(const std::vector<double>& buf) {
  for (double v : buf)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace centerout
