#pragma once

#include <optional>
#include <string>
#include <vector>

#include "centerout/geometry.hpp"

namespace centerout {

// Closed half-space <a, x> <= b.
struct HalfSpace {
  std::vector<double> normal;
  double offset = 0.0;
};

struct SupportHint {
  enum class Kind { HalfSpaces, Unbounded, NonConvex };
  Kind kind = Kind::Unbounded;
  std::vector<HalfSpace> halfspaces;  // only for Kind::HalfSpaces
  bool convex() const { return kind != Kind::NonConvex; }
};

struct Dataset {
  int dim = 0;
  std::vector<double> points;  // n x dim, row-major
  std::optional<SupportHint> support_hint;
  long duplicate_rows = 0;  // counted on ingest

  int size() const { return static_cast<int>(points.size()) / dim; }
  Point point(int i) const { return row(points, dim, i); }
};

// Validates finiteness and shape; throws std::invalid_argument.
void validate(const Dataset& data);

}  // namespace centerout
