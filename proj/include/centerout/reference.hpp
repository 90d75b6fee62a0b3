#pragma once

#include <cstdint>
#include <vector>

#include "centerout/geometry.hpp"

namespace centerout {

// Spherical uniform reference measure on the open unit ball: a uniform
// direction on the sphere combined with an independent uniform radius in
// (0,1). Its density is 1/(a_d |x|^{d-1}) inside the punctured ball and 0
// elsewhere (0 at the origin itself).

// Surface area a_d of the unit sphere S_{d-1}.
double sphere_area(int d);

// Volume c_d of the unit ball B_d. Satisfies a_d = d * c_d.
double ball_volume(int d);

struct ReferenceConstants {
  int dim;
  double sphere_area;
  double ball_volume;
};

ReferenceConstants reference_constants(int d);

double spherical_uniform_density(Point x);

// n i.i.d. draws from the spherical uniform, row-major n-by-d.
std::vector<double> sample_spherical_uniform(int n, int d, std::uint64_t seed);

// Deterministic discretization of the reference measure: n_R shells at radii
// i/(n_R+1), n_S low-discrepancy directions per shell, and the remainder
// n - n_R*n_S as copies of the origin. All atoms carry weight 1/n.
struct SphericalGrid {
  int dim = 0;
  std::vector<double> radii;       // n_R, strictly increasing
  std::vector<double> directions;  // n_S x dim, unit vectors
  int origin_copies = 0;
  std::vector<double> atoms;       // n x dim; shell-major, origin atoms last
  std::vector<int> radius_index;     // per atom, -1 for origin copies
  std::vector<int> direction_index;  // per atom, -1 for origin copies

  int n_radii() const { return static_cast<int>(radii.size()); }
  int n_directions() const {
    return static_cast<int>(directions.size()) / dim;
  }
  int size() const { return static_cast<int>(atoms.size()) / dim; }
  double weight() const { return 1.0 / size(); }
  double max_radius() const { return radii.empty() ? 0.0 : radii.back(); }
  Point atom(int j) const { return row(atoms, dim, j); }
  Point direction(int k) const { return row(directions, dim, k); }
  bool is_origin(int j) const { return radius_index[j] < 0; }
};

// Low-discrepancy directions on S_{d-1}: d=1 is {+1,-1}, d=2 equiangular,
// d>=3 a generalized-spiral placement rotated by a seeded Haar rotation.
std::vector<double> sphere_directions(int n_S, int d, std::uint64_t seed);

SphericalGrid build_grid(int n, int d, int n_R, int n_S, std::uint64_t seed);

// Numerical estimate of the radial integral of |y|^{1-d} over r*B_d, used
// as a self-test against the closed form a_d * r.
double coarea_radial_integral(double r, int d);

}  // namespace centerout
