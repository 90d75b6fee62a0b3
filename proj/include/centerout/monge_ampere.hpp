#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "centerout/potential.hpp"
#include "centerout/rng.hpp"

namespace centerout {

// Integration region: a (possibly hollow) ball, an axis box, or a finite
// point list thickened by a radius (radius 0 gives a Lebesgue-null set).
struct Region {
  enum class Kind { Ball, Box, Points };
  Kind kind = Kind::Ball;
  // ball / annulus
  std::vector<double> center;
  double radius = 0.0;
  double inner_radius = 0.0;
  // box
  std::vector<double> lo, hi;
  // points
  std::vector<double> pts;  // m x dim
  double point_radius = 0.0;

  static Region ball(std::vector<double> center, double r, double r_inner = 0.0);
  static Region box(std::vector<double> lo, std::vector<double> hi);
  static Region point_set(std::vector<double> pts, int dim, double r);

  int dim() const;
  bool contains(Point x) const;
  double volume() const;
  double surface() const;  // boundary measure, for discretization allowances
  double distance_to_origin() const;
  double max_norm() const;  // sup |x| over the region
  // uniform draw from the region (rejection inside the union for points)
  std::vector<double> sample(Rng& rng) const;
};

using DensityFn = std::function<double(Point)>;

struct MAEstimate {
  Region region;
  double value_subdiff = 0.0;   // rejection estimate of the gradient-image volume
  double value_formula = 0.0;   // density-formula estimate
  double se_subdiff = 0.0;
  double se_formula = 0.0;
  long n_mc = 0;
  bool warning = false;         // region leaves the potential's reliable range
  std::string method;           // "direct" or "radial"
};

// Forward measure of a region A in sample space,
//   value_formula ~ a_d * int_A p(x) |F(x)|^{d-1} dx,
//   value_subdiff ~ vol{u in B_d : Q(u) in A} by rejection over the ball.
MAEstimate ma_forward_density(const Region& A, const DensityFn& p,
                              const Potentials& pot, long n_mc,
                              std::uint64_t seed);

// Backward measure of a region B inside the unit ball,
//   value_formula ~ (1/a_d) int_B dy / (p(Q(y)) |y|^{d-1}),
//   value_subdiff ~ vol{x in data box : F(x) in B} by rejection.
// B touching the origin requires allow_singular; the radial substitution
// then removes the singularity exactly.
MAEstimate ma_backward_density(const Region& B, const DensityFn& p,
                               const Potentials& pot, long n_mc,
                               std::uint64_t seed, bool allow_singular = false);

struct BoundReport {
  double alpha_hat = 0.0;  // largest constant with alpha*vol(A) <= mu(A) on all trials
  double A_hat = 0.0;      // smallest constant with mu(A) <= A*vol(A)^{1/d}
  std::optional<double> alpha_candidate;  // 1 / (a_d * Lambda_R)
  std::optional<double> A_candidate;      // 1 / (lambda_R * c_d^{1/d})
  double enclosing_radius = 0.0;          // empirical sup |Q| over probes
  int trials = 0;
  bool all_hold = true;
};

// Measures random sub-balls of M against the volume growth bounds; the
// candidate constants are filled in when Assumption-A style bounds
// (lambda_R, Lambda_R) for the target density are supplied.
BoundReport volume_growth_bounds(
    const Region& M, const Potentials& pot, const DensityFn& p, int trials,
    long n_mc_per_trial, std::uint64_t seed,
    const std::function<std::pair<double, double>(double)>& assumption_a = {});

struct BoundaryAvoidanceReport {
  double max_norm = 0.0;
  double bound = 0.0;  // n_R / (n_R + 1)
  bool pass = false;
};

// max |F(x)| over interior points; must stay at or below the outermost
// shell radius.
BoundaryAvoidanceReport boundary_avoidance_check(
    const Potentials& pot, const std::vector<double>& interior_points);

// Exact discrete transport-equation check: the matched atoms of the
// samples inside A are counted; both sides agree for any bijective plan.
struct PushforwardCheck {
  long samples_in_region = 0;
  long image_atoms = 0;
  bool exact = false;
};
PushforwardCheck pushforward_count(const Potentials& pot, const Dataset& data,
                                   const Region& A);

}  // namespace centerout
