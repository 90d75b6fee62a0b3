#pragma once

#include <map>
#include <memory>
#include <vector>

#include "centerout/dataset.hpp"
#include "centerout/ot.hpp"
#include "centerout/reference.hpp"

namespace centerout {

// Map evaluation result. `point` is the gradient value; when several
// supporting elements achieve the defining max within tolerance, `point`
// is their average and `multiple` is set (the underlying object is
// genuinely multivalued there). `achievers` lists the tied indices.
struct MapValue {
  std::vector<double> point;
  bool multiple = false;
  std::vector<int> achievers;
};

// Convex potential psi sampled on grid atoms, together with the matched
// data point of every atom (a subgradient representative). Normalized so
// psi vanishes at an origin atom (at the evaluation of the extension at 0
// when the grid carries no origin copy).
struct DiscretePotential {
  std::shared_ptr<const SphericalGrid> grid;
  std::vector<double> psi;      // per atom
  std::vector<double> matched;  // per atom, matched data point (n x d)

  // max over atoms k of the violation psi(u_k) < line_b(u_k); ~0 for
  // potentials built from exact plans
  double consistency_residual() const;
};

// Piecewise-affine extension built from the support lines
//   line_b(z) = <y_b, z - u_b> + psi(u_b),
// the largest convex function with exactly these supporting elements. Its
// slopes are matched data points, so the gradient image stays inside the
// convex hull of the data.
struct ExtendedPotential {
  int dim = 0;
  std::vector<double> base;       // u_b, n x d
  std::vector<double> slope;      // y_b, n x d
  std::vector<double> intercept;  // psi(u_b), n

  int size() const { return static_cast<int>(intercept.size()); }
  double value(Point z) const;
  MapValue gradient(Point z) const;  // tie-averaged active slopes
};

struct Potentials {
  DiscretePotential discrete;
  ExtendedPotential extended;
  std::vector<int> assignment;  // sample -> atom; empty for dense plans
  bool exact = true;

  // Exact-point indices: the maps are evaluated through the plan at grid
  // atoms and matched sample points (complementary slackness), through the
  // max structure everywhere else. Shortest-path duals leave non-matched
  // edges tight to roundoff, so argmax evaluation alone cannot recover the
  // plan at those points.
  std::map<std::vector<double>, std::vector<int>> atom_index;
  std::map<std::vector<double>, std::vector<int>> sample_index;

  const SphericalGrid& grid() const { return *discrete.grid; }
  int dim() const { return extended.dim; }
};

// Builds both potentials from the plan's grid-side duals. For exact plans
// the atom values are consistent with convexity to roundoff; for dense
// couplings the barycentric matched points make them approximate (see
// DiscretePotential::consistency_residual).
Potentials build_potentials(const TransportPlan& plan, const Dataset& data,
                            const SphericalGrid& grid);

// Legendre transform phi(x) = max_j (<u_j, x> - psi(u_j)) over grid atoms.
// Ties within tolerance are all reported. The evaluation is a full scan up
// to 10^4 atoms and an exact direction-bucketed pruned scan above that;
// both paths return identical values.
double legendre_transform(const Potentials& p, Point x,
                          std::vector<int>* achievers = nullptr);

// Center-outward distribution map: the achiever (or achiever average) of
// the Legendre max. Always lands in the closed unit ball.
MapValue distribution_map(const Potentials& p, Point x);

// Center-outward quantile map: gradient of the extension at u, |u| < 1.
// Throws OutOfDomain for |u| >= 1.
MapValue quantile_map(const Potentials& p, Point u);

// |Q(F(x)) - x|; zero at sample points of exact plans in generic position.
double inverse_residual(const Potentials& p, Point x);

struct LipschitzReport {
  double worst_ratio = 0.0;
  long pairs_used = 0;
  long skipped = 0;  // coincident pairs
};

// max |phi(x)-phi(x')| / |x-x'| over the given pairs (2*dim per row).
LipschitzReport lipschitz_audit(const Potentials& p,
                                const std::vector<double>& pairs);

}  // namespace centerout
