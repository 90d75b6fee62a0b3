#pragma once

#include <cstdint>
#include <vector>

#include "centerout/dataset.hpp"
#include "centerout/reference.hpp"

namespace centerout {

// Coupling between a sample and a grid under the squared Euclidean cost
// |x - u|^2 (not halved; the duals live on the same scale). For exact
// plans, duals satisfy f_i + g_j <= |x_i - u_j|^2 everywhere with equality
// on assigned pairs.
struct TransportPlan {
  enum class Kind { ExactPermutation, DenseCoupling };
  Kind kind = Kind::ExactPermutation;
  std::vector<int> assignment;   // point i -> atom sigma(i); exact plans
  std::vector<double> coupling;  // n x n row-major; dense plans
  std::vector<double> f;         // dual on sample points
  std::vector<double> g;         // dual on grid atoms
  double cost = 0.0;             // total squared-Euclidean cost / n
  int iterations = 0;            // Sinkhorn only
  double marginal_error = 0.0;   // Sinkhorn only, L1

  int size() const { return static_cast<int>(f.size()); }
};

double transport_cost(int i, int j, const Dataset& data,
                      const SphericalGrid& grid);

// Exact solver: shortest augmenting path with dual price maintenance.
// Among cost-minimizing permutations, returns the lexicographically
// smallest one (ties resolved on the reduced-cost-tight edge graph).
TransportPlan solve_assignment(const Dataset& data, const SphericalGrid& grid);

// Entropic surrogate, log-domain iterations. Duals are returned on the
// unregularized (squared-cost) scale and recentred so the grid-side dual
// vanishes at an origin atom when one exists (the atom nearest the origin
// otherwise). Throws ConvergenceFailure when max_iter is exhausted.
TransportPlan solve_sinkhorn(const Dataset& data, const SphericalGrid& grid,
                             double epsilon, double tol, int max_iter);

struct CycleViolationReport {
  long cycles_checked = 0;
  long violations = 0;
  double worst_margin = 0.0;  // most negative cycle sum, magnitude
};

// Exhaustive check of the cycle ordering condition
//   sum_t <x_{i_t}, u_{sigma(i_t)} - u_{sigma(i_{t+1})}> >= 0
// over all cycles of length 2..k among matched pairs. Exact plans only.
CycleViolationReport verify_cyclical_monotonicity(const TransportPlan& plan,
                                                  const Dataset& data,
                                                  const SphericalGrid& grid,
                                                  int k,
                                                  double margin_tol = 1e-9);

// Primal cost minus dual objective; ~0 for optimal exact plans.
double duality_gap(const TransportPlan& plan, const Dataset& data,
                   const SphericalGrid& grid);

}  // namespace centerout
