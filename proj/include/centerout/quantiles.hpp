#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "centerout/potential.hpp"

namespace centerout {

struct QuantileContour {
  double level = 0.0;
  bool interpolated = false;  // level is not one of the grid radii
  bool closed = false;        // d == 2 polyline closure
  int dim = 0;
  std::vector<double> points;     // n_dirs x dim, ordered by direction tag
  std::vector<int> dir_index;     // direction tag per point
  std::vector<double> directions; // the probing directions, n_dirs x dim

  int size() const { return static_cast<int>(dir_index.size()); }
};

// Evaluates the quantile map on the sphere of radius r; d = 2 output is
// angle-ordered and closed, higher dimensions are tagged point clouds.
QuantileContour contour(const Potentials& pot, double r, int n_dirs);

struct RankSignTable {
  std::vector<double> rank;      // |F| per sample, shell radius
  std::vector<double> sign;      // n x dim unit vectors, zero rows at origin
  std::vector<int> grid_index;   // matched atom
  std::vector<int> shell;        // radius index, -1 for origin matches
  std::vector<int> sector;       // direction index, -1 for origin matches
  int n_R = 0, n_S = 0, origin_copies = 0;
  int size() const { return static_cast<int>(rank.size()); }
};

// Exact ranks and signs read off the matched atoms of an exact plan.
RankSignTable ranks_signs(const Potentials& pot, const Dataset& data);

// Symmetric Hausdorff distance between finite point sets (k x d buffers).
double hausdorff_distance(const std::vector<double>& A,
                          const std::vector<double>& B, int dim);

// Synthetic source abstraction used by the support-recovery sweep.
struct SyntheticSource {
  std::function<Dataset(int n, std::uint64_t seed)> sample;
  std::function<std::vector<double>(int m)> support_points;   // covers X
  std::function<std::vector<double>(int m)> boundary_points;  // covers bd(X)
  bool compact = false;
  bool convex = false;
};

struct SupportRecoveryRow {
  int n = 0;
  int n_R = 0, n_S = 0;
  double hausdorff_support = 0.0;   // region+contour vs support sample
  double hausdorff_boundary = 0.0;  // contour vs boundary sample
};

struct SupportRecoveryReport {
  double level = 0.0;
  std::vector<SupportRecoveryRow> rows;
  bool monotone = false;  // hausdorff_support decreasing across rows
};

// Fits grids of increasing size (n_R ~ sqrt(n)) and tracks the Hausdorff
// distance of the level-r region to the generator's support.
SupportRecoveryReport support_recovery_test(const SyntheticSource& source,
                                            const std::vector<int>& n_list,
                                            double r, std::uint64_t seed);

struct RayEscapeReport {
  double pass_fraction = 0.0;
  int tested = 0;
  int violations = 0;
  double tau = 0.0;
  bool contractual = true;  // false = report-only (nonconvex/unknown support)
};

// From each probed boundary point y = Q(r u), shoots the ray y + t u and
// checks that no region point returns within tau of it. tau <= 0 picks the
// default 1e-9 * data diameter.
RayEscapeReport ray_escape_test(const Potentials& pot, double r,
                                int n_boundary, double tau = 0.0,
                                bool contractual = true);

struct InvarianceRow {
  std::vector<double> direction;
  std::vector<double> errors;  // |F(t u) - u| per t
  bool monotone_within_spacing = false;
  double final_error = 0.0;
};

struct InvarianceReport {
  std::vector<double> t_list;
  std::vector<InvarianceRow> rows;
  double angular_spacing = 0.0;  // chord between adjacent grid directions
  double radial_spacing = 0.0;   // 1 / (n_R + 1)
  bool all_monotone = false;
  double max_final_error = 0.0;
};

InvarianceReport asymptotic_invariance_test(const Potentials& pot,
                                            const std::vector<double>& directions,
                                            const std::vector<double>& t_list);

struct HomeomorphismAudit {
  bool injective = false;             // matched atoms distinct per sample
  double max_roundtrip_residual = 0.0;
  std::vector<double> modulus_by_shell;  // max |Q(u)-Q(u')| over shell neighbors
  double modulus = 0.0;                  // overall max
  long multiplicity_flags = 0;           // census away from the origin
  long probes = 0;
};

HomeomorphismAudit homeomorphism_audit(const Potentials& pot,
                                       const Dataset& data,
                                       std::uint64_t seed);

struct IndependenceReport {
  double statistic = 0.0;  // chi-square on the shell x sector table
  double p_value = 1.0;
  long excluded_origin = 0;
  bool exactly_uniform = false;
  std::vector<long> counts;  // n_R x n_S row-major
};

// Exact contingency of shell against sector; the full factorized grid
// makes the table uniform by construction.
IndependenceReport rank_sign_independence_test(const RankSignTable& table);

// Chord length between adjacent probing directions of the grid.
double angular_spacing(const SphericalGrid& grid);

}  // namespace centerout
