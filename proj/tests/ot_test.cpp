#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "centerout/errors.hpp"
#include "centerout/ot.hpp"
#include "centerout/rng.hpp"

using namespace centerout;

namespace {

Dataset make_data(int dim, std::vector<double> pts) {
  Dataset d;
  d.dim = dim;
  d.points = std::move(pts);
  return d;
}

// grid with arbitrary atoms, for solver-level tests
SphericalGrid make_atom_grid(int dim, std::vector<double> atoms) {
  SphericalGrid g;
  g.dim = dim;
  g.atoms = std::move(atoms);
  const int n = static_cast<int>(g.atoms.size()) / dim;
  g.radius_index.assign(n, 0);
  g.direction_index.assign(n, 0);
  for (int a = 0; a < n; ++a) {
    const double r = norm(g.atom(a));
    if (r == 0.0) {
      g.radius_index[a] = -1;
      g.direction_index[a] = -1;
      ++g.origin_copies;
    }
  }
  return g;
}

// oracle: exhaustive minimum over all permutations
double brute_force_cost(const Dataset& data, const SphericalGrid& grid,
                        std::vector<int>* best_sigma = nullptr) {
  const int n = data.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += transport_cost(i, perm[i], data, grid);
    if (c < best - 1e-12) {
      best = c;
      if (best_sigma) *best_sigma = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Dataset gauss_cloud(int n, int dim, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Dataset d;
  d.dim = dim;
  d.points.resize(static_cast<std::size_t>(n) * dim);
  for (auto& v : d.points) v = scale * rng.normal();
  return d;
}

}  // namespace

TEST_CASE("1d instance matches the sorted pairing") {
  const Dataset data = make_data(1, {-1.2, 0.3, 2.0});
  const SphericalGrid grid = make_atom_grid(1, {-0.5, 0.0, 0.5});
  const TransportPlan plan = solve_assignment(data, grid);
  CHECK(plan.assignment == std::vector<int>{0, 1, 2});
  std::vector<int> oracle;
  const double best = brute_force_cost(data, grid, &oracle);
  CHECK(plan.assignment == oracle);
  CHECK(plan.cost * 3 == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("matching the atoms themselves costs zero") {
  const SphericalGrid grid = build_grid(12, 2, 3, 4, 1);
  Dataset data;
  data.dim = 2;
  // atoms in scrambled order
  const std::vector<int> order{7, 2, 9, 0, 5, 11, 1, 3, 10, 4, 8, 6};
  for (const int j : order) {
    const Point u = grid.atom(j);
    data.points.insert(data.points.end(), u.begin(), u.end());
  }
  const TransportPlan plan = solve_assignment(data, grid);
  CHECK(plan.cost == 0.0);
  for (int i = 0; i < 12; ++i) CHECK(plan.assignment[i] == order[i]);
}

TEST_CASE("random instances agree with the exhaustive oracle") {
  for (std::uint64_t seed : {21u, 22u, 23u, 24u}) {
    const Dataset data = gauss_cloud(6, 2, seed);
    SphericalGrid grid = make_atom_grid(2, gauss_cloud(6, 2, seed + 100, 0.4).points);
    const TransportPlan plan = solve_assignment(data, grid);
    const double best = brute_force_cost(data, grid);
    CHECK(plan.cost * 6 == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("duals are feasible, tight on the matching, and close the gap") {
  const std::vector<std::array<int, 3>> shapes{{5, 1, 5}, {40, 4, 10}, {150, 15, 10}};
  for (const auto& [n, n_R, n_S] : shapes) {
    const Dataset data = gauss_cloud(n, 2, 7 * n);
    const SphericalGrid grid = build_grid(n, 2, n_R, n_S, 3);
    REQUIRE(grid.size() == n);
    const TransportPlan plan = solve_assignment(data, grid);
    CHECK(std::abs(duality_gap(plan, data, grid)) <= 1e-8 * n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double slack =
            transport_cost(i, j, data, grid) - plan.f[i] - plan.g[j];
        CHECK(slack >= -1e-8);
      }
      const double tight = transport_cost(i, plan.assignment[i], data, grid) -
                           plan.f[i] - plan.g[plan.assignment[i]];
      CHECK(std::abs(tight) <= 1e-8);
    }
  }
}

TEST_CASE("1d assignment reproduces sorting for random instances") {
  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_index(499));
    Dataset data = gauss_cloud(n, 1, 1000 + trial, 2.0);
    std::vector<double> atoms(n);
    for (auto& v : atoms) v = rng.uniform(-1.0, 1.0);
    SphericalGrid grid = make_atom_grid(1, atoms);
    const TransportPlan plan = solve_assignment(data, grid);

    std::vector<int> data_order(n), atom_order(n);
    std::iota(data_order.begin(), data_order.end(), 0);
    std::iota(atom_order.begin(), atom_order.end(), 0);
    std::sort(data_order.begin(), data_order.end(), [&](int a, int b) {
      return data.points[a] != data.points[b] ? data.points[a] < data.points[b]
                                              : a < b;
    });
    std::sort(atom_order.begin(), atom_order.end(),
              [&](int a, int b) { return atoms[a] != atoms[b] ? atoms[a] < atoms[b] : a < b; });
    for (int k = 0; k < n; ++k)
      CHECK(plan.assignment[data_order[k]] == atom_order[k]);
  }
}

TEST_CASE("ties resolve to the lexicographically smallest permutation") {
  // two identical points and two identical atoms: four optimal matchings
  const Dataset data = make_data(1, {0.5, 0.5, -0.5, -0.5});
  const SphericalGrid grid = make_atom_grid(1, {0.4, 0.4, -0.4, -0.4});
  const TransportPlan plan = solve_assignment(data, grid);
  CHECK(plan.assignment == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("sinkhorn concentrates on the sorted pairing for small epsilon") {
  const Dataset data = make_data(1, {-0.9, 0.9});
  const SphericalGrid grid = make_atom_grid(1, {-0.5, 0.5});
  const TransportPlan plan = solve_sinkhorn(data, grid, 0.01, 1e-10, 20000);
  // mass on the identity pairing
  const double diag = plan.coupling[0] + plan.coupling[3];
  CHECK(diag >= 0.999);
  CHECK(plan.marginal_error <= 1e-10);

  // closed-form oracle for the 2x2 entropic fixed point: the coupling is
  // diag(a) K diag(b) with both marginals 1/2; solve it by direct iteration
  std::vector<double> K(4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      K[i * 2 + j] = std::exp(-transport_cost(i, j, data, grid) / 0.01);
  double a0 = 1, a1 = 1, b0 = 1, b1 = 1;
  for (int it = 0; it < 10000; ++it) {
    a0 = 0.5 / (K[0] * b0 + K[1] * b1);
    a1 = 0.5 / (K[2] * b0 + K[3] * b1);
    b0 = 0.5 / (K[0] * a0 + K[2] * a1);
    b1 = 0.5 / (K[1] * a0 + K[3] * a1);
  }
  CHECK(plan.coupling[0] == doctest::Approx(a0 * K[0] * b0).epsilon(1e-6));
  CHECK(plan.coupling[1] == doctest::Approx(a0 * K[1] * b1).epsilon(1e-6));
  CHECK(plan.coupling[2] == doctest::Approx(a1 * K[2] * b0).epsilon(1e-6));
  CHECK(plan.coupling[3] == doctest::Approx(a1 * K[3] * b1).epsilon(1e-6));
}

TEST_CASE("sinkhorn with huge epsilon approaches the product measure") {
  const Dataset data = gauss_cloud(6, 2, 31);
  SphericalGrid grid = make_atom_grid(2, gauss_cloud(6, 2, 32, 0.4).points);
  const TransportPlan plan = solve_sinkhorn(data, grid, 1e3, 1e-12, 50000);
  for (const double p : plan.coupling)
    CHECK(p == doctest::Approx(1.0 / 36.0).epsilon(0.01));
}

TEST_CASE("sinkhorn is bitwise deterministic") {
  const Dataset data = gauss_cloud(10, 2, 77);
  const SphericalGrid grid = build_grid(10, 2, 2, 5, 9);
  const TransportPlan a = solve_sinkhorn(data, grid, 0.1, 1e-7, 50000);
  const TransportPlan b = solve_sinkhorn(data, grid, 0.1, 1e-7, 50000);
  CHECK(a.coupling == b.coupling);
  CHECK(a.f == b.f);
  CHECK(a.g == b.g);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("sinkhorn reports non-convergence with the marginal error") {
  const Dataset data = gauss_cloud(8, 2, 41);
  const SphericalGrid grid = build_grid(8, 2, 2, 4, 2);
  try {
    solve_sinkhorn(data, grid, 0.01, 1e-14, 2);
    FAIL("expected ConvergenceFailure");
  } catch (const ConvergenceFailure& e) {
    CHECK(e.marginal_error > 1e-14);
    CHECK(e.iterations == 2);
  }
}

TEST_CASE("sinkhorn duals sit on the unregularized scale") {
  // grid-side dual vanishes at the atom nearest the origin, and the
  // coupling identity pi = exp((f+g-c)/eps)/n^2 holds exactly
  const Dataset data = gauss_cloud(6, 2, 51);
  const SphericalGrid grid = build_grid(6, 2, 1, 5, 4);  // one origin copy
  const TransportPlan plan = solve_sinkhorn(data, grid, 0.05, 1e-6, 50000);
  int j0 = -1;
  for (int j = 0; j < 6; ++j)
    if (grid.is_origin(j)) j0 = j;
  REQUIRE(j0 >= 0);
  CHECK(plan.g[j0] == 0.0);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      const double pi = std::exp(
          (plan.f[i] + plan.g[j] - transport_cost(i, j, data, grid)) / 0.05) /
                        36.0;
      CHECK(plan.coupling[i * 6 + j] == doctest::Approx(pi).epsilon(1e-9));
    }
}

TEST_CASE("exact plans beat the entropic coupling on cost") {
  for (std::uint64_t seed : {61u, 62u}) {
    const Dataset data = gauss_cloud(12, 2, seed);
    const SphericalGrid grid = build_grid(12, 2, 3, 4, 8);
    const TransportPlan exact = solve_assignment(data, grid);
    const TransportPlan soft = solve_sinkhorn(data, grid, 0.05, 1e-6, 50000);
    CHECK(exact.cost <= soft.cost + 1e-12);
  }
}

TEST_CASE("sinkhorn support collapses onto the optimal permutation") {
  // fixed instance with clear margins: atoms nudged by deterministic offsets
  const SphericalGrid grid = build_grid(8, 2, 2, 4, 6);
  Dataset data;
  data.dim = 2;
  for (int j = 0; j < 8; ++j) {
    data.points.push_back(grid.atoms[j * 2] + 0.03 * ((j % 3) - 1));
    data.points.push_back(grid.atoms[j * 2 + 1] - 0.02 * (j % 2));
  }
  const TransportPlan exact = solve_assignment(data, grid);
  std::vector<double> matched;
  for (int i = 0; i < 8; ++i)
    matched.push_back(transport_cost(i, exact.assignment[i], data, grid));
  std::sort(matched.begin(), matched.end());
  const double eps = 1e-3 * 0.5 * (matched[3] + matched[4]);  // median cost
  const TransportPlan soft = solve_sinkhorn(data, grid, eps, 1e-6, 200000);
  double off_mass = 0.0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      if (j != exact.assignment[i]) off_mass += soft.coupling[i * 8 + j];
  CHECK(off_mass <= 1e-3);
}

TEST_CASE("optimal plans carry no short improving cycles") {
  for (std::uint64_t seed : {81u, 82u, 83u}) {
    const Dataset data = gauss_cloud(30, 2, seed);
    const SphericalGrid grid = build_grid(30, 2, 5, 6, 2);
    const TransportPlan plan = solve_assignment(data, grid);
    const CycleViolationReport rep =
        verify_cyclical_monotonicity(plan, data, grid, 3);
    CHECK(rep.violations == 0);
    CHECK(rep.cycles_checked == 30 * 29 / 2 + 2 * (30 * 29 * 28 / 6));
  }
}

TEST_CASE("a hand-swapped matching shows one 2-cycle violation of margin 2") {
  const Dataset data = make_data(1, {-1.0, 1.0});
  const SphericalGrid grid = make_atom_grid(1, {-0.5, 0.5});
  TransportPlan plan = solve_assignment(data, grid);
  std::swap(plan.assignment[0], plan.assignment[1]);
  const CycleViolationReport rep =
      verify_cyclical_monotonicity(plan, data, grid, 2);
  CHECK(rep.violations == 1);
  CHECK(rep.worst_margin == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("a single pair has no cycles to violate") {
  const Dataset data = make_data(2, {0.3, 0.4});
  const SphericalGrid grid = make_atom_grid(2, {0.1, 0.0});
  const TransportPlan plan = solve_assignment(data, grid);
  const CycleViolationReport rep =
      verify_cyclical_monotonicity(plan, data, grid, 2);
  CHECK(rep.violations == 0);
  CHECK(rep.cycles_checked == 0);
}

TEST_CASE("cycle checks reject dense plans and bad k") {
  const Dataset data = gauss_cloud(4, 1, 91);
  const SphericalGrid grid = build_grid(4, 1, 2, 2, 2);
  const TransportPlan soft = solve_sinkhorn(data, grid, 0.1, 1e-6, 50000);
  CHECK_THROWS_AS(verify_cyclical_monotonicity(soft, data, grid, 2),
                  UnsupportedPlanKind);
  const TransportPlan exact = solve_assignment(data, grid);
  CHECK_THROWS_AS(verify_cyclical_monotonicity(exact, data, grid, 4),
                  std::invalid_argument);
}

TEST_CASE("size mismatch is rejected") {
  const Dataset data = gauss_cloud(5, 2, 95);
  const SphericalGrid grid = build_grid(6, 2, 1, 5, 2);
  CHECK_THROWS_AS(solve_assignment(data, grid), std::invalid_argument);
}
