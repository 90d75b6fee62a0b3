#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "centerout/errors.hpp"
#include "centerout/potential.hpp"
#include "centerout/rng.hpp"

using namespace centerout;

namespace {

Dataset gauss_cloud(int n, int dim, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Dataset d;
  d.dim = dim;
  d.points.resize(static_cast<std::size_t>(n) * dim);
  for (auto& v : d.points) v = scale * rng.normal();
  return d;
}

SphericalGrid origin_only_grid(int dim) {
  SphericalGrid g;
  g.dim = dim;
  g.origin_copies = 1;
  g.atoms.assign(dim, 0.0);
  g.radius_index = {-1};
  g.direction_index = {-1};
  return g;
}

Potentials fit(const Dataset& data, const SphericalGrid& grid) {
  return build_potentials(solve_assignment(data, grid), data, grid);
}

}  // namespace

TEST_CASE("identity transport yields the quadratic potential") {
  // data equal to the atoms of the 5-atom 1d grid (shells 1/3, 2/3 in both
  // directions plus one origin copy); duals solved by hand give psi = u^2/2
  const SphericalGrid grid = build_grid(5, 1, 2, 2, 1);
  Dataset data;
  data.dim = 1;
  data.points.assign(grid.atoms.begin(), grid.atoms.end());
  const Potentials pot = fit(data, grid);
  const std::vector<double> expect{1.0 / 18, 1.0 / 18, 2.0 / 9, 2.0 / 9, 0.0};
  for (int j = 0; j < 5; ++j) {
    CHECK(pot.discrete.psi[j] == doctest::Approx(expect[j]).epsilon(1e-14));
    // each support line's slope is the atom itself
    CHECK(pot.extended.slope[j] == grid.atoms[j]);
  }
  CHECK(pot.discrete.consistency_residual() <= 1e-12);
}

TEST_CASE("single point, single origin atom") {
  const SphericalGrid grid = origin_only_grid(2);
  Dataset data;
  data.dim = 2;
  data.points = {1.3, -0.4};
  const Potentials pot = fit(data, grid);
  CHECK(pot.discrete.psi[0] == 0.0);
  for (double r : {0.0, 0.3, 0.9}) {
    const std::vector<double> u{r, 0.0};
    const MapValue q = quantile_map(pot, Point(u));
    CHECK(q.point[0] == 1.3);
    CHECK(q.point[1] == -0.4);
    CHECK_FALSE(q.multiple);
  }
  const std::vector<double> x{5.0, 5.0};
  const MapValue f = distribution_map(pot, Point(x));
  CHECK(f.point[0] == 0.0);
  CHECK(f.point[1] == 0.0);
  CHECK(inverse_residual(pot, Point(data.points)) ==
        doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("translated data: assignment and matched points shift exactly") {
  const Dataset data = gauss_cloud(20, 2, 11);
  const SphericalGrid grid = build_grid(20, 2, 4, 5, 7);
  const Potentials pot = fit(data, grid);

  Dataset shifted = data;
  const double v[2] = {0.7, -0.3};
  for (int i = 0; i < 20; ++i) {
    shifted.points[i * 2] += v[0];
    shifted.points[i * 2 + 1] += v[1];
  }
  const Potentials pot2 = fit(shifted, grid);

  CHECK(pot.assignment == pot2.assignment);
  for (int j = 0; j < 20; ++j) {
    CHECK(pot2.discrete.matched[j * 2] == pot.discrete.matched[j * 2] + v[0]);
    CHECK(pot2.discrete.matched[j * 2 + 1] ==
          pot.discrete.matched[j * 2 + 1] + v[1]);
    // the quantile map at atoms is translation-equivariant
    if (!grid.is_origin(j)) {
      const MapValue qa = quantile_map(pot, grid.atom(j));
      const MapValue qb = quantile_map(pot2, grid.atom(j));
      CHECK(qb.point[0] == doctest::Approx(qa.point[0] + v[0]).epsilon(1e-12));
      CHECK(qb.point[1] == doctest::Approx(qa.point[1] + v[1]).epsilon(1e-12));
    }
  }
  // the distribution map sends shifted samples to the same atoms
  for (int i = 0; i < 20; ++i) {
    const MapValue fa = distribution_map(pot, data.point(i));
    const MapValue fb = distribution_map(pot2, shifted.point(i));
    CHECK(fa.point == fb.point);
  }
}

TEST_CASE("legendre transform of the zero potential") {
  // two atoms on the line, psi = 0: phi(x) = max(u x) over {-1/2, 1/2}
  SphericalGrid grid;
  grid.dim = 1;
  grid.atoms = {-0.5, 0.5};
  grid.radii = {0.5};
  grid.directions = {1.0, -1.0};
  grid.radius_index = {0, 0};
  grid.direction_index = {1, 0};
  Potentials pot;
  pot.discrete.grid = std::make_shared<SphericalGrid>(grid);
  pot.discrete.psi = {0.0, 0.0};
  pot.discrete.matched = {-0.5, 0.5};
  pot.extended.dim = 1;
  pot.extended.base = grid.atoms;
  pot.extended.slope = pot.discrete.matched;
  pot.extended.intercept = pot.discrete.psi;

  std::vector<int> ach;
  const double x = 2.0;
  CHECK(legendre_transform(pot, Point(&x, 1), &ach) == 1.0);
  REQUIRE(ach.size() == 1);
  CHECK(ach[0] == 1);  // the +0.5 atom

  // 1-Lipschitz ratio of the two-line max on the pair (0, 10) is exactly 1/2
  const std::vector<double> pair{0.0, 10.0};
  const LipschitzReport rep = lipschitz_audit(pot, pair);
  CHECK(rep.worst_ratio == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rep.pairs_used == 1);

  // far-field direction: the achiever maximizes <u, x> at the outer shell
  const Potentials zero2 = [] {
    const SphericalGrid g2 = build_grid(12, 2, 3, 4, 1);
    Potentials p;
    p.discrete.grid = std::make_shared<SphericalGrid>(g2);
    p.discrete.psi.assign(12, 0.0);
    p.discrete.matched = g2.atoms;
    p.extended.dim = 2;
    p.extended.base = g2.atoms;
    p.extended.slope = g2.atoms;
    p.extended.intercept = p.discrete.psi;
    return p;
  }();
  const std::vector<double> far{3.0, 0.1};
  std::vector<int> ach2;
  const double phi = legendre_transform(zero2, Point(far), &ach2);
  const double fx = norm(Point(far));
  CHECK(phi <= fx);  // sup <u,x> over the ball is |x|
  CHECK(phi >= 0.75 * fx * std::cos(3.14159265358979 / 4));
  REQUIRE(ach2.size() == 1);
  CHECK(zero2.grid().radius_index[ach2[0]] == 2);     // outermost shell
  CHECK(zero2.grid().direction_index[ach2[0]] == 0);  // direction (1,0)
}

TEST_CASE("quadratic potential is numerically self-conjugate") {
  const SphericalGrid grid = build_grid(40 * 64, 2, 40, 64, 2);
  Dataset data;
  data.dim = 2;
  data.points.assign(grid.atoms.begin(), grid.atoms.end());
  const Potentials pot = fit(data, grid);
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const std::vector<double> dir = rng.unit_vector(2);
    const double r = 0.9 * rng.uniform();
    const std::vector<double> x{r * dir[0], r * dir[1]};
    const double phi = legendre_transform(pot, Point(x));
    CHECK(std::abs(phi - 0.5 * norm2(Point(x))) <= 2e-3);
  }
}

TEST_CASE("distribution map fundamentals") {
  const Dataset data = gauss_cloud(30, 2, 21);
  const SphericalGrid grid = build_grid(30, 2, 5, 6, 3);
  const Potentials pot = fit(data, grid);
  // complementary slackness: samples go to their matched atoms
  for (int i = 0; i < 30; ++i) {
    const MapValue f = distribution_map(pot, data.point(i));
    CHECK_FALSE(f.multiple);
    const Point atom = grid.atom(pot.assignment[i]);
    CHECK(f.point[0] == atom[0]);
    CHECK(f.point[1] == atom[1]);
  }
  // far field along a direction lands on the outermost shell nearby
  Rng rng(31);
  for (int t = 0; t < 50; ++t) {
    const std::vector<double> u = rng.unit_vector(2);
    std::vector<double> x{300.0 * u[0], 300.0 * u[1]};
    const MapValue f = distribution_map(pot, Point(x));
    CHECK(norm(Point(f.point)) <= grid.max_radius() + 1e-12);
    double cosang = dot(Point(f.point), Point(u)) / norm(Point(f.point));
    CHECK(cosang >= std::cos(2.0 * 3.14159265358979 / 6));
  }
}

TEST_CASE("quantile map at atoms returns matched points bitwise") {
  const Dataset data = gauss_cloud(24, 2, 41);
  const SphericalGrid grid = build_grid(24, 2, 4, 6, 9);
  const Potentials pot = fit(data, grid);
  for (int j = 0; j < 24; ++j) {
    if (grid.is_origin(j)) continue;
    const MapValue q = quantile_map(pot, grid.atom(j));
    CHECK(q.point[0] == pot.discrete.matched[j * 2]);
    CHECK(q.point[1] == pot.discrete.matched[j * 2 + 1]);
  }
  const std::vector<double> outside{1.0, 0.0};
  CHECK_THROWS_AS(quantile_map(pot, Point(outside)), OutOfDomain);
}

TEST_CASE("identity case: quantile map approximates the identity") {
  const SphericalGrid grid = build_grid(30 * 40, 2, 30, 40, 4);
  Dataset data;
  data.dim = 2;
  data.points.assign(grid.atoms.begin(), grid.atoms.end());
  const Potentials pot = fit(data, grid);
  Rng rng(6);
  const double spacing = 1.0 / 31 + 2.0 * std::sin(3.14159265358979 / 40);
  for (int t = 0; t < 100; ++t) {
    const std::vector<double> dir = rng.unit_vector(2);
    const double r = 0.05 + 0.85 * rng.uniform();
    const std::vector<double> u{r * dir[0], r * dir[1]};
    const MapValue q = quantile_map(pot, Point(u));
    CHECK(dist(Point(q.point), Point(u)) <= spacing);
  }
}

TEST_CASE("multiple origin copies matched to distinct points flag the origin") {
  const SphericalGrid grid = build_grid(8, 2, 2, 3, 5);  // two origin copies
  REQUIRE(grid.origin_copies == 2);
  Dataset data;
  data.dim = 2;
  data.points.assign(grid.atoms.begin(), grid.atoms.begin() + 12);
  data.points.insert(data.points.end(), {0.011, 0.032});
  data.points.insert(data.points.end(), {-0.028, -0.007});
  const Potentials pot = fit(data, grid);
  const std::vector<double> origin{0.0, 0.0};
  const MapValue q = quantile_map(pot, Point(origin));
  CHECK(q.multiple);
  CHECK(q.achievers.size() == 2);
  CHECK(q.point[0] == doctest::Approx(0.5 * (0.011 - 0.028)).epsilon(1e-12));
  CHECK(q.point[1] == doctest::Approx(0.5 * (0.032 - 0.007)).epsilon(1e-12));
}

TEST_CASE("round trips vanish at samples and react to corruption") {
  const Dataset data = gauss_cloud(36, 2, 51);
  const SphericalGrid grid = build_grid(36, 2, 6, 6, 5);
  Potentials pot = fit(data, grid);
  for (int i = 0; i < 36; ++i)
    CHECK(inverse_residual(pot, data.point(i)) == 0.0);

  // duplicated samples: at least one of the pair round-trips exactly
  Dataset dup = data;
  dup.points[0] = dup.points[2];
  dup.points[1] = dup.points[3];
  const Potentials pot_dup = fit(dup, grid);
  const double r0 = inverse_residual(pot_dup, dup.point(0));
  const double r1 = inverse_residual(pot_dup, dup.point(1));
  CHECK(std::min(r0, r1) <= 1e-12);

  // perturbing one atom value breaks complementary slackness somewhere;
  // drop the plan shortcuts so the corrupted max structure is what answers
  pot.discrete.psi[7] += 0.1;
  pot.extended.intercept[7] += 0.1;
  pot.sample_index.clear();
  pot.atom_index.clear();
  double worst = 0.0;
  for (int i = 0; i < 36; ++i)
    worst = std::max(worst, inverse_residual(pot, data.point(i)));
  CHECK(worst > 1e-6);
}

TEST_CASE("lipschitz audit over random pairs stays within one") {
  const Dataset data = gauss_cloud(40, 2, 61, 2.0);
  const SphericalGrid grid = build_grid(40, 2, 5, 8, 7);
  const Potentials pot = fit(data, grid);
  Rng rng(62);
  std::vector<double> pairs(4 * 10000);
  for (auto& v : pairs) v = 10.0 * rng.normal();
  const LipschitzReport rep = lipschitz_audit(pot, pairs);
  CHECK(rep.worst_ratio <= 1.0 + 1e-9);
  CHECK(rep.pairs_used == 10000);

  // coincident pairs are skipped
  std::vector<double> degen{1.0, 2.0, 1.0, 2.0};
  CHECK(lipschitz_audit(pot, degen).skipped == 1);
}

TEST_CASE("potential laws hold on random probes") {
  const Dataset data = gauss_cloud(48, 2, 71);
  const SphericalGrid grid = build_grid(48, 2, 6, 8, 11);
  const Potentials pot = fit(data, grid);
  CHECK(pot.discrete.consistency_residual() <= 1e-8);

  Rng rng(72);
  for (int t = 0; t < 2000; ++t) {
    // convexity of the extension
    std::vector<double> z1(2), z2(2), zt(2);
    for (auto* z : {&z1, &z2})
      for (auto& c : *z) c = 3.0 * rng.normal();
    const double tt = rng.uniform();
    for (int c = 0; c < 2; ++c) zt[c] = tt * z1[c] + (1 - tt) * z2[c];
    CHECK(pot.extended.value(Point(zt)) <=
          tt * pot.extended.value(Point(z1)) +
              (1 - tt) * pot.extended.value(Point(z2)) + 1e-10);

    // Fenchel-Young against every atom
    const std::vector<double> x{3.0 * rng.normal(), 3.0 * rng.normal()};
    const double phi = legendre_transform(pot, Point(x));
    for (int j = 0; j < 48; ++j)
      CHECK(phi + pot.discrete.psi[j] >= dot(grid.atom(j), Point(x)) - 1e-10);

    // monotonicity of the distribution map
    const std::vector<double> x2{3.0 * rng.normal(), 3.0 * rng.normal()};
    const MapValue fa = distribution_map(pot, Point(x));
    const MapValue fb = distribution_map(pot, Point(x2));
    double inner = 0.0;
    for (int c = 0; c < 2; ++c)
      inner += (fa.point[c] - fb.point[c]) * (x[c] - x2[c]);
    CHECK(inner >= -1e-10);

    // gradient containment
    CHECK(norm(Point(fa.point)) <= grid.max_radius() + 1e-12);
  }
  // Fenchel-Young equality on matched pairs
  for (int i = 0; i < 48; ++i) {
    const int j = pot.assignment[i];
    const double phi = legendre_transform(pot, data.point(i));
    CHECK(std::abs(phi + pot.discrete.psi[j] -
                   dot(grid.atom(j), data.point(i))) <= 1e-8);
  }
}

TEST_CASE("bucketed pruning matches a full scan on a large grid") {
  const SphericalGrid grid = build_grid(101 * 100, 2, 101, 100, 13);
  REQUIRE(grid.size() > 10000);
  Dataset data;
  data.dim = 2;
  data.points.assign(grid.atoms.begin(), grid.atoms.end());
  const Potentials pot = fit(data, grid);

  Rng rng(14);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x{2.5 * rng.normal(), 2.5 * rng.normal()};
    std::vector<int> ach;
    const double pruned = legendre_transform(pot, Point(x), &ach);
    // independent full scan with the same tie rule
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> vals(grid.size());
    for (int j = 0; j < grid.size(); ++j) {
      vals[j] = dot(grid.atom(j), Point(x)) - pot.discrete.psi[j];
      best = std::max(best, vals[j]);
    }
    CHECK(pruned == best);
    std::vector<int> full;
    const double tol = 1e-10 * (1.0 + std::abs(best));
    for (int j = 0; j < grid.size(); ++j)
      if (vals[j] >= best - tol) full.push_back(j);
    CHECK(ach == full);
  }
}
