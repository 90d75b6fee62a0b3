#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "centerout/quadrature.hpp"
#include "centerout/reference.hpp"
#include "centerout/rng.hpp"

using namespace centerout;

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

TEST_CASE("sphere area closed forms") {
  CHECK(sphere_area(2) == doctest::Approx(2.0 * kPi).epsilon(1e-12));
  CHECK(sphere_area(1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(sphere_area(3) == doctest::Approx(4.0 * kPi).epsilon(1e-12));
  CHECK_THROWS_AS(sphere_area(0), std::invalid_argument);
  CHECK_THROWS_AS(sphere_area(-3), std::invalid_argument);
}

TEST_CASE("sphere area equals d times ball volume") {
  for (int d = 1; d <= 10; ++d) {
    const ReferenceConstants rc = reference_constants(d);
    CHECK(rc.sphere_area ==
          doctest::Approx(d * rc.ball_volume).epsilon(1e-12));
  }
}

TEST_CASE("spherical uniform density point values") {
  const double x2[2] = {0.3, 0.4};  // |x| = 0.5
  CHECK(spherical_uniform_density(Point(x2, 2)) ==
        doctest::Approx(1.0 / kPi).epsilon(1e-12));
  const double x1[1] = {0.5};
  CHECK(spherical_uniform_density(Point(x1, 1)) == doctest::Approx(0.5));
  const double far[2] = {1.5, 0.0};
  CHECK(spherical_uniform_density(Point(far, 2)) == 0.0);
  const double origin[3] = {0.0, 0.0, 0.0};
  CHECK(spherical_uniform_density(Point(origin, 3)) == 0.0);
}

TEST_CASE("density integrates to one by quadrature") {
  for (int d = 1; d <= 4; ++d) {
    const double total = ball_integral(
        d, 1.0, [](Point x) { return spherical_uniform_density(x); },
        d >= 4 ? 24 : 48, d >= 4 ? 32 : 64);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("sampling matches the radius and symmetry laws") {
  const int n = 100000;
  {
    const std::vector<double> pts = sample_spherical_uniform(n, 2, 11);
    double mean_norm = 0.0, mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) {
      mean_norm += norm(row(pts, 2, i)) / n;
      mx += pts[2 * i] / n;
      my += pts[2 * i + 1] / n;
    }
    CHECK(mean_norm == doctest::Approx(0.5).epsilon(0.02));
    CHECK(std::abs(mx) < 0.01);
    CHECK(std::abs(my) < 0.01);
  }
  {
    const std::vector<double> pts = sample_spherical_uniform(n, 3, 12);
    long inside = 0;
    for (int i = 0; i < n; ++i)
      if (norm(row(pts, 3, i)) <= 0.25) ++inside;
    CHECK(static_cast<double>(inside) / n == doctest::Approx(0.25).epsilon(0.04));
  }
  // determinism
  CHECK(sample_spherical_uniform(64, 3, 99) == sample_spherical_uniform(64, 3, 99));
}

TEST_CASE("grid layout for the exact factorization") {
  const SphericalGrid g = build_grid(12, 2, 3, 4, 5);
  CHECK(g.size() == 12);
  CHECK(g.origin_copies == 0);
  REQUIRE(g.radii.size() == 3);
  CHECK(g.radii[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(g.radii[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g.radii[2] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(g.n_directions() == 4);
  // equiangular directions, angle order
  CHECK(g.directions[0] == doctest::Approx(1.0));
  CHECK(g.directions[1] == doctest::Approx(0.0));
  CHECK(g.directions[2] == doctest::Approx(0.0));
  CHECK(g.directions[3] == doctest::Approx(1.0));
  // shells hold exactly n_S atoms
  std::vector<int> count(3, 0);
  for (int a = 0; a < g.size(); ++a) {
    REQUIRE(g.radius_index[a] >= 0);
    ++count[g.radius_index[a]];
    CHECK(norm(g.atom(a)) > 0.0);
    CHECK(norm(g.atom(a)) < 1.0);
  }
  for (int i = 0; i < 3; ++i) CHECK(count[i] == 4);
}

TEST_CASE("grid remainder becomes origin copies") {
  const SphericalGrid g = build_grid(13, 2, 3, 4, 5);
  CHECK(g.size() == 13);
  CHECK(g.origin_copies == 1);
  CHECK(g.radius_index[12] == -1);
  CHECK(norm(g.atom(12)) == 0.0);
}

TEST_CASE("grid precondition failures") {
  CHECK_THROWS_AS(build_grid(12, 2, 5, 4, 5), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(16, 2, 3, 4, 5), std::invalid_argument);  // n0 = 4 = n_S
  CHECK_THROWS_AS(build_grid(0, 2, 1, 1, 5), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(8, 1, 2, 3, 5), std::invalid_argument);  // 3 dirs in 1d
}

TEST_CASE("directions have unit norm across dimensions") {
  for (int d = 2; d <= 5; ++d) {
    const int n_S = 40;
    const std::vector<double> dirs = sphere_directions(n_S, d, 17);
    std::set<std::pair<double, double>> distinct;
    for (int k = 0; k < n_S; ++k) {
      CHECK(std::abs(norm(row(dirs, d, k)) - 1.0) < 1e-12);
      distinct.insert({dirs[k * d], dirs[k * d + 1]});
    }
    CHECK(distinct.size() == static_cast<std::size_t>(n_S));
  }
  // the seed only rotates d >= 3 layouts
  CHECK(sphere_directions(8, 2, 1) == sphere_directions(8, 2, 2));
  CHECK(sphere_directions(8, 3, 1) != sphere_directions(8, 3, 2));
  CHECK(sphere_directions(8, 3, 1) == sphere_directions(8, 3, 1));
}

namespace {

// U_d probability of a radial band times a spherical cap around w
double cap_band_probability(int d, Point w, double cos_lo, double r_lo,
                            double r_hi, int mc, Rng& rng) {
  long hit = 0;
  for (int t = 0; t < mc; ++t) {
    const std::vector<double> s = rng.unit_vector(d);
    if (dot(Point(s), w) >= cos_lo) ++hit;
  }
  return (r_hi - r_lo) * static_cast<double>(hit) / mc;
}

double grid_discrepancy(const SphericalGrid& g, int trials, std::uint64_t seed) {
  Rng rng(seed);
  Rng mc_rng(derive_seed(seed, "cap-mc"));
  const int d = g.dim;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const std::vector<double> w = rng.unit_vector(d);
    const double cos_lo = rng.uniform(-0.9, 0.9);
    double r_lo = rng.uniform(0.0, 1.0), r_hi = rng.uniform(0.0, 1.0);
    if (r_lo > r_hi) std::swap(r_lo, r_hi);
    long inside = 0;
    for (int a = 0; a < g.size(); ++a) {
      const double rr = norm(g.atom(a));
      if (rr <= 0.0 || rr < r_lo || rr >= r_hi) continue;
      if (dot(g.atom(a), Point(w)) / rr >= cos_lo) ++inside;
    }
    const double emp = static_cast<double>(inside) / g.size();
    const double pop = cap_band_probability(d, Point(w), cos_lo, r_lo, r_hi,
                                            20000, mc_rng);
    worst = std::max(worst, std::abs(emp - pop));
  }
  return worst;
}

}  // namespace

TEST_CASE("grid discrepancy on caps times bands shrinks with resolution") {
  for (int d : {2, 3}) {
    const SphericalGrid coarse = build_grid(8 * 16, d, 8, 16, 3);
    const SphericalGrid fine = build_grid(40 * 60, d, 40, 60, 3);
    const double dc = grid_discrepancy(coarse, 40, 123);
    const double df = grid_discrepancy(fine, 40, 123);
    CHECK(df < dc);
    CHECK(df < 0.05);
  }
}

TEST_CASE("radial integral matches the closed form") {
  CHECK(coarea_radial_integral(0.3, 3) ==
        doctest::Approx(0.3 * 4.0 * kPi).epsilon(1e-6));
  CHECK(coarea_radial_integral(1.0, 2) ==
        doctest::Approx(2.0 * kPi).epsilon(1e-6));
  CHECK(coarea_radial_integral(0.5, 1) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(coarea_radial_integral(0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(coarea_radial_integral(1.5, 2), std::invalid_argument);
}

TEST_CASE("radial integral sweep stays within 1e-6 relative") {
  for (int d = 1; d <= 4; ++d)
    for (double r = 0.1; r < 0.95; r += 0.2) {
      const double got = coarea_radial_integral(r, d);
      const double want = sphere_area(d) * r;
      CHECK(std::abs(got - want) / want < 1e-6);
    }
}
