#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "centerout/errors.hpp"
#include "centerout/generators.hpp"
#include "centerout/monge_ampere.hpp"
#include "centerout/rng.hpp"

using namespace centerout;

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

Potentials fit(const Dataset& data, const SphericalGrid& grid) {
  return build_potentials(solve_assignment(data, grid), data, grid);
}

// transport of the reference onto its own grid: the empirical identity map
Potentials identity_case(int n_R, int n_S, int d = 2) {
  const SphericalGrid grid = build_grid(n_R * n_S, d, n_R, n_S, 7);
  Dataset data;
  data.dim = d;
  data.points.assign(grid.atoms.begin(), grid.atoms.end());
  return fit(data, grid);
}

}  // namespace

TEST_CASE("forward measure, 1d uniform: the gradient drops out") {
  const GeneratorSpec gen =
      GeneratorSpec::uniform_box({-1.0}, {1.0});
  const Dataset data = generate(gen, 300, 77);
  const SphericalGrid grid = build_grid(300, 1, 150, 2, 1);
  const Potentials pot = fit(data, grid);
  const Region A = Region::ball({0.0}, 0.5);
  const DensityFn p = [&](Point x) { return gen.density(x); };
  const MAEstimate est = ma_forward_density(A, p, pot, 20000, 5);
  // a_1 * int_A p * |F|^0 = 2 * (1/2) * 1 = length(A) = 1
  CHECK(std::abs(est.value_formula - 1.0) <= 4.0 * est.se_formula + 1e-9);
  CHECK(est.se_formula < 1e-6);  // constant integrand
  CHECK_FALSE(est.warning);
}

TEST_CASE("regions of measure zero get measure zero") {
  const Potentials pot = identity_case(20, 25);
  const Region sphere = Region::point_set({0.31, 0.07, -0.22, 0.4}, 2, 0.0);
  const DensityFn p = [](Point x) { return spherical_uniform_density(x); };
  const MAEstimate est = ma_forward_density(sphere, p, pot, 5000, 9);
  CHECK(est.value_formula == 0.0);
  CHECK(est.value_subdiff == 0.0);
}

TEST_CASE("forward measure of the reference onto itself is Lebesgue") {
  const Potentials pot = identity_case(100, 50);
  const Region A = Region::ball({0.0, 0.0}, 0.5, 0.25);
  const DensityFn p = [](Point x) { return spherical_uniform_density(x); };
  const MAEstimate est = ma_forward_density(A, p, pot, 40000, 11);
  const double want = kPi * (0.25 - 0.0625);  // area of the annulus
  CHECK(std::abs(est.value_formula - want) <=
        3.0 * est.se_formula + 2e-3);  // grid-resolution slack
  // the rejection estimate of the gradient-image volume agrees
  CHECK(std::abs(est.value_subdiff - want) <= 3.0 * est.se_subdiff + 2e-3);
}

TEST_CASE("backward measure closed forms") {
  const DensityFn u2 = [](Point x) { return spherical_uniform_density(x); };

  SUBCASE("identity: any admissible region gets its volume") {
    const Potentials pot = identity_case(100, 50);
    const Region B = Region::ball({0.0, 0.0}, 0.75, 0.5);
    const MAEstimate est = ma_backward_density(B, u2, pot, 40000, 13);
    const double want = kPi * (0.5625 - 0.25);
    CHECK(est.method == "direct");
    CHECK(std::abs(est.value_formula - want) <= 3.0 * est.se_formula + 2e-3);
  }

  SUBCASE("1d uniform") {
    const GeneratorSpec gen = GeneratorSpec::uniform_box({-1.0}, {1.0});
    const Dataset data = generate(gen, 240, 78);
    const SphericalGrid grid = build_grid(240, 1, 120, 2, 1);
    const Potentials pot = fit(data, grid);
    // (0, 1/2) touches the origin, so the radial substitution handles it
    const Region B = Region::box({0.0}, {0.5});
    const DensityFn p = [&](Point x) { return gen.density(x); };
    const MAEstimate est = ma_backward_density(B, p, pot, 20000, 17, true);
    CHECK(est.method == "radial");
    CHECK(std::abs(est.value_formula - 0.5) <= 4.0 * est.se_formula + 1e-9);
  }

  SUBCASE("uniform disc target, annular region") {
    const GeneratorSpec gen = GeneratorSpec::uniform_ball(2, {0.0, 0.0}, 1.0);
    const Dataset data = generate(gen, 600, 79);
    const SphericalGrid grid = build_grid(600, 2, 20, 30, 3);
    const Potentials pot = fit(data, grid);
    const Region B = Region::ball({0.0, 0.0}, 0.75, 0.5);
    const DensityFn p = [&](Point x) { return gen.density(x); };
    const MAEstimate est = ma_backward_density(B, p, pot, 30000, 19);
    // (1/a_2) int_B pi/|y| dy = pi (0.75 - 0.5) = pi/4; constant density, so
    // the empirical map contributes nothing
    CHECK(std::abs(est.value_formula - kPi / 4) <= 3.0 * est.se_formula + 1e-6);
  }
}

TEST_CASE("origin-touching regions need the radial substitution") {
  const Potentials pot = identity_case(100, 50);
  const DensityFn u2 = [](Point x) { return spherical_uniform_density(x); };
  const Region B = Region::ball({0.0, 0.0}, 0.5);
  CHECK_THROWS_AS(ma_backward_density(B, u2, pot, 1000, 3),
                  std::invalid_argument);
  const MAEstimate est = ma_backward_density(B, u2, pot, 60000, 3, true);
  CHECK(est.method == "radial");
  CHECK(std::abs(est.value_formula - kPi / 4) <= 3.0 * est.se_formula + 2e-3);
}

TEST_CASE("regions outside the unit ball are rejected") {
  const Potentials pot = identity_case(10, 12);
  const DensityFn u2 = [](Point x) { return spherical_uniform_density(x); };
  const Region far = Region::ball({2.0, 0.0}, 0.5);
  CHECK_THROWS_AS(ma_backward_density(far, u2, pot, 1000, 3),
                  std::invalid_argument);
}

TEST_CASE("volume growth bounds on a disc-uniform target") {
  const GeneratorSpec gen = GeneratorSpec::uniform_ball(2, {0.0, 0.0}, 1.0);
  const Dataset data = generate(gen, 600, 80);
  const SphericalGrid grid = build_grid(600, 2, 20, 30, 5);
  const Potentials pot = fit(data, grid);
  const Region M = Region::ball({0.0, 0.0}, 0.7, 0.3);
  const DensityFn p = [&](Point x) { return gen.density(x); };
  const auto aa = [&](double R) { return *gen.assumption_a(R); };
  const BoundReport rep = volume_growth_bounds(M, pot, p, 12, 8000, 21, aa);
  CHECK(rep.all_hold);
  REQUIRE(rep.alpha_candidate.has_value());
  REQUIRE(rep.A_candidate.has_value());
  // fitted constants sit inside the theoretical corridor (MC slack)
  CHECK(rep.alpha_hat >= *rep.alpha_candidate * 0.9);
  CHECK(rep.A_hat <= *rep.A_candidate * 1.1);
  CHECK(rep.enclosing_radius <= 1.0);

  // shrinking balls: mu(A) / vol(A)^{1/d} stays bounded
  Rng rng(22);
  for (double rad : {0.1, 0.05, 0.02, 0.01}) {
    const Region A = Region::ball({0.45, 0.1}, rad);
    const MAEstimate mu = ma_backward_density(A, p, pot, 8000, 23);
    CHECK(mu.value_formula / std::sqrt(A.volume()) <= *rep.A_candidate * 1.2);
  }
}

TEST_CASE("interior points stay strictly inside the sphere") {
  Rng rng(31);
  Dataset data;
  data.dim = 2;
  data.points.resize(180 * 2);
  for (auto& v : data.points) v = rng.normal();
  const SphericalGrid grid = build_grid(180, 2, 9, 20, 3);
  const Potentials pot = fit(data, grid);
  const BoundaryAvoidanceReport rep =
      boundary_avoidance_check(pot, data.points);
  CHECK(rep.bound == doctest::Approx(0.9).epsilon(1e-15));  // 9 / 10
  CHECK(rep.max_norm <= rep.bound + 1e-12);
  CHECK(rep.pass);
}

TEST_CASE("pushforward counts match exactly on any region") {
  const GeneratorSpec gen =
      GeneratorSpec::uniform_box({0.0, 0.0}, {1.0, 1.0});
  const Dataset data = generate(gen, 400, 81);
  const SphericalGrid grid = build_grid(400, 2, 20, 20, 9);
  const Potentials pot = fit(data, grid);
  const Region A = Region::box({0.2, 0.1}, {0.8, 0.6});
  const PushforwardCheck check = pushforward_count(pot, data, A);
  CHECK(check.exact);
  CHECK(check.samples_in_region > 0);
  CHECK(check.samples_in_region == check.image_atoms);
}

TEST_CASE("far regions raise the warning flag, not an error") {
  const Potentials pot = identity_case(10, 12);
  const DensityFn u2 = [](Point x) { return spherical_uniform_density(x); };
  const Region far = Region::ball({50.0, 50.0}, 0.5);
  const MAEstimate est = ma_forward_density(far, u2, pot, 2000, 3);
  CHECK(est.warning);
  CHECK(est.value_formula == 0.0);  // density vanishes there
}
