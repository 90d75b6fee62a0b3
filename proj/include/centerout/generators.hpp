#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "centerout/dataset.hpp"
#include "centerout/quantiles.hpp"

namespace centerout {

// Synthetic data sources with analytically known densities and supports.
struct GeneratorSpec {
  enum class Kind {
    UniformBall,
    UniformBox,
    UniformPolytope,
    Gaussian,
    SphericalUniform,
    Mixture
  };
  Kind kind = Kind::UniformBox;
  int dim = 0;

  // uniform-ball / gaussian location
  std::vector<double> center;
  double radius = 1.0;
  // uniform-box
  std::vector<double> lo, hi;
  // uniform-convex-polytope: halfspaces plus a sampling box
  std::vector<HalfSpace> halfspaces;
  std::vector<double> poly_lo, poly_hi;
  // gaussian covariance, row-major d x d
  std::vector<double> cov;
  // mixture
  std::vector<double> weights;
  std::vector<GeneratorSpec> parts;

  double density(Point x) const;
  bool in_support(Point x) const;
  SupportHint support_hint() const;
  // Assumption-A style bounds for the density on support, restricted to the
  // centered ball of radius R; empty when not derivable.
  std::optional<std::pair<double, double>> assumption_a(double R) const;

  static GeneratorSpec uniform_ball(int d, std::vector<double> center, double r);
  static GeneratorSpec uniform_box(std::vector<double> lo, std::vector<double> hi);
  static GeneratorSpec uniform_polytope(std::vector<HalfSpace> hs,
                                        std::vector<double> lo,
                                        std::vector<double> hi);
  static GeneratorSpec gaussian(std::vector<double> mean, std::vector<double> cov);
  static GeneratorSpec spherical_uniform(int d);
  static GeneratorSpec mixture(std::vector<double> weights,
                               std::vector<GeneratorSpec> parts);
};

// Deterministic sample of n points; support_hint is populated.
Dataset generate(const GeneratorSpec& spec, int n, std::uint64_t seed);

// Bridges a generator to the support-recovery / ray sweeps. Compact kinds
// expose support and boundary samplers; others mark themselves unbounded.
SyntheticSource make_source(const GeneratorSpec& spec, std::uint64_t seed);

}  // namespace centerout
