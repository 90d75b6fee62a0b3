#pragma once

#include <functional>
#include <vector>

#include "centerout/geometry.hpp"

namespace centerout {

// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights);

// Tensor-product quadrature of f over the ball r*B_d in spherical
// coordinates, d in 1..4. The Jacobian rho^{d-1} * prod sin^k is applied
// numerically; nothing is reduced in closed form.
double ball_integral(int d, double r, const std::function<double(Point)>& f,
                     int n_radial = 48, int n_angular = 64);

}  // namespace centerout
