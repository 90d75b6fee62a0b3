#include "centerout/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace centerout {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Newton iteration on P_n from the Chebyshev initial guess.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    nodes[i] = 0.5 * (b - a) * (-x) + 0.5 * (a + b);
    nodes[n - 1 - i] = 0.5 * (b - a) * x + 0.5 * (a + b);
    weights[i] = 0.5 * (b - a) * w;
    weights[n - 1 - i] = weights[i];
  }
}

double ball_integral(int d, double r, const std::function<double(Point)>& f,
                     int n_radial, int n_angular) {
  if (d < 1 || d > 4)
    throw std::invalid_argument("ball_integral: d must be in 1..4");
  if (!(r > 0.0)) throw std::invalid_argument("ball_integral: r must be > 0");

  std::vector<double> rn, rw;
  gauss_legendre(n_radial, 0.0, r, rn, rw);

  if (d == 1) {
    double total = 0.0;
    for (int i = 0; i < n_radial; ++i) {
      for (double s : {-1.0, 1.0}) {
        const double y = rn[i] * s;
        total += rw[i] * f(Point(&y, 1));
      }
    }
    return total;
  }

  std::vector<double> tn, tw;  // azimuth on [0, 2pi)
  gauss_legendre(n_angular, 0.0, 2.0 * kPi, tn, tw);
  std::vector<double> pn, pw;  // polar angles on [0, pi]
  gauss_legendre(n_angular, 0.0, kPi, pn, pw);

  double total = 0.0;
  if (d == 2) {
    double y[2];
    for (int i = 0; i < n_radial; ++i) {
      const double rho = rn[i];
      const double jr = rw[i] * rho;
      for (int a = 0; a < n_angular; ++a) {
        y[0] = rho * std::cos(tn[a]);
        y[1] = rho * std::sin(tn[a]);
        total += jr * tw[a] * f(Point(y, 2));
      }
    }
  } else if (d == 3) {
    double y[3];
    for (int i = 0; i < n_radial; ++i) {
      const double rho = rn[i];
      const double jr = rw[i] * rho * rho;
      for (int a = 0; a < n_angular; ++a) {
        const double sp = std::sin(pn[a]), cp = std::cos(pn[a]);
        const double ja = jr * pw[a] * sp;
        for (int b = 0; b < n_angular; ++b) {
          y[0] = rho * cp;
          y[1] = rho * sp * std::cos(tn[b]);
          y[2] = rho * sp * std::sin(tn[b]);
          total += ja * tw[b] * f(Point(y, 3));
        }
      }
    }
  } else {  // d == 4
    double y[4];
    for (int i = 0; i < n_radial; ++i) {
      const double rho = rn[i];
      const double jr = rw[i] * rho * rho * rho;
      for (int a = 0; a < n_angular; ++a) {
        const double s1 = std::sin(pn[a]), c1 = std::cos(pn[a]);
        const double j1 = jr * pw[a] * s1 * s1;
        for (int b = 0; b < n_angular; ++b) {
          const double s2 = std::sin(pn[b]), c2 = std::cos(pn[b]);
          const double j2 = j1 * pw[b] * s2;
          for (int c = 0; c < n_angular; ++c) {
            y[0] = rho * c1;
            y[1] = rho * s1 * c2;
            y[2] = rho * s1 * s2 * std::cos(tn[c]);
            y[3] = rho * s1 * s2 * std::sin(tn[c]);
            total += j2 * tw[c] * f(Point(y, 4));
          }
        }
      }
    }
  }
  return total;
}

}  // namespace centerout
