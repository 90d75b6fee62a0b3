#include "centerout/reference.hpp"

#include <cmath>
#include <stdexcept>

#include "centerout/quadrature.hpp"
#include "centerout/rng.hpp"

namespace centerout {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// Acklam-style rational approximation of the standard normal quantile,
// accurate to ~1e-9. Only used to spread lattice points over the sphere
// for d >= 4, so this accuracy is far more than needed.
double normal_quantile(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1.0 - plow;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  }
  if (p > phigh) {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
             c[5]) /
           ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
         q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Haar-distributed rotation from a seed (QR of a Gaussian matrix with the
// usual sign fix), row-major d x d.
std::vector<double> random_rotation(int d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> q(d * d);
  for (double& v : q) v = rng.normal();
  // Gram-Schmidt on columns.
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < j; ++k) {
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += q[i * d + j] * q[i * d + k];
      for (int i = 0; i < d; ++i) q[i * d + j] -= s * q[i * d + k];
    }
    double n2 = 0.0;
    for (int i = 0; i < d; ++i) n2 += q[i * d + j] * q[i * d + j];
    const double inv = 1.0 / std::sqrt(n2);
    for (int i = 0; i < d; ++i) q[i * d + j] *= inv;
  }
  return q;
}

void apply_rotation(const std::vector<double>& q, int d,
                    std::vector<double>& pts) {
  const int n = static_cast<int>(pts.size()) / d;
  std::vector<double> tmp(d);
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < d; ++r) {
      double s = 0.0;
      for (int c = 0; c < d; ++c) s += q[r * d + c] * pts[i * d + c];
      tmp[r] = s;
    }
    for (int r = 0; r < d; ++r) pts[i * d + r] = tmp[r];
  }
}

void normalize_rows(std::vector<double>& pts, int d) {
  const int n = static_cast<int>(pts.size()) / d;
  for (int i = 0; i < n; ++i) {
    double n2 = 0.0;
    for (int k = 0; k < d; ++k) n2 += pts[i * d + k] * pts[i * d + k];
    const double inv = 1.0 / std::sqrt(n2);
    for (int k = 0; k < d; ++k) pts[i * d + k] *= inv;
  }
}

}  // namespace

double sphere_area(int d) {
  if (d < 1) throw std::invalid_argument("sphere_area: d must be >= 1");
  return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

double ball_volume(int d) {
  if (d < 1) throw std::invalid_argument("ball_volume: d must be >= 1");
  return std::pow(kPi, 0.5 * d) / std::tgamma(1.0 + 0.5 * d);
}

ReferenceConstants reference_constants(int d) {
  return ReferenceConstants{d, sphere_area(d), ball_volume(d)};
}

double spherical_uniform_density(Point x) {
  const int d = static_cast<int>(x.size());
  const double r = norm(x);
  if (r <= 0.0 || r >= 1.0) return 0.0;
  return 1.0 / (sphere_area(d) * std::pow(r, d - 1));
}

std::vector<double> sample_spherical_uniform(int n, int d,
                                             std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_spherical_uniform: n >= 1");
  if (d < 1) throw std::invalid_argument("sample_spherical_uniform: d >= 1");
  Rng rng(seed);
  std::vector<double> pts(static_cast<std::size_t>(n) * d);
  for (int i = 0; i < n; ++i) {
    const std::vector<double> s = rng.unit_vector(d);
    const double r = rng.uniform();
    for (int k = 0; k < d; ++k) pts[i * d + k] = r * s[k];
  }
  return pts;
}

std::vector<double> sphere_directions(int n_S, int d, std::uint64_t seed) {
  if (n_S < 1) throw std::invalid_argument("sphere_directions: n_S >= 1");
  if (d < 1) throw std::invalid_argument("sphere_directions: d >= 1");
  std::vector<double> dirs(static_cast<std::size_t>(n_S) * d, 0.0);
  if (d == 1) {
    if (n_S > 2)
      throw std::invalid_argument(
          "sphere_directions: at most 2 distinct directions exist for d=1");
    dirs[0] = 1.0;
    if (n_S == 2) dirs[1] = -1.0;
    return dirs;
  }
  if (d == 2) {
    // Equiangular; deterministic, no seed involvement.
    for (int k = 0; k < n_S; ++k) {
      const double a = 2.0 * kPi * k / n_S;
      dirs[k * 2 + 0] = std::cos(a);
      dirs[k * 2 + 1] = std::sin(a);
    }
    return dirs;
  }
  if (d == 3) {
    // Golden-section spiral, offset half a band from the poles.
    const double ga = kPi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < n_S; ++k) {
      const double z = 1.0 - (2.0 * k + 1.0) / n_S;
      const double rr = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double th = ga * k;
      dirs[k * 3 + 0] = rr * std::cos(th);
      dirs[k * 3 + 1] = rr * std::sin(th);
      dirs[k * 3 + 2] = z;
    }
  } else {
    // Kronecker lattice pushed through the normal quantile per coordinate,
    // then radially projected. Directions stay well spread for moderate n_S.
    // Generalized golden-ratio increments (Roberts' R_d construction).
    double phi = 1.0;
    for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / (d + 1));
    std::vector<double> alpha(d);
    double p = 1.0 / phi;
    for (int k = 0; k < d; ++k) {
      alpha[k] = p;
      p /= phi;
    }
    for (int k = 0; k < n_S; ++k) {
      for (int c = 0; c < d; ++c) {
        double u = std::fmod(0.5 + (k + 1.0) * alpha[c], 1.0);
        u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
        dirs[k * d + c] = normal_quantile(u);
      }
    }
    normalize_rows(dirs, d);
  }
  // Seeded rotation for d >= 3 keeps the layout but decorrelates it from
  // the coordinate axes.
  const std::vector<double> q = random_rotation(d, derive_seed(seed, "grid-rotation"));
  apply_rotation(q, d, dirs);
  normalize_rows(dirs, d);
  return dirs;
}

SphericalGrid build_grid(int n, int d, int n_R, int n_S, std::uint64_t seed) {
  if (n < 1 || d < 1 || n_R < 1 || n_S < 1)
    throw std::invalid_argument("build_grid: n, d, n_R, n_S must be >= 1");
  const long long shell_total = 1LL * n_R * n_S;
  if (shell_total > n)
    throw std::invalid_argument("build_grid: n_R * n_S exceeds n");
  const long long n0 = n - shell_total;
  if (n0 >= n_S)
    throw std::invalid_argument(
        "build_grid: remainder n - n_R*n_S must be smaller than n_S");

  SphericalGrid g;
  g.dim = d;
  g.origin_copies = static_cast<int>(n0);
  g.radii.resize(n_R);
  for (int i = 0; i < n_R; ++i) g.radii[i] = (i + 1.0) / (n_R + 1.0);
  g.directions = sphere_directions(n_S, d, seed);

  g.atoms.assign(static_cast<std::size_t>(n) * d, 0.0);
  g.radius_index.assign(n, -1);
  g.direction_index.assign(n, -1);
  int a = 0;
  for (int i = 0; i < n_R; ++i) {
    for (int k = 0; k < n_S; ++k, ++a) {
      for (int c = 0; c < d; ++c)
        g.atoms[a * d + c] = g.radii[i] * g.directions[k * d + c];
      g.radius_index[a] = i;
      g.direction_index[a] = k;
    }
  }
  // remaining atoms stay at the origin with index tags -1
  return g;
}

double coarea_radial_integral(double r, int d) {
  if (!(r > 0.0 && r <= 1.0))
    throw std::invalid_argument("coarea_radial_integral: r must be in (0,1]");
  if (d < 1) throw std::invalid_argument("coarea_radial_integral: d >= 1");
  if (d > 4)
    throw std::invalid_argument("coarea_radial_integral: quadrature is d <= 4");
  const int n_rad = d >= 4 ? 24 : 48;
  const int n_ang = d >= 4 ? 32 : 64;
  return ball_integral(
      d, r,
      [d](Point y) {
        const double rho = norm(y);
        return std::pow(rho, 1.0 - d);
      },
      n_rad, n_ang);
}

}  // namespace centerout
