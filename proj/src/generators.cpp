#include "centerout/generators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "centerout/errors.hpp"
#include "centerout/reference.hpp"
#include "centerout/rng.hpp"

namespace centerout {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// lower Cholesky factor of a row-major SPD matrix
std::vector<double> cholesky(const std::vector<double>& a, int d) {
  std::vector<double> l(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[static_cast<std::size_t>(i) * d + j];
      for (int k = 0; k < j; ++k)
        s -= l[static_cast<std::size_t>(i) * d + k] *
             l[static_cast<std::size_t>(j) * d + k];
      if (i == j) {
        if (!(s > 0.0))
          throw std::invalid_argument("gaussian: covariance not positive definite");
        l[static_cast<std::size_t>(i) * d + j] = std::sqrt(s);
      } else {
        l[static_cast<std::size_t>(i) * d + j] =
            s / l[static_cast<std::size_t>(j) * d + j];
      }
    }
  }
  return l;
}

// smallest eigenvalue of a small symmetric matrix, cyclic Jacobi
double eig_min_sym(std::vector<double> a, int d) {
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) off += std::abs(a[p * d + q]);
    if (off < 1e-14) break;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) {
        const double apq = a[p * d + q];
        if (std::abs(apq) < 1e-300) continue;
        const double theta = 0.5 * (a[q * d + q] - a[p * d + p]) / apq;
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < d; ++k) {
          const double akp = a[k * d + p], akq = a[k * d + q];
          a[k * d + p] = c * akp - s * akq;
          a[k * d + q] = s * akp + c * akq;
        }
        for (int k = 0; k < d; ++k) {
          const double apk = a[p * d + k], aqk = a[q * d + k];
          a[p * d + k] = c * apk - s * aqk;
          a[q * d + k] = s * apk + c * aqk;
        }
      }
  }
  double mn = a[0];
  for (int i = 1; i < d; ++i) mn = std::min(mn, a[i * d + i]);
  return mn;
}

bool satisfies(const std::vector<HalfSpace>& hs, Point x) {
  for (const auto& h : hs) {
    double s = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) s += h.normal[c] * x[c];
    if (s > h.offset + 1e-12) return false;
  }
  return true;
}

std::vector<HalfSpace> box_halfspaces(const std::vector<double>& lo,
                                      const std::vector<double>& hi) {
  const int d = static_cast<int>(lo.size());
  std::vector<HalfSpace> hs;
  for (int c = 0; c < d; ++c) {
    HalfSpace up, down;
    up.normal.assign(d, 0.0);
    up.normal[c] = 1.0;
    up.offset = hi[c];
    down.normal.assign(d, 0.0);
    down.normal[c] = -1.0;
    down.offset = -lo[c];
    hs.push_back(std::move(up));
    hs.push_back(std::move(down));
  }
  return hs;
}

// deterministic MC volume of a polytope inside its sampling box
double polytope_volume(const GeneratorSpec& spec) {
  const int d = spec.dim;
  Rng rng(derive_seed(0x706f6c79u, "polytope-volume"));
  const long trials = 400000;
  long hits = 0;
  std::vector<double> x(d);
  for (long t = 0; t < trials; ++t) {
    for (int c = 0; c < d; ++c)
      x[c] = rng.uniform(spec.poly_lo[c], spec.poly_hi[c]);
    if (satisfies(spec.halfspaces, Point(x))) ++hits;
  }
  double boxvol = 1.0;
  for (int c = 0; c < d; ++c) boxvol *= spec.poly_hi[c] - spec.poly_lo[c];
  const double vol = boxvol * static_cast<double>(hits) / trials;
  if (!(vol > 0.0)) throw std::invalid_argument("polytope: empty interior");
  return vol;
}

double gaussian_quadform(const GeneratorSpec& spec, Point x) {
  // (x-mu)' Sigma^{-1} (x-mu) via the Cholesky factor
  const int d = spec.dim;
  const std::vector<double> l = cholesky(spec.cov, d);
  std::vector<double> w(d);
  for (int i = 0; i < d; ++i) {
    double s = x[i] - spec.center[i];
    for (int k = 0; k < i; ++k) s -= l[static_cast<std::size_t>(i) * d + k] * w[k];
    w[i] = s / l[static_cast<std::size_t>(i) * d + i];
  }
  double q = 0.0;
  for (int i = 0; i < d; ++i) q += w[i] * w[i];
  return q;
}

double gaussian_norming(const GeneratorSpec& spec) {
  const int d = spec.dim;
  const std::vector<double> l = cholesky(spec.cov, d);
  double det_sqrt = 1.0;
  for (int i = 0; i < d; ++i) det_sqrt *= l[static_cast<std::size_t>(i) * d + i];
  return std::pow(kTwoPi, 0.5 * d) * det_sqrt;
}

}  // namespace

GeneratorSpec GeneratorSpec::uniform_ball(int d, std::vector<double> center,
                                          double r) {
  if (d < 1 || static_cast<int>(center.size()) != d || !(r > 0.0))
    throw std::invalid_argument("uniform_ball: bad parameters");
  GeneratorSpec s;
  s.kind = Kind::UniformBall;
  s.dim = d;
  s.center = std::move(center);
  s.radius = r;
  return s;
}

GeneratorSpec GeneratorSpec::uniform_box(std::vector<double> lo,
                                         std::vector<double> hi) {
  if (lo.empty() || lo.size() != hi.size())
    throw std::invalid_argument("uniform_box: corner mismatch");
  for (std::size_t c = 0; c < lo.size(); ++c)
    if (!(lo[c] < hi[c])) throw std::invalid_argument("uniform_box: empty box");
  GeneratorSpec s;
  s.kind = Kind::UniformBox;
  s.dim = static_cast<int>(lo.size());
  s.lo = std::move(lo);
  s.hi = std::move(hi);
  return s;
}

GeneratorSpec GeneratorSpec::uniform_polytope(std::vector<HalfSpace> hs,
                                              std::vector<double> lo,
                                              std::vector<double> hi) {
  if (hs.empty() || lo.empty() || lo.size() != hi.size())
    throw std::invalid_argument("uniform_polytope: bad parameters");
  GeneratorSpec s;
  s.kind = Kind::UniformPolytope;
  s.dim = static_cast<int>(lo.size());
  s.halfspaces = std::move(hs);
  s.poly_lo = std::move(lo);
  s.poly_hi = std::move(hi);
  for (const auto& h : s.halfspaces)
    if (static_cast<int>(h.normal.size()) != s.dim)
      throw std::invalid_argument("uniform_polytope: halfspace dimension");
  return s;
}

GeneratorSpec GeneratorSpec::gaussian(std::vector<double> mean,
                                      std::vector<double> cov) {
  GeneratorSpec s;
  s.kind = Kind::Gaussian;
  s.dim = static_cast<int>(mean.size());
  if (s.dim < 1 || cov.size() != static_cast<std::size_t>(s.dim) * s.dim)
    throw std::invalid_argument("gaussian: shape mismatch");
  s.center = std::move(mean);
  s.cov = std::move(cov);
  cholesky(s.cov, s.dim);  // validates SPD
  return s;
}

GeneratorSpec GeneratorSpec::spherical_uniform(int d) {
  if (d < 1) throw std::invalid_argument("spherical_uniform: d >= 1");
  GeneratorSpec s;
  s.kind = Kind::SphericalUniform;
  s.dim = d;
  return s;
}

GeneratorSpec GeneratorSpec::mixture(std::vector<double> weights,
                                     std::vector<GeneratorSpec> parts) {
  if (weights.empty() || weights.size() != parts.size())
    throw std::invalid_argument("mixture: weight/part mismatch");
  double tot = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("mixture: weights must be > 0");
    tot += w;
  }
  for (double& w : weights) w /= tot;
  const int d = parts.front().dim;
  for (const auto& p : parts) {
    if (p.dim != d) throw std::invalid_argument("mixture: dimension mismatch");
    if (p.kind == Kind::Mixture)
      throw std::invalid_argument("mixture: nesting not supported");
  }
  GeneratorSpec s;
  s.kind = Kind::Mixture;
  s.dim = d;
  s.weights = std::move(weights);
  s.parts = std::move(parts);
  return s;
}

double GeneratorSpec::density(Point x) const {
  switch (kind) {
    case Kind::UniformBall: {
      const double vol = ball_volume(dim) * std::pow(radius, dim);
      return dist(x, Point(center)) <= radius ? 1.0 / vol : 0.0;
    }
    case Kind::UniformBox: {
      double vol = 1.0;
      for (int c = 0; c < dim; ++c) {
        if (x[c] < lo[c] || x[c] > hi[c]) return 0.0;
        vol *= hi[c] - lo[c];
      }
      return 1.0 / vol;
    }
    case Kind::UniformPolytope: {
      if (!satisfies(halfspaces, x)) return 0.0;
      for (int c = 0; c < dim; ++c)
        if (x[c] < poly_lo[c] || x[c] > poly_hi[c]) return 0.0;
      return 1.0 / polytope_volume(*this);
    }
    case Kind::Gaussian:
      return std::exp(-0.5 * gaussian_quadform(*this, x)) /
             gaussian_norming(*this);
    case Kind::SphericalUniform:
      return spherical_uniform_density(x);
    case Kind::Mixture: {
      double s = 0.0;
      for (std::size_t i = 0; i < parts.size(); ++i)
        s += weights[i] * parts[i].density(x);
      return s;
    }
  }
  return 0.0;
}

bool GeneratorSpec::in_support(Point x) const {
  switch (kind) {
    case Kind::UniformBall:
      return dist(x, Point(center)) <= radius;
    case Kind::UniformBox:
      for (int c = 0; c < dim; ++c)
        if (x[c] < lo[c] || x[c] > hi[c]) return false;
      return true;
    case Kind::UniformPolytope:
      return satisfies(halfspaces, x);
    case Kind::Gaussian:
      return true;
    case Kind::SphericalUniform:
      return norm(x) <= 1.0;
    case Kind::Mixture:
      for (const auto& p : parts)
        if (p.in_support(x)) return true;
      return false;
  }
  return false;
}

SupportHint GeneratorSpec::support_hint() const {
  SupportHint hint;
  switch (kind) {
    case Kind::UniformBall: {
      std::vector<double> blo(dim), bhi(dim);
      for (int c = 0; c < dim; ++c) {
        blo[c] = center[c] - radius;
        bhi[c] = center[c] + radius;
      }
      hint.kind = SupportHint::Kind::HalfSpaces;
      hint.halfspaces = box_halfspaces(blo, bhi);
      break;
    }
    case Kind::UniformBox:
      hint.kind = SupportHint::Kind::HalfSpaces;
      hint.halfspaces = box_halfspaces(lo, hi);
      break;
    case Kind::UniformPolytope:
      hint.kind = SupportHint::Kind::HalfSpaces;
      hint.halfspaces = halfspaces;
      break;
    case Kind::Gaussian:
      hint.kind = SupportHint::Kind::Unbounded;
      break;
    case Kind::SphericalUniform: {
      std::vector<double> blo(dim, -1.0), bhi(dim, 1.0);
      hint.kind = SupportHint::Kind::HalfSpaces;
      hint.halfspaces = box_halfspaces(blo, bhi);
      break;
    }
    case Kind::Mixture:
      hint.kind = SupportHint::Kind::NonConvex;
      break;
  }
  return hint;
}

std::optional<std::pair<double, double>> GeneratorSpec::assumption_a(
    double R) const {
  switch (kind) {
    case Kind::UniformBall: {
      const double p0 = 1.0 / (ball_volume(dim) * std::pow(radius, dim));
      return std::make_pair(p0, p0);
    }
    case Kind::UniformBox: {
      double vol = 1.0;
      for (int c = 0; c < dim; ++c) vol *= hi[c] - lo[c];
      return std::make_pair(1.0 / vol, 1.0 / vol);
    }
    case Kind::UniformPolytope: {
      const double p0 = 1.0 / polytope_volume(*this);
      return std::make_pair(p0, p0);
    }
    case Kind::Gaussian: {
      const double z = gaussian_norming(*this);
      const double eig = eig_min_sym(cov, dim);
      const double reach = R + norm(Point(center));
      const double qmax = reach * reach / eig;
      return std::make_pair(std::exp(-0.5 * qmax) / z, 1.0 / z);
    }
    case Kind::SphericalUniform:
    case Kind::Mixture:
      return std::nullopt;  // unbounded density / union support
  }
  return std::nullopt;
}

Dataset generate(const GeneratorSpec& spec, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate: n >= 1");
  Dataset data;
  data.dim = spec.dim;
  data.support_hint = spec.support_hint();

  if (spec.kind == GeneratorSpec::Kind::SphericalUniform) {
    data.points = sample_spherical_uniform(n, spec.dim, seed);
    return data;
  }

  Rng rng(derive_seed(seed, "generate"));
  const int d = spec.dim;
  data.points.resize(static_cast<std::size_t>(n) * d);
  std::vector<double> x(d);
  for (int i = 0; i < n; ++i) {
    switch (spec.kind) {
      case GeneratorSpec::Kind::UniformBall: {
        const std::vector<double> s = rng.unit_vector(d);
        const double rho = spec.radius * std::pow(rng.uniform(), 1.0 / d);
        for (int c = 0; c < d; ++c) x[c] = spec.center[c] + rho * s[c];
        break;
      }
      case GeneratorSpec::Kind::UniformBox:
        for (int c = 0; c < d; ++c) x[c] = rng.uniform(spec.lo[c], spec.hi[c]);
        break;
      case GeneratorSpec::Kind::UniformPolytope: {
        long guard = 0;
        do {
          for (int c = 0; c < d; ++c)
            x[c] = rng.uniform(spec.poly_lo[c], spec.poly_hi[c]);
          if (++guard > 1000000)
            throw NumericError("generate: polytope rejection stalled");
        } while (!satisfies(spec.halfspaces, Point(x)));
        break;
      }
      case GeneratorSpec::Kind::Gaussian: {
        const std::vector<double> l = cholesky(spec.cov, d);
        std::vector<double> z(d);
        for (int c = 0; c < d; ++c) z[c] = rng.normal();
        for (int r = 0; r < d; ++r) {
          double s = spec.center[r];
          for (int c = 0; c <= r; ++c)
            s += l[static_cast<std::size_t>(r) * d + c] * z[c];
          x[r] = s;
        }
        break;
      }
      case GeneratorSpec::Kind::Mixture: {
        const double u = rng.uniform();
        double acc = 0.0;
        std::size_t pick = spec.parts.size() - 1;
        for (std::size_t k = 0; k < spec.weights.size(); ++k) {
          acc += spec.weights[k];
          if (u < acc) {
            pick = k;
            break;
          }
        }
        // one-point draw from the component, fed by this stream
        const Dataset sub = generate(spec.parts[pick], 1, rng.next());
        for (int c = 0; c < d; ++c) x[c] = sub.points[c];
        break;
      }
      case GeneratorSpec::Kind::SphericalUniform:
        break;  // handled above
    }
    for (int c = 0; c < d; ++c) data.points[static_cast<std::size_t>(i) * d + c] = x[c];
  }
  return data;
}

namespace {

// deterministic lattice covering a box, roughly m points
std::vector<double> box_lattice(const std::vector<double>& lo,
                                const std::vector<double>& hi, int m) {
  const int d = static_cast<int>(lo.size());
  const int per = std::max(2, static_cast<int>(std::round(std::pow(double(m), 1.0 / d))));
  std::vector<double> out;
  std::vector<int> idx(d, 0);
  while (true) {
    for (int c = 0; c < d; ++c)
      out.push_back(lo[c] + (hi[c] - lo[c]) * idx[c] / double(per - 1));
    int c = 0;
    for (; c < d; ++c) {
      if (++idx[c] < per) break;
      idx[c] = 0;
    }
    if (c == d) break;
  }
  return out;
}

std::vector<double> ball_cover(const std::vector<double>& center, double R,
                               int d, int m) {
  // concentric shells of directions plus the boundary shell
  const int shells = std::max(2, static_cast<int>(std::round(std::pow(double(m), 1.0 / d))));
  const int per_shell = std::max(8, m / shells);
  std::vector<double> out(center.begin(), center.end());
  for (int s = 1; s <= shells; ++s) {
    const double rho = R * s / shells;
    const std::vector<double> dirs = sphere_directions(per_shell, d, 0);
    for (int k = 0; k < per_shell; ++k)
      for (int c = 0; c < d; ++c) out.push_back(center[c] + rho * dirs[k * d + c]);
  }
  return out;
}

std::vector<double> sphere_cover(const std::vector<double>& center, double R,
                                 int d, int m) {
  const std::vector<double> dirs = sphere_directions(m, d, 0);
  std::vector<double> out;
  for (int k = 0; k < m; ++k)
    for (int c = 0; c < d; ++c) out.push_back(center[c] + R * dirs[k * d + c]);
  return out;
}

std::vector<double> box_boundary(const std::vector<double>& lo,
                                 const std::vector<double>& hi, int m) {
  const int d = static_cast<int>(lo.size());
  if (d == 1) return {lo[0], hi[0]};
  std::vector<double> out;
  const int faces = 2 * d;
  const int per_face = std::max(4, m / faces);
  for (int c = 0; c < d; ++c) {
    for (const double v : {lo[c], hi[c]}) {
      std::vector<double> flo, fhi;
      for (int c2 = 0; c2 < d; ++c2) {
        if (c2 == c) continue;
        flo.push_back(lo[c2]);
        fhi.push_back(hi[c2]);
      }
      const std::vector<double> face = box_lattice(flo, fhi, per_face);
      const int nf = static_cast<int>(face.size()) / (d - 1);
      for (int i = 0; i < nf; ++i) {
        int src = 0;
        for (int c2 = 0; c2 < d; ++c2)
          out.push_back(c2 == c ? v : face[i * (d - 1) + src++]);
      }
    }
  }
  return out;
}

}  // namespace

SyntheticSource make_source(const GeneratorSpec& spec, std::uint64_t seed) {
  SyntheticSource src;
  src.sample = [spec](int n, std::uint64_t s) { return generate(spec, n, s); };
  const SupportHint hint = spec.support_hint();
  src.convex = hint.kind != SupportHint::Kind::NonConvex;
  (void)seed;

  switch (spec.kind) {
    case GeneratorSpec::Kind::UniformBall: {
      src.compact = true;
      const auto c = spec.center;
      const double R = spec.radius;
      const int d = spec.dim;
      src.support_points = [c, R, d](int m) { return ball_cover(c, R, d, m); };
      src.boundary_points = [c, R, d](int m) { return sphere_cover(c, R, d, m); };
      break;
    }
    case GeneratorSpec::Kind::SphericalUniform: {
      src.compact = true;
      const std::vector<double> c(spec.dim, 0.0);
      const int d = spec.dim;
      src.support_points = [c, d](int m) { return ball_cover(c, 1.0, d, m); };
      src.boundary_points = [c, d](int m) { return sphere_cover(c, 1.0, d, m); };
      break;
    }
    case GeneratorSpec::Kind::UniformBox: {
      src.compact = true;
      const auto lo = spec.lo, hi = spec.hi;
      src.support_points = [lo, hi](int m) { return box_lattice(lo, hi, m); };
      src.boundary_points = [lo, hi](int m) { return box_boundary(lo, hi, m); };
      break;
    }
    case GeneratorSpec::Kind::UniformPolytope: {
      src.compact = true;
      const GeneratorSpec s2 = spec;
      src.support_points = [s2](int m) {
        const std::vector<double> lat = box_lattice(s2.poly_lo, s2.poly_hi, 4 * m);
        std::vector<double> out;
        const int nl = static_cast<int>(lat.size()) / s2.dim;
        for (int i = 0; i < nl; ++i) {
          const Point x = row(lat, s2.dim, i);
          if (satisfies(s2.halfspaces, x)) out.insert(out.end(), x.begin(), x.end());
        }
        return out;
      };
      // near-active lattice points stand in for the boundary
      src.boundary_points = [s2](int m) {
        const std::vector<double> lat = box_lattice(s2.poly_lo, s2.poly_hi, 8 * m);
        double diam = 0.0;
        for (int c = 0; c < s2.dim; ++c) diam += (s2.poly_hi[c] - s2.poly_lo[c]);
        const double eps = 0.02 * diam;
        std::vector<double> out;
        const int nl = static_cast<int>(lat.size()) / s2.dim;
        for (int i = 0; i < nl; ++i) {
          const Point x = row(lat, s2.dim, i);
          if (!satisfies(s2.halfspaces, x)) continue;
          for (const auto& h : s2.halfspaces) {
            double sl = h.offset;
            for (int c = 0; c < s2.dim; ++c) sl -= h.normal[c] * x[c];
            if (sl <= eps) {
              out.insert(out.end(), x.begin(), x.end());
              break;
            }
          }
        }
        return out;
      };
      break;
    }
    case GeneratorSpec::Kind::Gaussian:
      src.compact = false;
      break;
    case GeneratorSpec::Kind::Mixture: {
      src.compact = true;
      for (const auto& p : spec.parts)
        src.compact = src.compact && p.kind != GeneratorSpec::Kind::Gaussian;
      if (src.compact) {
        const GeneratorSpec s2 = spec;
        src.support_points = [s2](int m) {
          std::vector<double> out;
          for (const auto& p : s2.parts) {
            const auto sub = make_source(p, 0).support_points(
                std::max(64, m / static_cast<int>(s2.parts.size())));
            out.insert(out.end(), sub.begin(), sub.end());
          }
          return out;
        };
        src.boundary_points = [s2](int m) {
          std::vector<double> out;
          for (const auto& p : s2.parts) {
            const auto sub = make_source(p, 0).boundary_points(
                std::max(64, m / static_cast<int>(s2.parts.size())));
            out.insert(out.end(), sub.begin(), sub.end());
          }
          return out;
        };
      }
      break;
    }
  }
  return src;
}

}  // namespace centerout
