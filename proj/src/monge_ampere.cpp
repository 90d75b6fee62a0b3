#include "centerout/monge_ampere.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "centerout/errors.hpp"

namespace centerout {

namespace {

double pow_int(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

Moments moments(const std::vector<double>& vals) {
  const double n = static_cast<double>(vals.size());
  double m = 0.0;
  for (double v : vals) m += v;
  m /= n;
  double s2 = 0.0;
  for (double v : vals) s2 += (v - m) * (v - m);
  s2 = n > 1 ? s2 / (n - 1) : 0.0;
  return {m, std::sqrt(s2 / n)};
}

// axis-aligned bounding box of a region
void region_bbox(const Region& r, std::vector<double>& lo,
                 std::vector<double>& hi) {
  const int d = r.dim();
  lo.assign(d, 0.0);
  hi.assign(d, 0.0);
  switch (r.kind) {
    case Region::Kind::Ball:
      for (int c = 0; c < d; ++c) {
        lo[c] = r.center[c] - r.radius;
        hi[c] = r.center[c] + r.radius;
      }
      break;
    case Region::Kind::Box:
      lo = r.lo;
      hi = r.hi;
      break;
    case Region::Kind::Points: {
      const int m = static_cast<int>(r.pts.size()) / d;
      for (int c = 0; c < d; ++c) {
        lo[c] = r.pts[c];
        hi[c] = r.pts[c];
      }
      for (int i = 0; i < m; ++i)
        for (int c = 0; c < d; ++c) {
          lo[c] = std::min(lo[c], r.pts[i * d + c]);
          hi[c] = std::max(hi[c], r.pts[i * d + c]);
        }
      for (int c = 0; c < d; ++c) {
        lo[c] -= r.point_radius;
        hi[c] += r.point_radius;
      }
      break;
    }
  }
}

// true when the region's bounding box escapes the matched-point box
// inflated by 10% of its diagonal
bool outside_reliable_range(const Region& r, const Potentials& pot) {
  const int d = pot.dim();
  const auto& pts = pot.discrete.matched;
  const int n = static_cast<int>(pts.size()) / d;
  std::vector<double> lo(d, pts[0]), hi(d, pts[0]);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) {
      lo[c] = std::min(lo[c], pts[i * d + c]);
      hi[c] = std::max(hi[c], pts[i * d + c]);
    }
  double diag = 0.0;
  for (int c = 0; c < d; ++c) diag += (hi[c] - lo[c]) * (hi[c] - lo[c]);
  const double pad = 0.1 * std::sqrt(diag);
  std::vector<double> rlo, rhi;
  region_bbox(r, rlo, rhi);
  for (int c = 0; c < d; ++c)
    if (rlo[c] < lo[c] - pad || rhi[c] > hi[c] + pad) return true;
  return false;
}

// accept u when some achieving slope of the extension lies in A
bool gradient_hits(const Potentials& pot, Point u, const Region& A) {
  const MapValue mv = pot.extended.gradient(u);
  if (!mv.multiple) return A.contains(Point(mv.point));
  const int d = pot.dim();
  for (const int b : mv.achievers) {
    const Point y(pot.extended.slope.data() + static_cast<std::size_t>(b) * d,
                  static_cast<std::size_t>(d));
    if (A.contains(y)) return true;
  }
  return false;
}

// accept x when some achieving atom of the Legendre max lies in B
bool atom_hits(const Potentials& pot, Point x, const Region& B) {
  std::vector<int> ach;
  legendre_transform(pot, x, &ach);
  for (const int j : ach)
    if (B.contains(pot.grid().atom(j))) return true;
  return false;
}

}  // namespace

Region Region::ball(std::vector<double> center, double r, double r_inner) {
  if (!(r > 0.0) || r_inner < 0.0 || r_inner >= r)
    throw std::invalid_argument("region: need 0 <= inner < outer radius");
  Region out;
  out.kind = Kind::Ball;
  out.center = std::move(center);
  out.radius = r;
  out.inner_radius = r_inner;
  return out;
}

Region Region::box(std::vector<double> lo, std::vector<double> hi) {
  if (lo.size() != hi.size() || lo.empty())
    throw std::invalid_argument("region: box corner mismatch");
  for (std::size_t c = 0; c < lo.size(); ++c)
    if (!(lo[c] < hi[c])) throw std::invalid_argument("region: empty box");
  Region out;
  out.kind = Kind::Box;
  out.lo = std::move(lo);
  out.hi = std::move(hi);
  return out;
}

Region Region::point_set(std::vector<double> pts, int dim, double r) {
  if (dim < 1 || pts.empty() || pts.size() % static_cast<std::size_t>(dim) != 0)
    throw std::invalid_argument("region: point buffer shape mismatch");
  if (r < 0.0) throw std::invalid_argument("region: negative radius");
  Region out;
  out.kind = Kind::Points;
  out.pts = std::move(pts);
  out.point_radius = r;
  out.lo.assign(dim, 0.0);  // records dim for point sets
  out.hi.assign(dim, 1.0);
  if (r > 0.0) {
    const int m = static_cast<int>(out.pts.size()) / dim;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (dist(row(out.pts, dim, i), row(out.pts, dim, j)) < 2.0 * r)
          throw std::invalid_argument("region: thickened points must be disjoint");
  }
  return out;
}

int Region::dim() const {
  switch (kind) {
    case Kind::Ball:
      return static_cast<int>(center.size());
    case Kind::Box:
    case Kind::Points:
      return static_cast<int>(lo.size());
  }
  return 0;
}

bool Region::contains(Point x) const {
  const int d = dim();
  switch (kind) {
    case Kind::Ball: {
      const double dd = dist(x, Point(center));
      return dd >= inner_radius && dd <= radius;
    }
    case Kind::Box:
      for (int c = 0; c < d; ++c)
        if (x[c] < lo[c] || x[c] > hi[c]) return false;
      return true;
    case Kind::Points: {
      const int m = static_cast<int>(pts.size()) / d;
      for (int i = 0; i < m; ++i)
        if (dist(x, row(pts, d, i)) <= point_radius) return true;
      return false;
    }
  }
  return false;
}

double Region::volume() const {
  const int d = dim();
  switch (kind) {
    case Kind::Ball:
      return ball_volume(d) * (pow_int(radius, d) - pow_int(inner_radius, d));
    case Kind::Box: {
      double v = 1.0;
      for (int c = 0; c < d; ++c) v *= hi[c] - lo[c];
      return v;
    }
    case Kind::Points: {
      if (point_radius == 0.0) return 0.0;
      const int m = static_cast<int>(pts.size()) / d;
      return m * ball_volume(d) * pow_int(point_radius, d);  // balls disjoint
    }
  }
  return 0.0;
}

double Region::surface() const {
  const int d = dim();
  switch (kind) {
    case Kind::Ball:
      return sphere_area(d) * (pow_int(radius, d - 1) +
                               (inner_radius > 0.0 ? pow_int(inner_radius, d - 1) : 0.0));
    case Kind::Box: {
      double s = 0.0;
      for (int c = 0; c < d; ++c) {
        double face = 1.0;
        for (int c2 = 0; c2 < d; ++c2)
          if (c2 != c) face *= hi[c2] - lo[c2];
        s += 2.0 * face;
      }
      return s;
    }
    case Kind::Points: {
      if (point_radius == 0.0) return 0.0;
      const int m = static_cast<int>(pts.size()) / d;
      return m * sphere_area(d) * pow_int(point_radius, d - 1);
    }
  }
  return 0.0;
}

double Region::distance_to_origin() const {
  const int d = dim();
  switch (kind) {
    case Kind::Ball: {
      const double c = norm(Point(center));
      return std::max({0.0, c - radius, inner_radius - c});
    }
    case Kind::Box: {
      double s = 0.0;
      for (int c = 0; c < d; ++c) {
        const double t = std::max({lo[c], -hi[c], 0.0});
        s += t * t;
      }
      return std::sqrt(s);
    }
    case Kind::Points: {
      const int m = static_cast<int>(pts.size()) / d;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) best = std::min(best, norm(row(pts, d, i)));
      return std::max(0.0, best - point_radius);
    }
  }
  return 0.0;
}

double Region::max_norm() const {
  const int d = dim();
  switch (kind) {
    case Kind::Ball:
      return norm(Point(center)) + radius;
    case Kind::Box: {
      double s = 0.0;
      for (int c = 0; c < d; ++c) {
        const double t = std::max(std::abs(lo[c]), std::abs(hi[c]));
        s += t * t;
      }
      return std::sqrt(s);
    }
    case Kind::Points: {
      const int m = static_cast<int>(pts.size()) / d;
      double best = 0.0;
      for (int i = 0; i < m; ++i) best = std::max(best, norm(row(pts, d, i)));
      return best + point_radius;
    }
  }
  return 0.0;
}

std::vector<double> Region::sample(Rng& rng) const {
  const int d = dim();
  std::vector<double> x(d);
  switch (kind) {
    case Kind::Ball: {
      const std::vector<double> s = rng.unit_vector(d);
      const double u = rng.uniform();
      const double rho = std::pow(
          pow_int(inner_radius, d) +
              u * (pow_int(radius, d) - pow_int(inner_radius, d)),
          1.0 / d);
      for (int c = 0; c < d; ++c) x[c] = center[c] + rho * s[c];
      return x;
    }
    case Kind::Box:
      for (int c = 0; c < d; ++c) x[c] = rng.uniform(lo[c], hi[c]);
      return x;
    case Kind::Points: {
      const int m = static_cast<int>(pts.size()) / d;
      const int i = static_cast<int>(rng.uniform_index(m));
      const std::vector<double> s = rng.unit_vector(d);
      const double rho = point_radius * std::pow(rng.uniform(), 1.0 / d);
      for (int c = 0; c < d; ++c) x[c] = pts[i * d + c] + rho * s[c];
      return x;
    }
  }
  return x;
}

MAEstimate ma_forward_density(const Region& A, const DensityFn& p,
                              const Potentials& pot, long n_mc,
                              std::uint64_t seed) {
  if (n_mc < 2) throw std::invalid_argument("ma_forward_density: n_mc >= 2");
  const int d = pot.dim();
  if (A.dim() != d)
    throw std::invalid_argument("ma_forward_density: dimension mismatch");
  const double a_d = sphere_area(d);
  MAEstimate est;
  est.region = A;
  est.n_mc = n_mc;
  est.method = "direct";
  est.warning = outside_reliable_range(A, pot);

  Rng rng(derive_seed(seed, "ma-forward"));
  const double vol = A.volume();
  if (vol > 0.0) {
    std::vector<double> vals(n_mc);
    for (long t = 0; t < n_mc; ++t) {
      const std::vector<double> x = A.sample(rng);
      const MapValue f = distribution_map(pot, Point(x));
      vals[t] = a_d * p(Point(x)) * pow_int(norm(Point(f.point)), d - 1);
    }
    const Moments m = moments(vals);
    est.value_formula = vol * m.mean;
    est.se_formula = vol * m.se;
  }

  // rejection over the ball: Lebesgue-uniform u, accept when the gradient
  // of the extension lands in A
  Rng rng2(derive_seed(seed, "ma-forward-subdiff"));
  const double c_d = ball_volume(d);
  long hits = 0;
  for (long t = 0; t < n_mc; ++t) {
    const std::vector<double> s = rng2.unit_vector(d);
    const double rho = std::pow(rng2.uniform(), 1.0 / d);
    std::vector<double> u(d);
    for (int c = 0; c < d; ++c) u[c] = rho * s[c];
    if (gradient_hits(pot, Point(u), A)) ++hits;
  }
  const double rate = static_cast<double>(hits) / n_mc;
  est.value_subdiff = c_d * rate;
  est.se_subdiff = c_d * std::sqrt(std::max(0.0, rate * (1.0 - rate) / n_mc));
  return est;
}

MAEstimate ma_backward_density(const Region& B, const DensityFn& p,
                               const Potentials& pot, long n_mc,
                               std::uint64_t seed, bool allow_singular) {
  if (n_mc < 2) throw std::invalid_argument("ma_backward_density: n_mc >= 2");
  const int d = pot.dim();
  if (B.dim() != d)
    throw std::invalid_argument("ma_backward_density: dimension mismatch");
  if (B.max_norm() > 1.0 + 1e-12)
    throw std::invalid_argument("ma_backward_density: region must lie in the unit ball");
  const bool touches_origin = B.distance_to_origin() <= 0.0;
  if (touches_origin && !allow_singular)
    throw std::invalid_argument(
        "ma_backward_density: region touches the origin; pass allow_singular");

  const double a_d = sphere_area(d);
  MAEstimate est;
  est.region = B;
  est.n_mc = n_mc;

  Rng rng(derive_seed(seed, "ma-backward"));
  std::vector<double> vals(n_mc);
  auto q_density = [&](Point y) {
    const MapValue q = pot.extended.gradient(y);
    const double pq = p(Point(q.point));
    if (!(pq > 0.0))
      throw NumericError("ma_backward_density: target density vanishes at a transported point");
    return pq;
  };
  if (touches_origin) {
    // radial substitution: drawing y from the reference measure itself
    // cancels the |y|^{1-d} weight exactly
    est.method = "radial";
    for (long t = 0; t < n_mc; ++t) {
      const std::vector<double> s = rng.unit_vector(d);
      const double rho = rng.uniform();
      std::vector<double> y(d);
      for (int c = 0; c < d; ++c) y[c] = rho * s[c];
      vals[t] = B.contains(Point(y)) ? 1.0 / q_density(Point(y)) : 0.0;
    }
    const Moments m = moments(vals);
    est.value_formula = m.mean;
    est.se_formula = m.se;
  } else {
    est.method = "direct";
    const double vol = B.volume();
    if (vol > 0.0) {
      for (long t = 0; t < n_mc; ++t) {
        const std::vector<double> y = B.sample(rng);
        const double r = norm(Point(y));
        vals[t] = 1.0 / (a_d * q_density(Point(y)) * pow_int(r, d - 1));
      }
      const Moments m = moments(vals);
      est.value_formula = vol * m.mean;
      est.se_formula = vol * m.se;
    }
  }

  // rejection over the data box: accept x when an achieving atom is in B
  const auto& mp = pot.discrete.matched;
  const int n = static_cast<int>(mp.size()) / d;
  std::vector<double> lo(d, mp[0]), hi(d, mp[0]);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) {
      lo[c] = std::min(lo[c], mp[i * d + c]);
      hi[c] = std::max(hi[c], mp[i * d + c]);
    }
  double boxvol = 1.0;
  for (int c = 0; c < d; ++c) {
    const double pad = 0.05 * (hi[c] - lo[c]) + 1e-12;
    lo[c] -= pad;
    hi[c] += pad;
    boxvol *= hi[c] - lo[c];
  }
  Rng rng2(derive_seed(seed, "ma-backward-subdiff"));
  long hits = 0;
  std::vector<double> x(d);
  for (long t = 0; t < n_mc; ++t) {
    for (int c = 0; c < d; ++c) x[c] = rng2.uniform(lo[c], hi[c]);
    if (atom_hits(pot, Point(x), B)) ++hits;
  }
  const double rate = static_cast<double>(hits) / n_mc;
  est.value_subdiff = boxvol * rate;
  est.se_subdiff =
      boxvol * std::sqrt(std::max(0.0, rate * (1.0 - rate) / n_mc));
  return est;
}

namespace {

double inscribed_radius(const Region& M, Point center) {
  switch (M.kind) {
    case Region::Kind::Ball: {
      const double dd = dist(center, Point(M.center));
      double room = M.radius - dd;
      if (M.inner_radius > 0.0) room = std::min(room, dd - M.inner_radius);
      return room;
    }
    case Region::Kind::Box: {
      double room = std::numeric_limits<double>::infinity();
      for (int c = 0; c < M.dim(); ++c)
        room = std::min({room, center[c] - M.lo[c], M.hi[c] - center[c]});
      return room;
    }
    case Region::Kind::Points:
      return M.point_radius;
  }
  return 0.0;
}

}  // namespace

BoundReport volume_growth_bounds(
    const Region& M, const Potentials& pot, const DensityFn& p, int trials,
    long n_mc_per_trial, std::uint64_t seed,
    const std::function<std::pair<double, double>(double)>& assumption_a) {
  if (trials < 1) throw std::invalid_argument("volume_growth_bounds: trials >= 1");
  if (!(M.distance_to_origin() > 0.0) || !(M.max_norm() < 1.0))
    throw std::invalid_argument(
        "volume_growth_bounds: M must avoid the origin and the boundary sphere");
  const int d = pot.dim();
  Rng rng(derive_seed(seed, "bounds-regions"));

  BoundReport rep;
  rep.trials = trials;
  rep.alpha_hat = std::numeric_limits<double>::infinity();
  rep.A_hat = 0.0;

  // empirical enclosing radius of the gradient image over M
  for (int t = 0; t < 256; ++t) {
    const std::vector<double> y = M.sample(rng);
    const MapValue q = pot.extended.gradient(Point(y));
    rep.enclosing_radius = std::max(rep.enclosing_radius, norm(Point(q.point)));
  }

  for (int t = 0; t < trials; ++t) {
    std::vector<double> c;
    double room = 0.0;
    do {
      c = M.sample(rng);
      room = inscribed_radius(M, Point(c));
    } while (!(room > 1e-6));
    const double rad = room * (0.2 + 0.7 * rng.uniform());
    const Region A = Region::ball(c, rad);
    const MAEstimate mu = ma_backward_density(
        A, p, pot, n_mc_per_trial, derive_seed(seed, "bounds-trial-" + std::to_string(t)));
    const double vol = A.volume();
    rep.alpha_hat = std::min(rep.alpha_hat, mu.value_formula / vol);
    rep.A_hat =
        std::max(rep.A_hat, mu.value_formula / std::pow(vol, 1.0 / d));
  }
  if (assumption_a) {
    const auto [lam, Lam] = assumption_a(rep.enclosing_radius);
    rep.alpha_candidate = 1.0 / (sphere_area(d) * Lam);
    rep.A_candidate = 1.0 / (lam * std::pow(ball_volume(d), 1.0 / d));
  }
  rep.all_hold = rep.alpha_hat >= 0.0;
  return rep;
}

BoundaryAvoidanceReport boundary_avoidance_check(
    const Potentials& pot, const std::vector<double>& interior_points) {
  const int d = pot.dim();
  if (interior_points.empty() ||
      interior_points.size() % static_cast<std::size_t>(d) != 0)
    throw std::invalid_argument("boundary_avoidance_check: bad point buffer");
  BoundaryAvoidanceReport rep;
  rep.bound = pot.grid().max_radius();
  const int m = static_cast<int>(interior_points.size()) / d;
  for (int i = 0; i < m; ++i) {
    const MapValue f = distribution_map(pot, row(interior_points, d, i));
    rep.max_norm = std::max(rep.max_norm, norm(Point(f.point)));
  }
  rep.pass = rep.max_norm <= rep.bound + 1e-12;
  return rep;
}

PushforwardCheck pushforward_count(const Potentials& pot, const Dataset& data,
                                   const Region& A) {
  if (!pot.exact)
    throw UnsupportedPlanKind("pushforward_count: exact plans only");
  PushforwardCheck out;
  std::set<int> atoms;
  for (int i = 0; i < data.size(); ++i) {
    if (!A.contains(data.point(i))) continue;
    ++out.samples_in_region;
    atoms.insert(pot.assignment[i]);
  }
  out.image_atoms = static_cast<long>(atoms.size());
  out.exact = out.image_atoms == out.samples_in_region;
  return out;
}

}  // namespace centerout
