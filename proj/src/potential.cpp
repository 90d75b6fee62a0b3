#include "centerout/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "centerout/errors.hpp"

namespace centerout {

namespace {

// Ties in the defining max are collected inside this band.
double tie_tol(double max_val) { return 1e-10 * (1.0 + std::abs(max_val)); }

// Full-scan threshold for the Legendre evaluation; larger grids go through
// the direction-bucketed exact pruning.
constexpr int kFullScanLimit = 10000;

}  // namespace

double DiscretePotential::consistency_residual() const {
  const auto& g = *grid;
  const int n = g.size();
  const int d = g.dim;
  double worst = 0.0;
  for (int b = 0; b < n; ++b) {
    const Point yb(matched.data() + static_cast<std::size_t>(b) * d,
                   static_cast<std::size_t>(d));
    const Point ub = g.atom(b);
    for (int k = 0; k < n; ++k) {
      const Point uk = g.atom(k);
      double line = psi[b];
      for (int c = 0; c < d; ++c) line += yb[c] * (uk[c] - ub[c]);
      worst = std::max(worst, line - psi[k]);
    }
  }
  return worst;
}

double ExtendedPotential::value(Point z) const {
  const int n = size();
  double best = -std::numeric_limits<double>::infinity();
  for (int b = 0; b < n; ++b) {
    double v = intercept[b];
    const double* ub = base.data() + static_cast<std::size_t>(b) * dim;
    const double* yb = slope.data() + static_cast<std::size_t>(b) * dim;
    for (int c = 0; c < dim; ++c) v += yb[c] * (z[c] - ub[c]);
    best = std::max(best, v);
  }
  return best;
}

MapValue ExtendedPotential::gradient(Point z) const {
  const int n = size();
  std::vector<double> vals(n);
  double best = -std::numeric_limits<double>::infinity();
  for (int b = 0; b < n; ++b) {
    double v = intercept[b];
    const double* ub = base.data() + static_cast<std::size_t>(b) * dim;
    const double* yb = slope.data() + static_cast<std::size_t>(b) * dim;
    for (int c = 0; c < dim; ++c) v += yb[c] * (z[c] - ub[c]);
    vals[b] = v;
    best = std::max(best, v);
  }
  const double tol = tie_tol(best);
  MapValue out;
  out.point.assign(dim, 0.0);
  for (int b = 0; b < n; ++b) {
    if (vals[b] >= best - tol) {
      out.achievers.push_back(b);
      const double* yb = slope.data() + static_cast<std::size_t>(b) * dim;
      for (int c = 0; c < dim; ++c) out.point[c] += yb[c];
    }
  }
  const double inv = 1.0 / out.achievers.size();
  for (int c = 0; c < dim; ++c) out.point[c] *= inv;
  out.multiple = out.achievers.size() > 1;
  return out;
}

Potentials build_potentials(const TransportPlan& plan, const Dataset& data,
                            const SphericalGrid& grid) {
  validate(data);
  const int n = grid.size();
  const int d = grid.dim;
  if (data.size() != n || data.dim != d)
    throw std::invalid_argument("build_potentials: plan/grid/data mismatch");
  if (static_cast<int>(plan.g.size()) != n)
    throw std::invalid_argument("build_potentials: dual vector size mismatch");

  Potentials p;
  p.exact = plan.kind == TransportPlan::Kind::ExactPermutation;
  p.discrete.grid = std::make_shared<SphericalGrid>(grid);
  p.discrete.psi.resize(n);
  p.discrete.matched.assign(static_cast<std::size_t>(n) * d, 0.0);

  for (int j = 0; j < n; ++j)
    p.discrete.psi[j] = 0.5 * (norm2(grid.atom(j)) - plan.g[j]);

  if (p.exact) {
    if (static_cast<int>(plan.assignment.size()) != n)
      throw std::invalid_argument("build_potentials: assignment size mismatch");
    p.assignment = plan.assignment;
    for (int i = 0; i < n; ++i) {
      const int j = plan.assignment[i];
      for (int c = 0; c < d; ++c)
        p.discrete.matched[static_cast<std::size_t>(j) * d + c] =
            data.points[static_cast<std::size_t>(i) * d + c];
    }
  } else {
    // barycentric subgradient representatives
    if (plan.coupling.size() != static_cast<std::size_t>(n) * n)
      throw std::invalid_argument("build_potentials: coupling size mismatch");
    for (int j = 0; j < n; ++j) {
      double mass = 0.0;
      for (int i = 0; i < n; ++i) {
        const double w = plan.coupling[static_cast<std::size_t>(i) * n + j];
        mass += w;
        for (int c = 0; c < d; ++c)
          p.discrete.matched[static_cast<std::size_t>(j) * d + c] +=
              w * data.points[static_cast<std::size_t>(i) * d + c];
      }
      if (mass <= 0.0)
        throw NumericError("build_potentials: empty coupling column");
      for (int c = 0; c < d; ++c)
        p.discrete.matched[static_cast<std::size_t>(j) * d + c] /= mass;
    }
  }

  // normalization: psi = 0 at an origin atom; grids without origin copies
  // are anchored so the extension evaluates to 0 at the origin instead
  int first_origin = -1;
  for (int j = 0; j < n; ++j)
    if (grid.is_origin(j)) {
      first_origin = j;
      break;
    }
  double shift;
  if (first_origin >= 0) {
    shift = p.discrete.psi[first_origin];
  } else {
    shift = -std::numeric_limits<double>::infinity();
    for (int b = 0; b < n; ++b) {
      double at0 = p.discrete.psi[b];
      const Point ub = grid.atom(b);
      const double* yb =
          p.discrete.matched.data() + static_cast<std::size_t>(b) * d;
      for (int c = 0; c < d; ++c) at0 -= yb[c] * ub[c];
      shift = std::max(shift, at0);
    }
  }
  for (int j = 0; j < n; ++j) p.discrete.psi[j] -= shift;
  if (first_origin >= 0) {
    for (int j = 0; j < n; ++j) {
      if (!grid.is_origin(j)) continue;
      if (p.exact && std::abs(p.discrete.psi[j]) > 1e-10)
        throw NumericError("build_potentials: origin copies disagree");
      p.discrete.psi[j] = 0.0;
    }
  }

  p.extended.dim = d;
  p.extended.base = grid.atoms;
  p.extended.slope = p.discrete.matched;
  p.extended.intercept = p.discrete.psi;

  for (int j = 0; j < n; ++j) {
    const Point u = grid.atom(j);
    p.atom_index[std::vector<double>(u.begin(), u.end())].push_back(j);
  }
  if (p.exact) {
    for (int i = 0; i < data.size(); ++i) {
      const Point x = data.point(i);
      p.sample_index[std::vector<double>(x.begin(), x.end())].push_back(
          plan.assignment[i]);
    }
  }
  return p;
}

namespace {

// Exact pruned evaluation of max_j <u_j, x> - psi_j using the shell-times-
// direction factorization. Bounds only decide which buckets get the
// canonical per-atom evaluation, so values match the full scan bitwise.
double legendre_pruned(const Potentials& p, Point x,
                       std::vector<int>* achievers) {
  const SphericalGrid& g = p.grid();
  const int n = g.size();
  const int n_S = g.n_directions();
  const double r_lo = g.radii.front(), r_hi = g.radii.back();

  std::vector<double> t(n_S);
  for (int k = 0; k < n_S; ++k) t[k] = dot(g.direction(k), x);
  std::vector<double> min_psi(n_S, std::numeric_limits<double>::infinity());
  double min_psi_origin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    if (g.is_origin(j))
      min_psi_origin = std::min(min_psi_origin, p.discrete.psi[j]);
    else
      min_psi[g.direction_index[j]] =
          std::min(min_psi[g.direction_index[j]], p.discrete.psi[j]);
  }
  const double pad = 1e-9 * (1.0 + norm(x));
  std::vector<double> ub(n_S);
  std::vector<int> order(n_S);
  for (int k = 0; k < n_S; ++k) {
    ub[k] = (t[k] >= 0.0 ? r_hi * t[k] : r_lo * t[k]) - min_psi[k] + pad;
    order[k] = k;
  }
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return ub[a] > ub[b]; });

  auto atom_value = [&](int j) { return dot(g.atom(j), x) - p.discrete.psi[j]; };

  double best = -std::numeric_limits<double>::infinity();
  if (min_psi_origin < std::numeric_limits<double>::infinity())
    best = -min_psi_origin;
  // atoms are shell-major: atom of (shell i, direction k) is i*n_S + k
  const int n_R = g.n_radii();
  for (const int k : order) {
    if (ub[k] < best - tie_tol(best)) break;
    for (int i = 0; i < n_R; ++i) best = std::max(best, atom_value(i * n_S + k));
  }
  if (achievers) {
    achievers->clear();
    const double tol = tie_tol(best);
    for (int k = 0; k < n_S; ++k) {
      if (ub[k] < best - tol) continue;
      for (int i = 0; i < n_R; ++i) {
        const int j = i * n_S + k;
        if (atom_value(j) >= best - tol) achievers->push_back(j);
      }
    }
    for (int j = n_R * n_S; j < n; ++j)
      if (-p.discrete.psi[j] >= best - tol) achievers->push_back(j);
    std::sort(achievers->begin(), achievers->end());
  }
  return best;
}

}  // namespace

double legendre_transform(const Potentials& p, Point x,
                          std::vector<int>* achievers) {
  const SphericalGrid& g = p.grid();
  const int n = g.size();
  const int d = g.dim;
  if (static_cast<int>(x.size()) != d)
    throw std::invalid_argument("legendre_transform: dimension mismatch");
  if (n > kFullScanLimit && g.n_radii() >= 1) return legendre_pruned(p, x, achievers);

  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> vals(n);
  for (int j = 0; j < n; ++j) {
    vals[j] = dot(g.atom(j), x) - p.discrete.psi[j];
    best = std::max(best, vals[j]);
  }
  if (achievers) {
    achievers->clear();
    const double tol = tie_tol(best);
    for (int j = 0; j < n; ++j)
      if (vals[j] >= best - tol) achievers->push_back(j);
  }
  return best;
}

MapValue distribution_map(const Potentials& p, Point x) {
  const SphericalGrid& g = p.grid();
  // on matched sample points, complementary slackness pins the atom; exact
  // duplicates report the lowest atom index with the multiplicity flag
  const auto hit = p.sample_index.find(std::vector<double>(x.begin(), x.end()));
  if (hit != p.sample_index.end()) {
    MapValue out;
    const int j = *std::min_element(hit->second.begin(), hit->second.end());
    const Point u = g.atom(j);
    out.point.assign(u.begin(), u.end());
    out.achievers = hit->second;
    out.multiple = hit->second.size() > 1;
    return out;
  }
  std::vector<int> ach;
  legendre_transform(p, x, &ach);
  MapValue out;
  out.point.assign(g.dim, 0.0);
  for (const int j : ach) {
    const Point u = g.atom(j);
    for (int c = 0; c < g.dim; ++c) out.point[c] += u[c];
  }
  const double inv = 1.0 / ach.size();
  for (int c = 0; c < g.dim; ++c) out.point[c] *= inv;
  out.multiple = ach.size() > 1;
  out.achievers = std::move(ach);
  return out;
}

MapValue quantile_map(const Potentials& p, Point u) {
  if (static_cast<int>(u.size()) != p.dim())
    throw std::invalid_argument("quantile_map: dimension mismatch");
  if (!(norm(u) < 1.0))
    throw OutOfDomain("quantile_map: |u| must be < 1");
  // on grid atoms the matched data point is the exact value; duplicated
  // atoms (origin copies) with distinct matches average and flag
  const auto hit = p.atom_index.find(std::vector<double>(u.begin(), u.end()));
  if (hit != p.atom_index.end()) {
    const int d = p.dim();
    MapValue out;
    out.point.assign(d, 0.0);
    bool distinct = false;
    const double* first =
        p.discrete.matched.data() + static_cast<std::size_t>(hit->second[0]) * d;
    for (const int j : hit->second) {
      const double* y = p.discrete.matched.data() + static_cast<std::size_t>(j) * d;
      for (int c = 0; c < d; ++c) {
        out.point[c] += y[c];
        if (y[c] != first[c]) distinct = true;
      }
    }
    const double inv = 1.0 / hit->second.size();
    for (int c = 0; c < d; ++c) out.point[c] *= inv;
    out.achievers = hit->second;
    out.multiple = distinct;
    return out;
  }
  return p.extended.gradient(u);
}

double inverse_residual(const Potentials& p, Point x) {
  const MapValue fu = distribution_map(p, x);
  const MapValue qx = quantile_map(p, Point(fu.point));
  return dist(Point(qx.point), x);
}

LipschitzReport lipschitz_audit(const Potentials& p,
                                const std::vector<double>& pairs) {
  const int d = p.dim();
  const std::size_t stride = 2 * static_cast<std::size_t>(d);
  if (pairs.size() % stride != 0)
    throw std::invalid_argument("lipschitz_audit: pair buffer shape mismatch");
  LipschitzReport rep;
  const std::size_t m = pairs.size() / stride;
  for (std::size_t i = 0; i < m; ++i) {
    const Point a(pairs.data() + i * stride, d);
    const Point b(pairs.data() + i * stride + d, d);
    const double dd = dist(a, b);
    if (dd == 0.0) {
      ++rep.skipped;
      continue;
    }
    const double fa = legendre_transform(p, a);
    const double fb = legendre_transform(p, b);
    rep.worst_ratio = std::max(rep.worst_ratio, std::abs(fa - fb) / dd);
    ++rep.pairs_used;
  }
  return rep;
}

}  // namespace centerout
