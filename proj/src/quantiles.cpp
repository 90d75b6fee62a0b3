#include "centerout/quantiles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "centerout/errors.hpp"
#include "centerout/ot.hpp"
#include "centerout/rng.hpp"

namespace centerout {

namespace {

// regularized lower incomplete gamma P(a, x), series + continued fraction
double gammp(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gammp: bad arguments");
  if (x == 0.0) return 0.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  double b = x + 1.0 - a, c = 1e300, dd = 1.0 / b, h = dd;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    dd = an * dd + b;
    if (std::abs(dd) < 1e-300) dd = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    dd = 1.0 / dd;
    const double del = dd * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

double chi2_sf(double stat, double df) {
  if (df <= 0.0) return 1.0;
  return 1.0 - gammp(0.5 * df, 0.5 * stat);
}

double data_diameter(const std::vector<double>& pts, int d) {
  const int n = static_cast<int>(pts.size()) / d;
  std::vector<double> lo(d, pts[0]), hi(d, pts[0]);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) {
      lo[c] = std::min(lo[c], pts[i * d + c]);
      hi[c] = std::max(hi[c], pts[i * d + c]);
    }
  double s = 0.0;
  for (int c = 0; c < d; ++c) s += (hi[c] - lo[c]) * (hi[c] - lo[c]);
  return std::sqrt(s);
}

}  // namespace

double angular_spacing(const SphericalGrid& grid) {
  const int n_S = grid.n_directions();
  const int d = grid.dim;
  if (n_S <= 1) return 2.0;
  if (d == 2) return 2.0 * std::sin(3.14159265358979323846 / n_S);
  double worst = 0.0;
  for (int k = 0; k < n_S; ++k) {
    double nearest = std::numeric_limits<double>::infinity();
    for (int k2 = 0; k2 < n_S; ++k2) {
      if (k2 == k) continue;
      nearest = std::min(nearest, dist(grid.direction(k), grid.direction(k2)));
    }
    worst = std::max(worst, nearest);
  }
  return worst;
}

QuantileContour contour(const Potentials& pot, double r, int n_dirs) {
  if (!(r > 0.0 && r < 1.0))
    throw OutOfDomain("contour: level must be in (0,1)");
  if (n_dirs < 1) throw std::invalid_argument("contour: n_dirs >= 1");
  const int d = pot.dim();
  QuantileContour out;
  out.level = r;
  out.dim = d;
  out.closed = d == 2;
  out.interpolated = true;
  for (const double rr : pot.grid().radii)
    if (std::abs(rr - r) <= 1e-12) out.interpolated = false;
  out.directions = sphere_directions(n_dirs, d, 0);
  out.points.resize(static_cast<std::size_t>(n_dirs) * d);
  out.dir_index.resize(n_dirs);
  std::vector<double> u(d);
  for (int k = 0; k < n_dirs; ++k) {
    for (int c = 0; c < d; ++c) u[c] = r * out.directions[k * d + c];
    const MapValue q = quantile_map(pot, Point(u));
    for (int c = 0; c < d; ++c) out.points[k * d + c] = q.point[c];
    out.dir_index[k] = k;
  }
  return out;
}

RankSignTable ranks_signs(const Potentials& pot, const Dataset& data) {
  if (!pot.exact) throw UnsupportedPlanKind("ranks_signs: exact plans only");
  const SphericalGrid& g = pot.grid();
  const int n = data.size();
  const int d = g.dim;
  RankSignTable t;
  t.n_R = g.n_radii();
  t.n_S = g.n_directions();
  t.origin_copies = g.origin_copies;
  t.rank.resize(n);
  t.sign.assign(static_cast<std::size_t>(n) * d, 0.0);
  t.grid_index.resize(n);
  t.shell.resize(n);
  t.sector.resize(n);
  for (int i = 0; i < n; ++i) {
    const int j = pot.assignment[i];
    t.grid_index[i] = j;
    t.shell[i] = g.radius_index[j];
    t.sector[i] = g.direction_index[j];
    if (t.shell[i] < 0) {
      t.rank[i] = 0.0;  // origin-matched; sign stays the zero vector
    } else {
      t.rank[i] = g.radii[t.shell[i]];
      for (int c = 0; c < d; ++c)
        t.sign[static_cast<std::size_t>(i) * d + c] =
            g.directions[static_cast<std::size_t>(t.sector[i]) * d + c];
    }
  }
  return t;
}

double hausdorff_distance(const std::vector<double>& A,
                          const std::vector<double>& B, int dim) {
  if (A.empty() || B.empty())
    throw std::invalid_argument("hausdorff_distance: empty set");
  const int na = static_cast<int>(A.size()) / dim;
  const int nb = static_cast<int>(B.size()) / dim;
  auto directed = [dim](const std::vector<double>& P, int np,
                        const std::vector<double>& Q, int nq) {
    double worst = 0.0;
    for (int i = 0; i < np; ++i) {
      double best = std::numeric_limits<double>::infinity();
      const Point p = row(P, dim, i);
      for (int j = 0; j < nq; ++j) best = std::min(best, dist2(p, row(Q, dim, j)));
      worst = std::max(worst, best);
    }
    return std::sqrt(worst);
  };
  return std::max(directed(A, na, B, nb), directed(B, nb, A, na));
}

SupportRecoveryReport support_recovery_test(const SyntheticSource& source,
                                            const std::vector<int>& n_list,
                                            double r, std::uint64_t seed) {
  if (!source.compact)
    throw std::invalid_argument("support_recovery_test: compact support required");
  if (!(r > 0.0 && r < 1.0))
    throw std::invalid_argument("support_recovery_test: level in (0,1)");
  SupportRecoveryReport rep;
  rep.level = r;
  for (const int n : n_list) {
    const Dataset data = source.sample(n, derive_seed(seed, "sr-sample-" + std::to_string(n)));
    const int d = data.dim;
    const int n_R = std::max(1, static_cast<int>(std::floor(std::sqrt(double(n)))));
    const int n_S = n / n_R;
    const SphericalGrid grid =
        build_grid(n, d, n_R, n_S, derive_seed(seed, "sr-grid-" + std::to_string(n)));
    const TransportPlan plan = solve_assignment(data, grid);
    const Potentials pot = build_potentials(plan, data, grid);

    std::vector<double> region;
    for (int j = 0; j < grid.size(); ++j) {
      const int sh = grid.radius_index[j];
      const double rr = sh < 0 ? 0.0 : grid.radii[sh];
      if (rr < r)
        for (int c = 0; c < d; ++c)
          region.push_back(pot.discrete.matched[static_cast<std::size_t>(j) * d + c]);
    }
    const QuantileContour qc = contour(pot, r, std::max(128, n_S));
    region.insert(region.end(), qc.points.begin(), qc.points.end());

    SupportRecoveryRow row;
    row.n = n;
    row.n_R = n_R;
    row.n_S = n_S;
    row.hausdorff_support =
        hausdorff_distance(region, source.support_points(4096), d);
    row.hausdorff_boundary =
        hausdorff_distance(qc.points, source.boundary_points(2048), d);
    rep.rows.push_back(std::move(row));
  }
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    rep.monotone = rep.monotone && rep.rows[i].hausdorff_support <
                                       rep.rows[i - 1].hausdorff_support;
  return rep;
}

RayEscapeReport ray_escape_test(const Potentials& pot, double r,
                                int n_boundary, double tau, bool contractual) {
  if (!(r > 0.0 && r < 1.0))
    throw OutOfDomain("ray_escape_test: level must be in (0,1)");
  if (n_boundary < 1)
    throw std::invalid_argument("ray_escape_test: n_boundary >= 1");
  const SphericalGrid& g = pot.grid();
  const int d = g.dim;

  // region points: matched data of all atoms strictly inside the level
  std::vector<double> region;
  for (int j = 0; j < g.size(); ++j) {
    const int sh = g.radius_index[j];
    const double rr = sh < 0 ? 0.0 : g.radii[sh];
    if (rr < r)
      for (int c = 0; c < d; ++c)
        region.push_back(pot.discrete.matched[static_cast<std::size_t>(j) * d + c]);
  }
  RayEscapeReport rep;
  rep.contractual = contractual;
  if (tau <= 0.0) tau = 1e-9 * data_diameter(pot.discrete.matched, d);
  rep.tau = tau;
  if (region.empty()) {
    rep.pass_fraction = 1.0;
    return rep;
  }
  const int nr = static_cast<int>(region.size()) / d;

  const std::vector<double> dirs = sphere_directions(n_boundary, d, 0);
  std::vector<double> u(d);
  for (int m = 0; m < n_boundary; ++m) {
    for (int c = 0; c < d; ++c) u[c] = r * dirs[m * d + c];
    const MapValue q = quantile_map(pot, Point(u));
    const Point y(q.point);
    ++rep.tested;
    bool hit = false;
    for (int i = 0; i < nr && !hit; ++i) {
      const Point z = row(region, d, i);
      double t = 0.0;
      for (int c = 0; c < d; ++c) t += (z[c] - y[c]) * dirs[m * d + c];
      if (t <= tau) continue;  // not beyond the boundary point
      const double d2 = dist2(z, y) - t * t;
      if (d2 <= tau * tau) hit = true;
    }
    if (hit) ++rep.violations;
  }
  rep.pass_fraction = 1.0 - static_cast<double>(rep.violations) / rep.tested;
  return rep;
}

InvarianceReport asymptotic_invariance_test(
    const Potentials& pot, const std::vector<double>& directions,
    const std::vector<double>& t_list) {
  const int d = pot.dim();
  if (directions.empty() || directions.size() % static_cast<std::size_t>(d) != 0)
    throw std::invalid_argument("asymptotic_invariance_test: bad directions");
  for (std::size_t i = 1; i < t_list.size(); ++i)
    if (!(t_list[i] > t_list[i - 1]))
      throw std::invalid_argument("asymptotic_invariance_test: t_list must increase");

  InvarianceReport rep;
  rep.t_list = t_list;
  rep.angular_spacing = angular_spacing(pot.grid());
  rep.radial_spacing = 1.0 / (pot.grid().n_radii() + 1.0);
  const double spacing = rep.angular_spacing + rep.radial_spacing;

  const int m = static_cast<int>(directions.size()) / d;
  rep.all_monotone = true;
  std::vector<double> x(d);
  for (int k = 0; k < m; ++k) {
    InvarianceRow row;
    const Point u = centerout::row(directions, d, k);
    row.direction.assign(u.begin(), u.end());
    for (const double t : t_list) {
      for (int c = 0; c < d; ++c) x[c] = t * u[c];
      const MapValue f = distribution_map(pot, Point(x));
      double e2 = 0.0;
      for (int c = 0; c < d; ++c) e2 += (f.point[c] - u[c]) * (f.point[c] - u[c]);
      row.errors.push_back(std::sqrt(e2));
    }
    row.monotone_within_spacing = true;
    for (std::size_t i = 1; i < row.errors.size(); ++i)
      if (row.errors[i] > row.errors[i - 1] + spacing)
        row.monotone_within_spacing = false;
    row.final_error = row.errors.back();
    rep.all_monotone = rep.all_monotone && row.monotone_within_spacing;
    rep.max_final_error = std::max(rep.max_final_error, row.final_error);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

HomeomorphismAudit homeomorphism_audit(const Potentials& pot,
                                       const Dataset& data,
                                       std::uint64_t seed) {
  if (!pot.exact)
    throw UnsupportedPlanKind("homeomorphism_audit: exact plans only");
  const SphericalGrid& g = pot.grid();
  const int d = g.dim;
  const int n = data.size();

  HomeomorphismAudit audit;
  std::vector<int> seen = pot.assignment;
  std::sort(seen.begin(), seen.end());
  audit.injective = std::adjacent_find(seen.begin(), seen.end()) == seen.end();

  for (int i = 0; i < n; ++i)
    audit.max_roundtrip_residual =
        std::max(audit.max_roundtrip_residual, inverse_residual(pot, data.point(i)));

  // continuity modulus across neighboring directions within each shell
  const int n_S = g.n_directions();
  const int n_R = g.n_radii();
  std::vector<int> neighbor(n_S, -1);
  if (n_S > 1) {
    if (d == 2) {
      for (int k = 0; k < n_S; ++k) neighbor[k] = (k + 1) % n_S;
    } else {
      for (int k = 0; k < n_S; ++k) {
        double best = std::numeric_limits<double>::infinity();
        for (int k2 = 0; k2 < n_S; ++k2) {
          if (k2 == k) continue;
          const double dd = dist2(g.direction(k), g.direction(k2));
          if (dd < best) {
            best = dd;
            neighbor[k] = k2;
          }
        }
      }
    }
  }
  audit.modulus_by_shell.assign(n_R, 0.0);
  for (int i = 0; i < n_R; ++i) {
    for (int k = 0; k < n_S && neighbor[k] >= 0; ++k) {
      const int a = i * n_S + k;
      const int b = i * n_S + neighbor[k];
      const double dd =
          dist(row(pot.discrete.matched, d, a), row(pot.discrete.matched, d, b));
      audit.modulus_by_shell[i] = std::max(audit.modulus_by_shell[i], dd);
    }
    audit.modulus = std::max(audit.modulus, audit.modulus_by_shell[i]);
  }

  // multiplicity census on probes away from the origin
  Rng rng(derive_seed(seed, "audit-probes"));
  const double r_hi = g.max_radius();
  const long probes = 512;
  for (long t = 0; t < probes; ++t) {
    const std::vector<double> s = rng.unit_vector(d);
    const double rho = 0.05 + (r_hi - 0.05) * rng.uniform();
    std::vector<double> u(d);
    for (int c = 0; c < d; ++c) u[c] = rho * s[c];
    if (quantile_map(pot, Point(u)).multiple) ++audit.multiplicity_flags;
  }
  audit.probes = probes;
  return audit;
}

IndependenceReport rank_sign_independence_test(const RankSignTable& table) {
  IndependenceReport rep;
  const int R = table.n_R, C = table.n_S;
  if (R < 1 || C < 1)
    throw std::invalid_argument("rank_sign_independence_test: empty table");
  rep.counts.assign(static_cast<std::size_t>(R) * C, 0);
  long total = 0;
  for (int i = 0; i < table.size(); ++i) {
    if (table.shell[i] < 0) {
      ++rep.excluded_origin;
      continue;
    }
    ++rep.counts[static_cast<std::size_t>(table.shell[i]) * C + table.sector[i]];
    ++total;
  }
  if (total == 0) throw std::invalid_argument("rank_sign_independence_test: no data");

  std::vector<long> row_tot(R, 0), col_tot(C, 0);
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < C; ++j) {
      row_tot[i] += rep.counts[static_cast<std::size_t>(i) * C + j];
      col_tot[j] += rep.counts[static_cast<std::size_t>(i) * C + j];
    }
  int rows_used = 0, cols_used = 0;
  for (int i = 0; i < R; ++i) rows_used += row_tot[i] > 0;
  for (int j = 0; j < C; ++j) cols_used += col_tot[j] > 0;
  double stat = 0.0;
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < C; ++j) {
      const double e =
          static_cast<double>(row_tot[i]) * col_tot[j] / static_cast<double>(total);
      if (e <= 0.0) continue;
      const double o = static_cast<double>(
          rep.counts[static_cast<std::size_t>(i) * C + j]);
      stat += (o - e) * (o - e) / e;
    }
  rep.statistic = stat;
  rep.exactly_uniform = stat == 0.0;
  const double df = static_cast<double>(rows_used - 1) * (cols_used - 1);
  rep.p_value = chi2_sf(stat, df);
  return rep;
}

}  // namespace centerout
