#include "centerout/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "centerout/errors.hpp"

namespace centerout {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct CostView {
  const double* x;
  const double* u;
  int d;
  double operator()(int i, int j) const {
    const double* a = x + static_cast<std::size_t>(i) * d;
    const double* b = u + static_cast<std::size_t>(j) * d;
    if (d == 2) {
      const double t0 = a[0] - b[0];
      const double t1 = a[1] - b[1];
      return t0 * t0 + t1 * t1;
    }
    double s = 0.0;
    for (int k = 0; k < d; ++k) {
      const double t = a[k] - b[k];
      s += t * t;
    }
    return s;
  }
};

// Shortest-augmenting-path assignment with dual price maintenance:
// column reduction with reassignment, reduction transfer, two
// augmenting-row-reduction passes, then batched Dijkstra augmentation for
// the remaining free rows. Column prices v are the grid-side duals; row
// duals follow from tightness on the matching.
void lap_solve(int n, const CostView& cost, std::vector<int>& rowsol,
               std::vector<double>& v) {
  rowsol.assign(n, -1);
  v.assign(n, 0.0);
  std::vector<int> colsol(n, -1);

  // column reduction, reverse order; a row hit twice keeps the cheaper column
  for (int j = n - 1; j >= 0; --j) {
    double mn = cost(0, j);
    int imin = 0;
    for (int i = 1; i < n; ++i) {
      const double c = cost(i, j);
      if (c < mn) {
        mn = c;
        imin = i;
      }
    }
    v[j] = mn;
    if (rowsol[imin] < 0) {
      rowsol[imin] = j;
      colsol[j] = imin;
    } else if (mn < v[rowsol[imin]]) {
      const int j1 = rowsol[imin];
      rowsol[imin] = j;
      colsol[j] = imin;
      colsol[j1] = -1;
    }
  }

  std::vector<int> free_rows;
  for (int i = 0; i < n; ++i)
    if (rowsol[i] < 0) free_rows.push_back(i);

  // reduction transfer: spread dual slack from assigned rows so the
  // augmentation phase starts with short paths. Skipped when the column
  // reduction already produced a complete matching (the prices are then
  // final, and on matched-atom instances they are the canonical ones).
  if (!free_rows.empty()) {
    for (int i = 0; i < n; ++i) {
      const int j1 = rowsol[i];
      if (j1 < 0) continue;
      const double tight = cost(i, j1) - v[j1];
      double second = kInf;
      for (int j = 0; j < n; ++j) {
        if (j == j1) continue;
        second = std::min(second, cost(i, j) - v[j]);
      }
      if (second < kInf) v[j1] -= second - tight;
    }
  }

  // augmenting row reduction, two passes. Displaced rows are retried
  // immediately while the price keeps strictly dropping; a retry budget
  // guards against live-lock once reductions fall below double precision.
  if (!free_rows.empty()) {
    std::size_t nfree = free_rows.size();
    for (int pass = 0; pass < 2 && nfree > 0; ++pass) {
      const std::size_t prv = nfree;
      nfree = 0;
      std::size_t k = 0;
      long budget = 8L * n;
      while (k < prv) {
        const int i = free_rows[k++];
        double umin = kInf, usub = kInf;
        int j1 = -1, j2 = -1;
        for (int j = 0; j < n; ++j) {
          const double h = cost(i, j) - v[j];
          if (h < umin) {
            usub = umin;
            j2 = j1;
            umin = h;
            j1 = j;
          } else if (h < usub) {
            usub = h;
            j2 = j;
          }
        }
        if (j2 < 0) usub = umin;  // single-column instance
        int i0 = colsol[j1];
        if (umin < usub) {
          v[j1] -= usub - umin;
        } else if (i0 >= 0) {
          j1 = j2;
          i0 = colsol[j1];
        }
        rowsol[i] = j1;
        colsol[j1] = i;
        if (i0 >= 0) {
          rowsol[i0] = -1;
          if (umin < usub && k > 0 && --budget > 0)
            free_rows[--k] = i0;  // continue the cascade from i0
          else
            free_rows[nfree++] = i0;
        }
      }
    }
    free_rows.clear();
    for (int i = 0; i < n; ++i)
      if (rowsol[i] < 0) free_rows.push_back(i);
  }

  // batched shortest augmenting paths (collist partition: [0,low) ready,
  // [low,up) at the current minimum, [up,n) todo)
  std::vector<double> dist(n);
  std::vector<int> pred(n), collist(n);
  for (const int fr : free_rows) {
    for (int j = 0; j < n; ++j) {
      dist[j] = cost(fr, j) - v[j];
      pred[j] = fr;
      collist[j] = j;
    }
    int low = 0, up = 0, last = -1, endpoint = -1;
    double mn = 0.0;
    bool found = false;
    do {
      if (up == low) {
        last = low - 1;
        mn = dist[collist[up++]];
        for (int k = up; k < n; ++k) {
          const int j = collist[k];
          const double h = dist[j];
          if (h <= mn) {
            if (h < mn) {
              up = low;
              mn = h;
            }
            collist[k] = collist[up];
            collist[up++] = j;
          }
        }
        for (int k = low; k < up; ++k)
          if (colsol[collist[k]] < 0) {
            endpoint = collist[k];
            found = true;
            break;
          }
      }
      if (!found) {
        const int j1 = collist[low++];
        const int i = colsol[j1];
        const double h = cost(i, j1) - v[j1] - mn;
        for (int k = up; k < n; ++k) {
          const int j = collist[k];
          const double nd = cost(i, j) - v[j] - h;
          if (nd < dist[j]) {
            pred[j] = i;
            if (nd == mn) {
              if (colsol[j] < 0) {
                endpoint = j;
                found = true;
                dist[j] = nd;
                break;
              }
              collist[k] = collist[up];
              collist[up++] = j;
            }
            dist[j] = nd;
          }
        }
      }
    } while (!found);
    for (int k = 0; k <= last; ++k) {
      const int j = collist[k];
      v[j] += dist[j] - mn;
    }
    int j = endpoint;
    while (true) {
      const int i = pred[j];
      colsol[j] = i;
      const int jnext = rowsol[i];
      rowsol[i] = j;
      if (i == fr) break;
      j = jnext;
    }
  }
}

// Among cost-minimizing permutations, pick the lexicographically smallest.
// Any optimal permutation uses only reduced-cost-tight edges of an optimal
// dual pair, so the search is a greedy walk over the tight-edge graph with
// matching-feasibility repairs.
void lexicographic_refine(int n, const CostView& cost,
                          const std::vector<double>& f,
                          const std::vector<double>& v,
                          std::vector<int>& sigma) {
  // Tight enough that only genuine ties (duplicate points or symmetric
  // configurations, where reduced costs vanish to roundoff) qualify.
  double scale = 1.0;
  for (int i = 0; i < n; ++i)
    scale = std::max(scale, std::abs(cost(i, sigma[i])));
  const double eps = 1e-12 * scale;

  std::vector<std::vector<int>> tight(n);
  bool any_choice = false;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      if (cost(i, j) - f[i] - v[j] <= eps) tight[i].push_back(j);
    if (tight[i].size() > 1) any_choice = true;
  }
  if (!any_choice) return;  // unique optimum, nothing to do

  std::vector<int> match_col(n);  // row -> col, evolving matching
  std::vector<int> match_row(n);  // col -> row
  for (int i = 0; i < n; ++i) {
    match_col[i] = sigma[i];
    match_row[sigma[i]] = i;
  }
  std::vector<char> fixed_col(n, 0);
  std::vector<char> visited(n, 0);

  // Kuhn-style augmenting search for `row` over non-fixed tight columns.
  auto augment = [&](auto&& self, int row) -> bool {
    for (const int j : tight[row]) {
      if (fixed_col[j] || visited[j]) continue;
      visited[j] = 1;
      if (match_row[j] < 0 || self(self, match_row[j])) {
        match_col[row] = j;
        match_row[j] = row;
        return true;
      }
    }
    return false;
  };

  for (int i = 0; i < n; ++i) {
    bool fixed = false;
    for (const int j : tight[i]) {
      if (fixed_col[j]) continue;
      if (j == match_col[i]) {
        fixed = true;
      } else {
        // tentatively free i and the current owner of j, then repair
        const int owner = match_row[j];
        const int old_j = match_col[i];
        match_row[old_j] = -1;
        match_col[i] = j;
        match_row[j] = i;
        if (owner >= 0) {
          std::fill(visited.begin(), visited.end(), 0);
          visited[j] = 1;
          if (augment(augment, owner)) {
            fixed = true;
          } else {
            match_col[i] = old_j;  // restore
            match_row[old_j] = i;
            match_row[j] = owner;
          }
        } else {
          fixed = true;
        }
      }
      if (fixed) break;
    }
    if (!fixed)
      throw NumericError("assignment: tie refinement lost feasibility");
    fixed_col[match_col[i]] = 1;
  }
  sigma = match_col;
}

double lse(const std::vector<double>& vals) {
  double mx = -kInf;
  for (double t : vals) mx = std::max(mx, t);
  if (mx == -kInf) return -kInf;
  double s = 0.0;
  for (double t : vals) s += std::exp(t - mx);
  return mx + std::log(s);
}

}  // namespace

double transport_cost(int i, int j, const Dataset& data,
                      const SphericalGrid& grid) {
  return dist2(data.point(i), grid.atom(j));
}

TransportPlan solve_assignment(const Dataset& data,
                               const SphericalGrid& grid) {
  validate(data);
  const int n = data.size();
  if (n != grid.size())
    throw std::invalid_argument("solve_assignment: sample and grid sizes differ");
  if (data.dim != grid.dim)
    throw std::invalid_argument("solve_assignment: dimension mismatch");
  const CostView cost{data.points.data(), grid.atoms.data(), data.dim};
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(cost(i, 0)))
      throw NumericError("solve_assignment: non-finite cost");

  TransportPlan plan;
  plan.kind = TransportPlan::Kind::ExactPermutation;
  lap_solve(n, cost, plan.assignment, plan.g);
  plan.f.resize(n);
  for (int i = 0; i < n; ++i)
    plan.f[i] = cost(i, plan.assignment[i]) - plan.g[plan.assignment[i]];

  lexicographic_refine(n, cost, plan.f, plan.g, plan.assignment);

  double total = 0.0;
  for (int i = 0; i < n; ++i) total += cost(i, plan.assignment[i]);
  if (!std::isfinite(total))
    throw NumericError("solve_assignment: non-finite total cost");
  plan.cost = total / n;
  return plan;
}

TransportPlan solve_sinkhorn(const Dataset& data, const SphericalGrid& grid,
                             double epsilon, double tol, int max_iter) {
  validate(data);
  const int n = data.size();
  if (n != grid.size())
    throw std::invalid_argument("solve_sinkhorn: sample and grid sizes differ");
  if (data.dim != grid.dim)
    throw std::invalid_argument("solve_sinkhorn: dimension mismatch");
  if (!(epsilon > 0.0))
    throw std::invalid_argument("solve_sinkhorn: epsilon must be > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_sinkhorn: tol must be > 0");
  if (max_iter < 1)
    throw std::invalid_argument("solve_sinkhorn: max_iter must be >= 1");
  if (n > 4096)
    throw std::invalid_argument(
        "solve_sinkhorn: dense coupling capped at n = 4096");

  const CostView cost{data.points.data(), grid.atoms.data(), data.dim};
  std::vector<double> C(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) C[static_cast<std::size_t>(i) * n + j] = cost(i, j);

  const double log_m = std::log(1.0 / n);
  std::vector<double> f(n, 0.0), g(n, 0.0), buf(n);
  double err = kInf;
  int it = 0;
  bool converged = false;
  for (it = 1; it <= max_iter; ++it) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j)
        buf[j] = (g[j] - C[static_cast<std::size_t>(i) * n + j]) / epsilon;
      f[i] = -epsilon * (log_m + lse(buf));
    }
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i)
        buf[i] = (f[i] - C[static_cast<std::size_t>(i) * n + j]) / epsilon;
      g[j] = -epsilon * (log_m + lse(buf));
    }
    // column sums are exact after the g-update; row drift measures progress
    err = 0.0;
    for (int i = 0; i < n; ++i) {
      double rs = 0.0;
      for (int j = 0; j < n; ++j)
        rs += std::exp((f[i] + g[j] - C[static_cast<std::size_t>(i) * n + j]) /
                       epsilon) /
              (static_cast<double>(n) * n);
      err += std::abs(rs - 1.0 / n);
    }
    if (err <= tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceFailure("solve_sinkhorn: marginal tolerance not reached",
                             err, max_iter);

  TransportPlan plan;
  plan.kind = TransportPlan::Kind::DenseCoupling;
  plan.iterations = it;
  plan.marginal_error = err;
  plan.coupling.resize(static_cast<std::size_t>(n) * n);
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i) * n + j;
      const double p = std::exp((f[i] + g[j] - C[idx]) / epsilon) /
                       (static_cast<double>(n) * n);
      plan.coupling[idx] = p;
      total += p * C[idx];
    }
  plan.cost = total;

  // recentre the grid-side dual at an origin atom (nearest-to-origin
  // fallback) to match the psi(0) = 0 normalization downstream
  int j0 = -1;
  double best = kInf;
  for (int j = 0; j < n; ++j) {
    if (grid.is_origin(j)) {
      j0 = j;
      break;
    }
    const double r = norm2(grid.atom(j));
    if (r < best) {
      best = r;
      j0 = j;
    }
  }
  const double shift = g[j0];
  for (int j = 0; j < n; ++j) g[j] -= shift;
  for (int i = 0; i < n; ++i) f[i] += shift;
  plan.f = std::move(f);
  plan.g = std::move(g);
  return plan;
}

CycleViolationReport verify_cyclical_monotonicity(const TransportPlan& plan,
                                                  const Dataset& data,
                                                  const SphericalGrid& grid,
                                                  int k, double margin_tol) {
  if (plan.kind != TransportPlan::Kind::ExactPermutation)
    throw UnsupportedPlanKind(
        "verify_cyclical_monotonicity: exact plans only");
  if (k != 2 && k != 3)
    throw std::invalid_argument("verify_cyclical_monotonicity: k in {2,3}");
  const int n = data.size();
  const int d = data.dim;
  const auto& sig = plan.assignment;

  auto pair_term = [&](int i, int j) {
    // <x_i, u_{sigma(i)} - u_{sigma(j)}>
    const Point xi = data.point(i);
    const Point ui = grid.atom(sig[i]);
    const Point uj = grid.atom(sig[j]);
    double s = 0.0;
    for (int c = 0; c < d; ++c) s += xi[c] * (ui[c] - uj[c]);
    return s;
  };

  CycleViolationReport rep;
  auto record = [&](double m) {
    ++rep.cycles_checked;
    if (m < -margin_tol) {
      ++rep.violations;
      rep.worst_margin = std::max(rep.worst_margin, -m);
    }
  };

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) record(pair_term(i, j) + pair_term(j, i));
  if (k == 3) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int l = j + 1; l < n; ++l) {
          record(pair_term(i, j) + pair_term(j, l) + pair_term(l, i));
          record(pair_term(i, l) + pair_term(l, j) + pair_term(j, i));
        }
  }
  return rep;
}

double duality_gap(const TransportPlan& plan, const Dataset& data,
                   const SphericalGrid& grid) {
  if (plan.kind != TransportPlan::Kind::ExactPermutation)
    throw UnsupportedPlanKind("duality_gap: exact plans only");
  const int n = data.size();
  double primal = 0.0, dual = 0.0;
  for (int i = 0; i < n; ++i) {
    primal += transport_cost(i, plan.assignment[i], data, grid);
    dual += plan.f[i] + plan.g[i];
  }
  return primal - dual;
}

}  // namespace centerout
