#include "centerout/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "centerout/errors.hpp"

namespace centerout {

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
}

const std::set<std::string> kKnownTests = {
    "inverse", "boundary", "ma", "hausdorff", "ray", "invariance", "independence"};

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

GeneratorSpec generator_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform-ball") {
    reject_unknown_keys(j, {"kind", "center", "radius"}, "generator");
    const std::vector<double> c = j.at("center").get<std::vector<double>>();
    return GeneratorSpec::uniform_ball(static_cast<int>(c.size()), c,
                                       j.value("radius", 1.0));
  }
  if (kind == "uniform-box") {
    reject_unknown_keys(j, {"kind", "lo", "hi"}, "generator");
    return GeneratorSpec::uniform_box(j.at("lo").get<std::vector<double>>(),
                                      j.at("hi").get<std::vector<double>>());
  }
  if (kind == "uniform-convex-polytope") {
    reject_unknown_keys(j, {"kind", "halfspaces", "lo", "hi"}, "generator");
    std::vector<HalfSpace> hs;
    for (const auto& h : j.at("halfspaces")) {
      reject_unknown_keys(h, {"normal", "offset"}, "halfspace");
      HalfSpace half;
      half.normal = h.at("normal").get<std::vector<double>>();
      half.offset = h.at("offset").get<double>();
      hs.push_back(std::move(half));
    }
    return GeneratorSpec::uniform_polytope(std::move(hs),
                                           j.at("lo").get<std::vector<double>>(),
                                           j.at("hi").get<std::vector<double>>());
  }
  if (kind == "gaussian") {
    reject_unknown_keys(j, {"kind", "mean", "cov"}, "generator");
    const std::vector<double> mean = j.at("mean").get<std::vector<double>>();
    const int d = static_cast<int>(mean.size());
    std::vector<double> cov;
    if (j.contains("cov")) {
      for (const auto& rowj : j.at("cov"))
        for (const auto& v : rowj) cov.push_back(v.get<double>());
    } else {
      cov.assign(static_cast<std::size_t>(d) * d, 0.0);
      for (int i = 0; i < d; ++i) cov[static_cast<std::size_t>(i) * d + i] = 1.0;
    }
    return GeneratorSpec::gaussian(mean, std::move(cov));
  }
  if (kind == "spherical-uniform") {
    reject_unknown_keys(j, {"kind", "dim"}, "generator");
    return GeneratorSpec::spherical_uniform(j.at("dim").get<int>());
  }
  if (kind == "mixture") {
    reject_unknown_keys(j, {"kind", "weights", "parts"}, "generator");
    std::vector<GeneratorSpec> parts;
    for (const auto& pj : j.at("parts")) parts.push_back(generator_from_json(pj));
    return GeneratorSpec::mixture(j.at("weights").get<std::vector<double>>(),
                                  std::move(parts));
  }
  throw std::invalid_argument("config: unknown generator kind '" + kind + "'");
}

json generator_to_json(const GeneratorSpec& spec) {
  json j;
  switch (spec.kind) {
    case GeneratorSpec::Kind::UniformBall:
      j["kind"] = "uniform-ball";
      j["center"] = spec.center;
      j["radius"] = spec.radius;
      break;
    case GeneratorSpec::Kind::UniformBox:
      j["kind"] = "uniform-box";
      j["lo"] = spec.lo;
      j["hi"] = spec.hi;
      break;
    case GeneratorSpec::Kind::UniformPolytope: {
      j["kind"] = "uniform-convex-polytope";
      json hs = json::array();
      for (const auto& h : spec.halfspaces)
        hs.push_back(json{{"normal", h.normal}, {"offset", h.offset}});
      j["halfspaces"] = hs;
      j["lo"] = spec.poly_lo;
      j["hi"] = spec.poly_hi;
      break;
    }
    case GeneratorSpec::Kind::Gaussian: {
      j["kind"] = "gaussian";
      j["mean"] = spec.center;
      json cov = json::array();
      for (int i = 0; i < spec.dim; ++i)
        cov.push_back(std::vector<double>(
            spec.cov.begin() + static_cast<std::ptrdiff_t>(i) * spec.dim,
            spec.cov.begin() + static_cast<std::ptrdiff_t>(i + 1) * spec.dim));
      j["cov"] = cov;
      break;
    }
    case GeneratorSpec::Kind::SphericalUniform:
      j["kind"] = "spherical-uniform";
      j["dim"] = spec.dim;
      break;
    case GeneratorSpec::Kind::Mixture: {
      j["kind"] = "mixture";
      j["weights"] = spec.weights;
      json parts = json::array();
      for (const auto& p : spec.parts) parts.push_back(generator_to_json(p));
      j["parts"] = parts;
      break;
    }
  }
  return j;
}

ExperimentConfig ExperimentConfig::config_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"generator", "input", "input_format", "n", "n_R", "n_S",
                       "solver", "levels", "tests", "seed", "out_dir",
                       "contour_dirs", "ray_points"},
                      "experiment");
  ExperimentConfig c;
  if (j.contains("generator")) c.generator = generator_from_json(j.at("generator"));
  c.input_path = j.value("input", "");
  c.input_format = j.value("input_format", "csv");
  c.n = j.value("n", 0);
  c.n_R = j.value("n_R", 0);
  c.n_S = j.value("n_S", 0);
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    reject_unknown_keys(s, {"kind", "epsilon", "tol", "max_iter"}, "solver");
    const std::string kind = s.value("kind", "exact");
    if (kind == "exact") {
      c.solver.kind = SolverConfig::Kind::Exact;
    } else if (kind == "sinkhorn") {
      c.solver.kind = SolverConfig::Kind::Sinkhorn;
      c.solver.epsilon = s.value("epsilon", 0.05);
      c.solver.tol = s.value("tol", 1e-8);
      c.solver.max_iter = s.value("max_iter", 20000);
    } else {
      throw std::invalid_argument("config: solver kind must be exact or sinkhorn");
    }
  }
  if (j.contains("levels")) c.levels = j.at("levels").get<std::vector<double>>();
  if (j.contains("tests")) c.tests = j.at("tests").get<std::vector<std::string>>();
  if (j.contains("seed")) {
    c.seed = j.at("seed").get<std::uint64_t>();
    c.seed_set = true;
  }
  c.out_dir = j.value("out_dir", "");
  c.contour_dirs = j.value("contour_dirs", 0);
  c.ray_points = j.value("ray_points", 200);
  return c;
}

json ExperimentConfig::config_to_json() const {
  json j;
  if (generator) j["generator"] = generator_to_json(*generator);
  if (!input_path.empty()) {
    j["input"] = input_path;
    j["input_format"] = input_format;
  }
  j["n"] = n;
  j["n_R"] = n_R;
  j["n_S"] = n_S;
  json s;
  s["kind"] = solver.kind == SolverConfig::Kind::Exact ? "exact" : "sinkhorn";
  if (solver.kind == SolverConfig::Kind::Sinkhorn) {
    s["epsilon"] = solver.epsilon;
    s["tol"] = solver.tol;
    s["max_iter"] = solver.max_iter;
  }
  j["solver"] = s;
  j["levels"] = levels;
  j["tests"] = tests;
  j["seed"] = seed;
  j["out_dir"] = out_dir;
  j["contour_dirs"] = contour_dirs;
  j["ray_points"] = ray_points;
  return j;
}

namespace {

json run_inverse_test(const Potentials& pot, const Dataset& data) {
  // samples collapsed onto shared origin copies are genuinely multivalued
  // under the quantile map; the round-trip contract covers generic points
  double worst = 0.0;
  long flagged = 0;
  for (int i = 0; i < data.size(); ++i) {
    const MapValue fu = distribution_map(pot, data.point(i));
    const MapValue qx = quantile_map(pot, Point(fu.point));
    if (fu.multiple || qx.multiple) {
      ++flagged;
      continue;
    }
    worst = std::max(worst, dist(Point(qx.point), data.point(i)));
  }
  const double tol = 1e-9 * (1.0 + data_diameter(data.points, data.dim));
  json r;
  r["name"] = "inverse";
  r["property"] = "quantile-distribution-round-trip";
  r["max_residual"] = worst;
  r["multivalued_skipped"] = flagged;
  r["tolerance"] = tol;
  r["pass"] = worst <= tol;
  return r;
}

json run_boundary_test(const Potentials& pot, const Dataset& data) {
  const BoundaryAvoidanceReport rep = boundary_avoidance_check(pot, data.points);
  json r;
  r["name"] = "boundary";
  r["property"] = "gradient-stays-inside-unit-sphere";
  r["max_norm"] = rep.max_norm;
  r["bound"] = rep.bound;
  r["pass"] = rep.pass;
  return r;
}

json run_ma_test(const Potentials& pot, const Dataset& data,
                 const GeneratorSpec& gen, std::uint64_t seed) {
  const int d = data.dim;
  // forward region: centered ball holding roughly half the sample
  std::vector<double> centroid(d, 0.0);
  for (int i = 0; i < data.size(); ++i)
    for (int c = 0; c < d; ++c) centroid[c] += data.points[i * d + c] / data.size();
  std::vector<double> dists;
  for (int i = 0; i < data.size(); ++i)
    dists.push_back(dist(data.point(i), Point(centroid)));
  std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
  const double r_half = dists[dists.size() / 2];
  const Region A = Region::ball(centroid, r_half);
  const Region B = Region::ball(std::vector<double>(d, 0.0), 0.75, 0.25);

  const DensityFn p = [gen](Point x) { return gen.density(x); };
  const MAEstimate fwd = ma_forward_density(A, p, pot, 20000, derive_seed(seed, "ma-f"));
  const MAEstimate bwd = ma_backward_density(B, p, pot, 20000, derive_seed(seed, "ma-b"));
  const PushforwardCheck push = pushforward_count(pot, data, A);

  // the rejection estimator carries an O(spacing * perimeter) term from
  // cells straddling the region boundary; allow for it explicitly
  const double spacing =
      angular_spacing(pot.grid()) + 1.0 / (pot.grid().n_radii() + 1.0);
  auto consistent = [spacing](const MAEstimate& e) {
    const double se = std::sqrt(e.se_formula * e.se_formula +
                                e.se_subdiff * e.se_subdiff);
    const double allowance = spacing * e.region.surface();
    return std::abs(e.value_formula - e.value_subdiff) <=
           3.0 * se + allowance + 1e-12;
  };
  json r;
  r["name"] = "ma";
  r["property"] = "monge-ampere-density-consistency";
  r["forward"] = to_json(fwd);
  r["backward"] = to_json(bwd);
  r["pushforward_exact"] = push.exact;
  r["pass"] = consistent(fwd) && consistent(bwd) && push.exact;
  return r;
}

json run_hausdorff_test(const Potentials& pot, const Dataset& data,
                        const std::vector<QuantileContour>& contours,
                        const std::optional<GeneratorSpec>& gen) {
  const int d = data.dim;
  const double tol = 1e-9 * (1.0 + data_diameter(data.points, d));
  bool nested = true;
  // outer support-function check of contour(r) against region(r')+contour(r')
  for (std::size_t a = 0; a + 1 < contours.size(); ++a) {
    const QuantileContour& inner = contours[a];
    const QuantileContour& outer = contours[a + 1];
    std::vector<double> hullpts = outer.points;
    for (int i = 0; i < data.size(); ++i) {
      const int j = pot.assignment[i];
      const int sh = pot.grid().radius_index[j];
      const double rr = sh < 0 ? 0.0 : pot.grid().radii[sh];
      if (rr < outer.level)
        for (int c = 0; c < d; ++c) hullpts.push_back(data.points[i * d + c]);
    }
    const int nh = static_cast<int>(hullpts.size()) / d;
    for (int k = 0; k < outer.size() && nested; ++k) {
      const Point dir(outer.directions.data() + static_cast<std::size_t>(k) * d,
                      static_cast<std::size_t>(d));
      double h = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < nh; ++i) h = std::max(h, dot(dir, row(hullpts, d, i)));
      for (int i = 0; i < inner.size(); ++i)
        if (dot(dir, row(inner.points, d, i)) > h + tol) {
          nested = false;
          break;
        }
    }
  }
  json r;
  r["name"] = "hausdorff";
  r["property"] = "contour-nesting-and-support-distance";
  r["nested"] = nested;
  if (gen) {
    const SyntheticSource src = make_source(*gen, 0);
    if (src.compact && !contours.empty()) {
      r["hausdorff_boundary"] = hausdorff_distance(
          contours.back().points, src.boundary_points(2048), d);
    }
  }
  r["pass"] = nested;
  return r;
}

json run_ray_test(const Potentials& pot, const Dataset& data,
                  const std::vector<double>& levels, int n_boundary) {
  const bool convex_known =
      data.support_hint && data.support_hint->convex();
  if (data.dim == 1) n_boundary = std::min(n_boundary, 2);
  json per_level = json::array();
  bool pass = true;
  for (const double r : levels) {
    const RayEscapeReport rep =
        ray_escape_test(pot, r, n_boundary, 0.0, convex_known);
    per_level.push_back(json{{"level", r},
                             {"pass_fraction", rep.pass_fraction},
                             {"violations", rep.violations},
                             {"tau", rep.tau},
                             {"contractual", rep.contractual}});
    if (convex_known) pass = pass && rep.pass_fraction == 1.0;
  }
  json r;
  r["name"] = "ray";
  r["property"] = "ray-escape-from-quantile-regions";
  r["mode"] = convex_known ? "contract" : "report-only";
  r["levels"] = per_level;
  r["pass"] = pass;
  return r;
}

json run_invariance_test(const Potentials& pot, const Dataset& data) {
  const int d = data.dim;
  const std::vector<double> dirs = sphere_directions(d == 1 ? 2 : 8, d, 0);
  const std::vector<double> t_list{2, 4, 8, 16, 32, 64, 128};
  const InvarianceReport rep = asymptotic_invariance_test(pot, dirs, t_list);
  const double bound = rep.angular_spacing + rep.radial_spacing;
  json r;
  r["name"] = "invariance";
  r["property"] = "distribution-map-asymptotic-direction";
  r["max_final_error"] = rep.max_final_error;
  r["bound"] = bound;
  r["all_monotone"] = rep.all_monotone;
  r["pass"] = rep.all_monotone && rep.max_final_error <= bound;
  return r;
}

json run_independence_test(const Potentials& pot, const Dataset& data) {
  const RankSignTable table = ranks_signs(pot, data);
  const IndependenceReport rep = rank_sign_independence_test(table);
  json r;
  r["name"] = "independence";
  r["property"] = "rank-sign-factorization";
  r["statistic"] = rep.statistic;
  r["p_value"] = rep.p_value;
  r["excluded_origin"] = rep.excluded_origin;
  r["pass"] = rep.exactly_uniform;
  return r;
}

}  // namespace

RunResult run(const ExperimentConfig& config) {
  // config validation (throws invalid_argument -> exit 2 upstream)
  if (!config.generator && config.input_path.empty())
    throw std::invalid_argument("config: provide a generator or an input path");
  if (config.generator && !config.seed_set)
    throw std::invalid_argument("config: generators require a seed");
  if (config.out_dir.empty())
    throw std::invalid_argument("config: out_dir is required");
  for (const auto& t : config.tests)
    if (!kKnownTests.count(t))
      throw std::invalid_argument("config: unknown test '" + t + "'");
  for (const double r : config.levels)
    if (!(r > 0.0 && r < 1.0))
      throw std::invalid_argument("config: levels must be in (0,1)");
  const bool exact = config.solver.kind == SolverConfig::Kind::Exact;
  if (!exact)
    for (const auto& t : config.tests)
      if (t != "ma")
        throw std::invalid_argument(
            "config: test '" + t + "' requires the exact solver");
  if (config.generator && config.n < 1)
    throw std::invalid_argument("config: n >= 1 required with a generator");

  const auto t0 = std::chrono::steady_clock::now();

  Dataset data = config.generator
                     ? generate(*config.generator, config.n, config.seed)
                     : ingest(config.input_path, config.input_format);
  const int n = data.size();
  const int d = data.dim;
  int n_R = config.n_R, n_S = config.n_S;
  if (n_R <= 0) {
    n_R = std::max(1, static_cast<int>(std::floor(std::sqrt(double(n)))));
    if (d == 1) n_R = std::max(1, n / 2);
    n_S = 0;
  }
  if (n_S <= 0) n_S = d == 1 ? std::min(2, n) : n / n_R;
  const SphericalGrid grid =
      build_grid(n, d, n_R, n_S, derive_seed(config.seed, "grid"));

  const TransportPlan plan =
      exact ? solve_assignment(data, grid)
            : solve_sinkhorn(data, grid, config.solver.epsilon,
                             config.solver.tol, config.solver.max_iter);
  const Potentials pot = build_potentials(plan, data, grid);

  std::vector<double> levels = config.levels;
  std::sort(levels.begin(), levels.end());
  const int n_dirs = config.contour_dirs > 0 ? config.contour_dirs
                                             : std::max(n_S, 64);
  std::vector<QuantileContour> contours;
  if (exact && d >= 2)
    for (const double r : levels) contours.push_back(contour(pot, r, n_dirs));

  json results = json::array();
  for (const auto& t : config.tests) {
    if (t == "inverse") results.push_back(run_inverse_test(pot, data));
    if (t == "boundary") results.push_back(run_boundary_test(pot, data));
    if (t == "ma") {
      if (!config.generator)
        throw std::invalid_argument("config: 'ma' needs an analytic generator");
      results.push_back(run_ma_test(pot, data, *config.generator, config.seed));
    }
    if (t == "hausdorff")
      results.push_back(run_hausdorff_test(pot, data, contours, config.generator));
    if (t == "ray")
      results.push_back(run_ray_test(pot, data, levels, config.ray_points));
    if (t == "invariance") results.push_back(run_invariance_test(pot, data));
    if (t == "independence") results.push_back(run_independence_test(pot, data));
  }
  bool all_pass = true;
  for (const auto& r : results) all_pass = all_pass && r.at("pass").get<bool>();

  // artifacts
  const std::string dir = config.out_dir;
  atomic_write(dir + "/dataset.json", to_json(data).dump(2) + "\n");
  atomic_write(dir + "/grid.json", to_json(grid).dump(2) + "\n");
  atomic_write(dir + "/plan.json", to_json(plan).dump(2) + "\n");
  atomic_write(dir + "/potential.json",
               potential_to_json(pot, "grid.json").dump(2) + "\n");
  if (!contours.empty()) {
    json cj = json::array();
    std::string csv;
    for (const auto& qc : contours) {
      cj.push_back(to_json(qc));
      csv += contour_to_csv(qc);
    }
    atomic_write(dir + "/contours.json", cj.dump(2) + "\n");
    atomic_write(dir + "/contours.csv", csv);
  }

  json report;
  report["config"] = config.config_to_json();
  report["grid"] = json{{"n", n}, {"d", d}, {"n_R", n_R}, {"n_S", n_S},
                        {"origin_copies", grid.origin_copies}};
  report["plan"] = json{{"kind", exact ? "exact-permutation" : "dense-coupling"},
                        {"cost", plan.cost}};
  report["results"] = results;
  report["all_pass"] = all_pass;
  atomic_write(dir + "/report.json", report.dump(2) + "\n");

  const auto t1 = std::chrono::steady_clock::now();
  const auto now = std::chrono::system_clock::now();
  const std::time_t now_t = std::chrono::system_clock::to_time_t(now);
  char stamp[64];
  std::strftime(stamp, sizeof stamp, "%FT%TZ", std::gmtime(&now_t));
  json meta;
  meta["created_at"] = stamp;
  meta["duration_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  atomic_write(dir + "/report.meta.json", meta.dump(2) + "\n");

  RunResult out;
  out.report = report;
  out.exit_code = all_pass ? 0 : 1;
  return out;
}

}  // namespace centerout
