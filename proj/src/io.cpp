#include "centerout/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "centerout/errors.hpp"

namespace centerout {

namespace {

std::vector<std::vector<double>> to_rows(const std::vector<double>& buf, int dim) {
  std::vector<std::vector<double>> rows;
  const int n = static_cast<int>(buf.size()) / dim;
  rows.reserve(n);
  for (int i = 0; i < n; ++i)
    rows.emplace_back(buf.begin() + static_cast<std::ptrdiff_t>(i) * dim,
                      buf.begin() + static_cast<std::ptrdiff_t>(i + 1) * dim);
  return rows;
}

std::vector<double> from_rows(const json& j, int& dim, const char* what) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument(std::string(what) + ": expected nonempty array");
  std::vector<double> buf;
  dim = -1;
  for (const auto& r : j) {
    if (!r.is_array())
      throw std::invalid_argument(std::string(what) + ": expected array rows");
    if (dim < 0) dim = static_cast<int>(r.size());
    if (static_cast<int>(r.size()) != dim)
      throw std::invalid_argument(std::string(what) + ": ragged rows");
    for (const auto& v : r) buf.push_back(v.get<double>());
  }
  return buf;
}

double round12(double x) {
  if (x == 0.0) return 0.0;
  return std::round(x * 1e12) / 1e12;
}

}  // namespace

json to_json(const SphericalGrid& grid) {
  json j;
  j["dim"] = grid.dim;
  j["radii"] = grid.radii;
  j["directions"] = to_rows(grid.directions, grid.dim);
  j["origin_copies"] = grid.origin_copies;
  return j;
}

SphericalGrid grid_from_json(const json& j) {
  const int d = j.at("dim").get<int>();
  const std::vector<double> radii = j.at("radii").get<std::vector<double>>();
  int dd = d;
  std::vector<double> dirs = from_rows(j.at("directions"), dd, "grid directions");
  if (dd != d) throw std::invalid_argument("grid: direction dimension mismatch");
  const int n_R = static_cast<int>(radii.size());
  const int n_S = static_cast<int>(dirs.size()) / d;
  const int n0 = j.at("origin_copies").get<int>();

  SphericalGrid g;
  g.dim = d;
  g.radii = radii;
  g.directions = std::move(dirs);
  g.origin_copies = n0;
  const int n = n_R * n_S + n0;
  g.atoms.assign(static_cast<std::size_t>(n) * d, 0.0);
  g.radius_index.assign(n, -1);
  g.direction_index.assign(n, -1);
  int a = 0;
  for (int i = 0; i < n_R; ++i)
    for (int k = 0; k < n_S; ++k, ++a) {
      for (int c = 0; c < d; ++c)
        g.atoms[static_cast<std::size_t>(a) * d + c] =
            g.radii[i] * g.directions[static_cast<std::size_t>(k) * d + c];
      g.radius_index[a] = i;
      g.direction_index[a] = k;
    }
  return g;
}

json to_json(const TransportPlan& plan) {
  json j;
  if (plan.kind == TransportPlan::Kind::ExactPermutation) {
    j["kind"] = "exact-permutation";
    j["sigma"] = plan.assignment;
  } else {
    j["kind"] = "dense-coupling";
    std::vector<double> rounded(plan.coupling.size());
    for (std::size_t i = 0; i < plan.coupling.size(); ++i)
      rounded[i] = round12(plan.coupling[i]);
    j["coupling"] = rounded;
    j["iterations"] = plan.iterations;
    j["marginal_error"] = plan.marginal_error;
  }
  j["duals"] = json{{"f", plan.f}, {"g", plan.g}};
  j["cost"] = plan.cost;
  return j;
}

TransportPlan plan_from_json(const json& j) {
  TransportPlan p;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "exact-permutation") {
    p.kind = TransportPlan::Kind::ExactPermutation;
    p.assignment = j.at("sigma").get<std::vector<int>>();
  } else if (kind == "dense-coupling") {
    p.kind = TransportPlan::Kind::DenseCoupling;
    p.coupling = j.at("coupling").get<std::vector<double>>();
    p.iterations = j.value("iterations", 0);
    p.marginal_error = j.value("marginal_error", 0.0);
  } else {
    throw std::invalid_argument("plan: unknown kind " + kind);
  }
  p.f = j.at("duals").at("f").get<std::vector<double>>();
  p.g = j.at("duals").at("g").get<std::vector<double>>();
  p.cost = j.at("cost").get<double>();
  return p;
}

json to_json(const Dataset& data) {
  json j;
  j["dim"] = data.dim;
  j["points"] = to_rows(data.points, data.dim);
  if (data.support_hint) {
    json h;
    switch (data.support_hint->kind) {
      case SupportHint::Kind::HalfSpaces: {
        h["kind"] = "halfspaces";
        json hs = json::array();
        for (const auto& half : data.support_hint->halfspaces)
          hs.push_back(json{{"normal", half.normal}, {"offset", half.offset}});
        h["halfspaces"] = hs;
        break;
      }
      case SupportHint::Kind::Unbounded:
        h["kind"] = "unbounded";
        break;
      case SupportHint::Kind::NonConvex:
        h["kind"] = "nonconvex";
        break;
    }
    j["support_hint"] = h;
  } else {
    j["support_hint"] = nullptr;
  }
  return j;
}

Dataset dataset_from_json(const json& j) {
  Dataset d;
  d.dim = j.at("dim").get<int>();
  int dd = d.dim;
  d.points = from_rows(j.at("points"), dd, "dataset points");
  if (dd != d.dim) throw std::invalid_argument("dataset: dimension mismatch");
  if (j.contains("support_hint") && !j.at("support_hint").is_null()) {
    const json& h = j.at("support_hint");
    SupportHint hint;
    const std::string kind = h.at("kind").get<std::string>();
    if (kind == "halfspaces") {
      hint.kind = SupportHint::Kind::HalfSpaces;
      for (const auto& half : h.at("halfspaces")) {
        HalfSpace hs;
        hs.normal = half.at("normal").get<std::vector<double>>();
        hs.offset = half.at("offset").get<double>();
        hint.halfspaces.push_back(std::move(hs));
      }
    } else if (kind == "unbounded") {
      hint.kind = SupportHint::Kind::Unbounded;
    } else if (kind == "nonconvex") {
      hint.kind = SupportHint::Kind::NonConvex;
    } else {
      throw std::invalid_argument("dataset: unknown support hint " + kind);
    }
    d.support_hint = hint;
  }
  validate(d);
  return d;
}

json potential_to_json(const Potentials& pot, const std::string& grid_ref) {
  json j;
  j["grid_ref"] = grid_ref;
  j["psi"] = pot.discrete.psi;
  json lines = json::array();
  const int d = pot.dim();
  for (int b = 0; b < pot.extended.size(); ++b) {
    json line;
    line["u_b"] = std::vector<double>(
        pot.extended.base.begin() + static_cast<std::ptrdiff_t>(b) * d,
        pot.extended.base.begin() + static_cast<std::ptrdiff_t>(b + 1) * d);
    line["y_b"] = std::vector<double>(
        pot.extended.slope.begin() + static_cast<std::ptrdiff_t>(b) * d,
        pot.extended.slope.begin() + static_cast<std::ptrdiff_t>(b + 1) * d);
    line["c"] = pot.extended.intercept[b];
    lines.push_back(std::move(line));
  }
  j["lines"] = lines;
  return j;
}

json to_json(const Region& region) {
  json j;
  switch (region.kind) {
    case Region::Kind::Ball:
      j["kind"] = "ball";
      j["center"] = region.center;
      j["radius"] = region.radius;
      j["inner_radius"] = region.inner_radius;
      break;
    case Region::Kind::Box:
      j["kind"] = "box";
      j["lo"] = region.lo;
      j["hi"] = region.hi;
      break;
    case Region::Kind::Points:
      j["kind"] = "points";
      j["points"] = to_rows(region.pts, region.dim());
      j["radius"] = region.point_radius;
      break;
  }
  return j;
}

Region region_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "ball")
    return Region::ball(j.at("center").get<std::vector<double>>(),
                        j.at("radius").get<double>(),
                        j.value("inner_radius", 0.0));
  if (kind == "box")
    return Region::box(j.at("lo").get<std::vector<double>>(),
                       j.at("hi").get<std::vector<double>>());
  if (kind == "points") {
    int dim = 0;
    std::vector<double> pts = from_rows(j.at("points"), dim, "region points");
    return Region::point_set(std::move(pts), dim, j.at("radius").get<double>());
  }
  throw std::invalid_argument("region: unknown kind " + kind);
}

json to_json(const QuantileContour& contour) {
  json j;
  j["level"] = contour.level;
  j["interpolated"] = contour.interpolated;
  j["closed"] = contour.closed;
  j["dir_index"] = contour.dir_index;
  j["directions"] = to_rows(contour.directions, contour.dim);
  j["points"] = to_rows(contour.points, contour.dim);
  return j;
}

json to_json(const MAEstimate& est) {
  json j;
  j["region"] = to_json(est.region);
  j["value_subdiff"] = est.value_subdiff;
  j["value_formula"] = est.value_formula;
  j["se"] = std::sqrt(est.se_formula * est.se_formula +
                      est.se_subdiff * est.se_subdiff);
  j["se_formula"] = est.se_formula;
  j["se_subdiff"] = est.se_subdiff;
  j["n_mc"] = est.n_mc;
  j["warning"] = est.warning;
  j["method"] = est.method;
  return j;
}

std::string contour_to_csv(const QuantileContour& contour) {
  std::ostringstream out;
  out.precision(17);
  const int d = contour.dim;
  for (int i = 0; i < contour.size(); ++i) {
    out << contour.level << ',' << contour.dir_index[i];
    for (int c = 0; c < d; ++c) out << ',' << contour.points[i * d + c];
    out << '\n';
  }
  return out.str();
}

Dataset ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("ingest: cannot open " + path);
  Dataset data;
  std::string line;
  long lineno = 0;
  int dim = -1;
  std::vector<std::vector<double>> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> rowvals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
          ++used;
        if (used != cell.size())
          throw ParseError("ingest: trailing characters in numeric cell", lineno);
        if (!std::isfinite(v))
          throw ParseError("ingest: non-finite value", lineno);
        rowvals.push_back(v);
      } catch (const ParseError&) {
        throw;
      } catch (const std::exception&) {
        throw ParseError("ingest: cannot parse number '" + cell + "'", lineno);
      }
    }
    if (rowvals.empty()) throw ParseError("ingest: empty row", lineno);
    if (dim < 0) dim = static_cast<int>(rowvals.size());
    if (static_cast<int>(rowvals.size()) != dim)
      throw ParseError("ingest: ragged row", lineno);
    seen.push_back(rowvals);
    data.points.insert(data.points.end(), rowvals.begin(), rowvals.end());
  }
  if (dim < 1) throw ParseError("ingest: no data rows", lineno);
  data.dim = dim;
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 1; i < seen.size(); ++i)
    if (seen[i] == seen[i - 1]) ++data.duplicate_rows;
  validate(data);
  return data;
}

Dataset ingest_json(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("ingest: ") + e.what(), 0);
  }
  Dataset data;
  int dim = 0;
  try {
    data.points = from_rows(j, dim, "ingest");
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), 0);
  }
  data.dim = dim;
  for (double v : data.points)
    if (!std::isfinite(v)) throw ParseError("ingest: non-finite value", 0);
  std::vector<std::vector<double>> seen = to_rows(data.points, dim);
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 1; i < seen.size(); ++i)
    if (seen[i] == seen[i - 1]) ++data.duplicate_rows;
  validate(data);
  return data;
}

Dataset ingest(const std::string& path, const std::string& format) {
  if (format == "csv") return ingest_csv(path);
  if (format == "json") return ingest_json(path);
  throw std::invalid_argument("ingest: format must be csv or json");
}

void atomic_write(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("atomic_write: write failed " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("read_file: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace centerout
