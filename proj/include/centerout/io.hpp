#pragma once

#include <string>

#include <json.hpp>

#include "centerout/dataset.hpp"
#include "centerout/monge_ampere.hpp"
#include "centerout/ot.hpp"
#include "centerout/potential.hpp"
#include "centerout/quantiles.hpp"
#include "centerout/reference.hpp"

namespace centerout {

using json = nlohmann::json;

// schemas
json to_json(const SphericalGrid& grid);
SphericalGrid grid_from_json(const json& j);

json to_json(const TransportPlan& plan);  // couplings rounded to 1e-12
TransportPlan plan_from_json(const json& j);

json to_json(const Dataset& data);
Dataset dataset_from_json(const json& j);

// {grid_ref, psi[], lines[{u_b, y_b, c}]}
json potential_to_json(const Potentials& pot, const std::string& grid_ref);

json to_json(const Region& region);
Region region_from_json(const json& j);

json to_json(const QuantileContour& contour);
json to_json(const MAEstimate& est);

std::string contour_to_csv(const QuantileContour& contour);

// CSV rows of coordinates, headerless; throws ParseError with line numbers.
Dataset ingest_csv(const std::string& path);
// JSON array-of-arrays, same dataset as the equivalent CSV.
Dataset ingest_json(const std::string& path);
Dataset ingest(const std::string& path, const std::string& format);

// write-temp-rename; creates parent directories
void atomic_write(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

}  // namespace centerout
