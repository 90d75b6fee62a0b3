#pragma once

#include <optional>
#include <string>
#include <vector>

#include "centerout/generators.hpp"
#include "centerout/io.hpp"

namespace centerout {

struct SolverConfig {
  enum class Kind { Exact, Sinkhorn };
  Kind kind = Kind::Exact;
  double epsilon = 0.05;
  double tol = 1e-8;
  int max_iter = 20000;
};

// One experiment = one directory of artifacts. Identical config and seed
// give byte-identical artifacts; wall-clock metadata goes to a sidecar.
struct ExperimentConfig {
  std::optional<GeneratorSpec> generator;
  std::string input_path;  // used when no generator is given
  std::string input_format = "csv";
  int n = 0;        // sample size for generators
  int n_R = 0;      // 0 derives ~sqrt(n)
  int n_S = 0;
  SolverConfig solver;
  std::vector<double> levels{0.25, 0.5, 0.75};
  std::vector<std::string> tests;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  int contour_dirs = 0;  // 0 derives max(n_S, 64)
  int ray_points = 200;

  // strict: unknown keys are rejected
  static ExperimentConfig config_from_json(const json& j);
  json config_to_json() const;
};

GeneratorSpec generator_from_json(const json& j);
json generator_to_json(const GeneratorSpec& spec);

struct RunResult {
  int exit_code = 0;  // 0 pass, 1 test failure, 2 config error, 3 numeric
  json report;
};

// Full pipeline: data, grid, plan, potentials, contours, selected test
// suites; writes all artifacts plus report.json under out_dir. Throws
// std::invalid_argument for config errors and NumericError-family errors
// for numeric failures (callers map them to exit codes 2 and 3).
RunResult run(const ExperimentConfig& config);

}  // namespace centerout
