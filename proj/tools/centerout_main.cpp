// centerout: center-outward distribution functions, ranks, signs and
// quantile contours of d-dimensional samples by optimal transport to the
// spherical uniform reference, plus the verification suites.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "centerout/errors.hpp"
#include "centerout/experiment.hpp"

namespace co = centerout;

namespace {

// inline JSON or @file indirection
co::json parse_json_arg(const std::string& arg) {
  if (!arg.empty() && arg[0] == '@')
    return co::json::parse(co::read_file(arg.substr(1)));
  return co::json::parse(arg);
}

int wrap(const std::function<int()>& body) {
  try {
    return body();
  } catch (const co::ParseError& e) {
    std::cerr << co::json{{"error", {{"type", "parse-error"},
                                     {"line", e.line},
                                     {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << co::json{{"error", {{"type", "config-error"},
                                     {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 2;
  } catch (const co::ConvergenceFailure& e) {
    std::cerr << co::json{{"error",
                           {{"type", "convergence-failure"},
                            {"marginal_error", e.marginal_error},
                            {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << co::json{{"error", {{"type", "numeric-error"},
                                     {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 3;
  }
}

std::string tail_lower(const std::string& path) {
  const auto pos = path.find_last_of('.');
  std::string ext = pos == std::string::npos ? "" : path.substr(pos + 1);
  for (auto& c : ext) c = static_cast<char>(std::tolower(c));
  return ext;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"center-outward distribution, ranks and quantile contours"};
  app.require_subcommand(1);

  // ---- generate ----
  auto* cmd_gen = app.add_subcommand("generate", "sample a synthetic dataset");
  std::string gen_spec, gen_out;
  int gen_n = 0;
  std::uint64_t gen_seed = 0;
  cmd_gen->add_option("--spec", gen_spec, "generator spec JSON (or @file)")->required();
  cmd_gen->add_option("--n", gen_n, "sample size")->required();
  cmd_gen->add_option("--seed", gen_seed, "RNG seed")->required();
  cmd_gen->add_option("--out", gen_out, "output path (.csv or .json)")->required();

  // ---- fit ----
  auto* cmd_fit = app.add_subcommand("fit", "solve transport and build potentials");
  std::string fit_input, fit_format = "csv", fit_out_dir, fit_solver = "exact";
  int fit_nr = 0, fit_ns = 0, fit_max_iter = 20000;
  double fit_eps = 0.05, fit_tol = 1e-8;
  std::uint64_t fit_seed = 0;
  cmd_fit->add_option("--input", fit_input, "dataset path")->required();
  cmd_fit->add_option("--format", fit_format, "csv|json");
  cmd_fit->add_option("--n-r", fit_nr, "shell count (0 = auto)");
  cmd_fit->add_option("--n-s", fit_ns, "direction count (0 = auto)");
  cmd_fit->add_option("--solver", fit_solver, "exact|sinkhorn");
  cmd_fit->add_option("--epsilon", fit_eps, "entropic regularization");
  cmd_fit->add_option("--tol", fit_tol, "marginal tolerance");
  cmd_fit->add_option("--max-iter", fit_max_iter, "iteration cap");
  cmd_fit->add_option("--seed", fit_seed, "RNG seed");
  cmd_fit->add_option("--out-dir", fit_out_dir, "artifact directory")->required();

  // ---- contours ----
  auto* cmd_cont = app.add_subcommand("contours", "emit quantile contours");
  std::string cont_dir;
  std::vector<double> cont_levels{0.25, 0.5, 0.75};
  int cont_dirs = 0;
  cmd_cont->add_option("--dir", cont_dir, "fit artifact directory")->required();
  cmd_cont->add_option("--levels", cont_levels, "probability levels")->delimiter(',');
  cmd_cont->add_option("--dirs", cont_dirs, "directions per contour (0 = auto)");

  // ---- verify ----
  auto* cmd_ver = app.add_subcommand("verify", "run test suites and a report");
  std::string ver_config, ver_generator, ver_input, ver_format = "csv", ver_out;
  std::vector<std::string> ver_tests;
  std::vector<double> ver_levels;
  int ver_n = 0, ver_nr = 0, ver_ns = 0, ver_ray = 200, ver_cdirs = 0;
  std::string ver_solver = "exact";
  double ver_eps = 0.05, ver_tol = 1e-8;
  int ver_max_iter = 20000;
  std::uint64_t ver_seed = 0;
  bool ver_seed_set = false;
  cmd_ver->add_option("--config", ver_config, "experiment config JSON (or @file)");
  cmd_ver->add_option("--generator", ver_generator, "generator spec JSON (or @file)");
  cmd_ver->add_option("--input", ver_input, "dataset path");
  cmd_ver->add_option("--format", ver_format, "csv|json");
  cmd_ver->add_option("--n", ver_n, "sample size (generator)");
  cmd_ver->add_option("--n-r", ver_nr, "shell count (0 = auto)");
  cmd_ver->add_option("--n-s", ver_ns, "direction count (0 = auto)");
  cmd_ver->add_option("--solver", ver_solver, "exact|sinkhorn");
  cmd_ver->add_option("--epsilon", ver_eps, "entropic regularization");
  cmd_ver->add_option("--tol", ver_tol, "marginal tolerance");
  cmd_ver->add_option("--max-iter", ver_max_iter, "iteration cap");
  cmd_ver->add_option("--levels", ver_levels, "contour levels")->delimiter(',');
  cmd_ver->add_option("--tests", ver_tests, "test subset")->delimiter(',');
  cmd_ver->add_option("--ray-points", ver_ray, "boundary probes per level");
  cmd_ver->add_option("--contour-dirs", ver_cdirs, "contour directions");
  cmd_ver->add_option("--seed", ver_seed, "RNG seed")
      ->each([&](const std::string&) { ver_seed_set = true; });
  cmd_ver->add_option("--out-dir", ver_out, "artifact directory");

  // ---- report ----
  auto* cmd_rep = app.add_subcommand("report", "summarize a report.json");
  std::string rep_dir;
  cmd_rep->add_option("--dir", rep_dir, "experiment directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (cmd_gen->parsed()) {
    return wrap([&]() {
      const co::GeneratorSpec spec =
          co::generator_from_json(parse_json_arg(gen_spec));
      const co::Dataset data = co::generate(spec, gen_n, gen_seed);
      if (tail_lower(gen_out) == "json") {
        co::atomic_write(gen_out, co::to_json(data).dump(2) + "\n");
      } else {
        std::string csv;
        csv.reserve(data.points.size() * 24);
        char buf[64];
        for (int i = 0; i < data.size(); ++i) {
          for (int c = 0; c < data.dim; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", data.points[i * data.dim + c]);
            csv += buf;
            csv += c + 1 == data.dim ? '\n' : ',';
          }
        }
        co::atomic_write(gen_out, csv);
      }
      return 0;
    });
  }

  if (cmd_fit->parsed()) {
    return wrap([&]() {
      const co::Dataset data = co::ingest(fit_input, fit_format);
      const int n = data.size(), d = data.dim;
      int n_R = fit_nr, n_S = fit_ns;
      if (n_R <= 0) {
        n_R = std::max(1, static_cast<int>(std::sqrt(double(n))));
        if (d == 1) n_R = std::max(1, n / 2);
        n_S = 0;
      }
      if (n_S <= 0) n_S = d == 1 ? std::min(2, n) : n / n_R;
      const co::SphericalGrid grid =
          co::build_grid(n, d, n_R, n_S, co::derive_seed(fit_seed, "grid"));
      co::TransportPlan plan;
      if (fit_solver == "exact") {
        plan = co::solve_assignment(data, grid);
      } else if (fit_solver == "sinkhorn") {
        plan = co::solve_sinkhorn(data, grid, fit_eps, fit_tol, fit_max_iter);
      } else {
        throw std::invalid_argument("fit: solver must be exact or sinkhorn");
      }
      const co::Potentials pot = co::build_potentials(plan, data, grid);
      co::atomic_write(fit_out_dir + "/dataset.json", co::to_json(data).dump(2) + "\n");
      co::atomic_write(fit_out_dir + "/grid.json", co::to_json(grid).dump(2) + "\n");
      co::atomic_write(fit_out_dir + "/plan.json", co::to_json(plan).dump(2) + "\n");
      co::atomic_write(fit_out_dir + "/potential.json",
                       co::potential_to_json(pot, "grid.json").dump(2) + "\n");
      return 0;
    });
  }

  if (cmd_cont->parsed()) {
    return wrap([&]() {
      const co::Dataset data =
          co::dataset_from_json(co::json::parse(co::read_file(cont_dir + "/dataset.json")));
      const co::SphericalGrid grid =
          co::grid_from_json(co::json::parse(co::read_file(cont_dir + "/grid.json")));
      const co::TransportPlan plan =
          co::plan_from_json(co::json::parse(co::read_file(cont_dir + "/plan.json")));
      const co::Potentials pot = co::build_potentials(plan, data, grid);
      const int nd = cont_dirs > 0 ? cont_dirs : std::max(grid.n_directions(), 64);
      co::json cj = co::json::array();
      std::string csv;
      for (const double r : cont_levels) {
        const co::QuantileContour qc = co::contour(pot, r, nd);
        cj.push_back(co::to_json(qc));
        csv += co::contour_to_csv(qc);
      }
      co::atomic_write(cont_dir + "/contours.json", cj.dump(2) + "\n");
      co::atomic_write(cont_dir + "/contours.csv", csv);
      return 0;
    });
  }

  if (cmd_ver->parsed()) {
    return wrap([&]() {
      co::ExperimentConfig cfg;
      if (!ver_config.empty()) {
        cfg = co::ExperimentConfig::config_from_json(parse_json_arg(ver_config));
      } else {
        if (!ver_generator.empty())
          cfg.generator = co::generator_from_json(parse_json_arg(ver_generator));
        cfg.input_path = ver_input;
        cfg.input_format = ver_format;
        cfg.n = ver_n;
        cfg.n_R = ver_nr;
        cfg.n_S = ver_ns;
        if (ver_solver == "sinkhorn") {
          cfg.solver.kind = co::SolverConfig::Kind::Sinkhorn;
          cfg.solver.epsilon = ver_eps;
          cfg.solver.tol = ver_tol;
          cfg.solver.max_iter = ver_max_iter;
        } else if (ver_solver != "exact") {
          throw std::invalid_argument("verify: solver must be exact or sinkhorn");
        }
        if (!ver_levels.empty()) cfg.levels = ver_levels;
        cfg.tests = ver_tests;
        cfg.seed = ver_seed;
        cfg.seed_set = ver_seed_set;
        cfg.ray_points = ver_ray;
        cfg.contour_dirs = ver_cdirs;
        cfg.out_dir = ver_out;
      }
      if (cfg.out_dir.empty()) cfg.out_dir = ver_out;
      const co::RunResult res = co::run(cfg);
      std::cout << res.report.dump(2) << "\n";
      return res.exit_code;
    });
  }

  if (cmd_rep->parsed()) {
    return wrap([&]() {
      const co::json report =
          co::json::parse(co::read_file(rep_dir + "/report.json"));
      const bool all = report.at("all_pass").get<bool>();
      std::printf("experiment: %s\n", rep_dir.c_str());
      for (const auto& r : report.at("results")) {
        std::printf("  [%s] %-14s %s\n",
                    r.at("pass").get<bool>() ? "PASS" : "FAIL",
                    r.at("name").get<std::string>().c_str(),
                    r.at("property").get<std::string>().c_str());
      }
      std::printf("overall: %s\n", all ? "PASS" : "FAIL");
      return all ? 0 : 1;
    });
  }
  return 0;
}
