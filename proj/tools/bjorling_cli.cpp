#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "bjorling/pipeline.hpp"

namespace fs = std::filesystem;
using namespace bjorling;

namespace {

int report_config_failure(const std::string& command, const std::string& message, const RunOptions& opt) {
  std::cerr << "error: " << message << "\n";
  json report = {{"schema_version", 1},
                 {"command", command},
                 {"config_hash", ""},
                 {"flip_normal", opt.flip_normal},
                 {"status", "config_error"},
                 {"exit_code", kExitConfig},
                 {"stage_reached", "config"},
                 {"error", message}};
  try {
    detail::write_report(report, opt.output_dir / "report.json");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kExitConfig;
}

void print_summary(const RunResult& r) {
  const json& rep = r.report;
  std::cout << "status: " << rep.value("status", std::string("?")) << " (exit " << r.exit_code << ")\n";
  if (rep.contains("error")) std::cout << "error: " << rep["error"].get<std::string>() << "\n";
  if (rep.contains("checks")) {
    for (const json& c : rep["checks"]) {
      char buf[160];
      const double v = c["value"].is_null() ? std::nan("") : c["value"].get<double>();
      const double t = c["threshold"].is_null() ? std::nan("") : c["threshold"].get<double>();
      std::snprintf(buf, sizeof buf, "  %-26s %12.4e  (threshold %.1e)  %s\n", c["name"].get<std::string>().c_str(),
                    v, t, c["passed"].get<bool>() ? "ok" : "FAIL");
      std::cout << buf;
    }
  }
  std::cout << "report: " << r.report_path.string() << "\n";
}

void list_models() {
  for (const std::string& name : builtin_model_names()) {
    const LieGroupModel m = builtin_model(name);
    std::cout << name << "\n  chart:";
    for (int i = 0; i < 3; ++i) {
      std::cout << " x" << i + 1 << " in (" << m.chart[i].lo << ", " << m.chart[i].hi << ")";
    }
    std::cout << "\n  L:";
    int nonzero = 0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
          if (m.connection[i][j][k] == 0.0) continue;
          std::cout << " L^" << i + 1 << "_" << j + 1 << k + 1 << "=" << m.connection[i][j][k];
          ++nonzero;
        }
      }
    }
    if (nonzero == 0) std::cout << " all zero";
    std::cout << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bjorling problem solver for minimal surfaces in three-dimensional Lie groups"};
  app.require_subcommand(1);
  RunOptions opt;
  std::string output_dir = ".";
  int threads = 0;
  app.add_option("--output-dir", output_dir, "Directory for reports, meshes and dumps")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads (default: BJORLING_THREADS or 1)");
  app.add_flag("--flip-normal", opt.flip_normal, "Use the opposite orientation for the initial normal");

  std::string config_path, dump_path;
  auto* solve = app.add_subcommand("solve", "Solve a configured job");
  solve->add_option("config", config_path, "Job config (JSON)")->required();
  auto* verify = app.add_subcommand("verify", "Verify a stored field dump");
  verify->add_option("dump", dump_path, "Field dump (CSV)")->required();
  verify->add_option("--config", config_path, "Job config (JSON)")->required();
  auto* oracle = app.add_subcommand("oracle-compare", "Compare a Euclidean solve with the closed-form solution");
  oracle->add_option("config", config_path, "Job config (JSON)")->required();
  double oracle_tol = 1e-6;
  oracle->add_option("--tolerance", oracle_tol, "Largest accepted node distance")->capture_default_str();
  app.add_subcommand("list-models", "List built-in models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  opt.output_dir = output_dir;
  opt.threads = resolve_threads(threads);

  if (app.got_subcommand("list-models")) {
    list_models();
    return kExitPass;
  }

  JobConfig cfg;
  try {
    cfg = load_job_config(config_path);
  } catch (const Error& e) {
    return report_config_failure(app.get_subcommands().front()->get_name(), e.what(), opt);
  }

  try {
    fs::create_directories(opt.output_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: cannot create output directory: " << e.what() << "\n";
    return kExitConfig;
  }

  if (app.got_subcommand("solve")) {
    const RunResult r = run_solve(cfg, opt);
    print_summary(r);
    return r.exit_code;
  }
  if (app.got_subcommand("verify")) {
    const RunResult r = run_verify(dump_path, cfg, opt);
    print_summary(r);
    return r.exit_code;
  }

  // oracle-compare
  try {
    const LieGroupModel model = load_model(cfg.model);
    const BjorlingData data = make_bjorling_data(cfg.data);
    const StripGrid grid = grid_from_config(cfg);
    SolveConfig sc = cfg.solver;
    sc.threads = opt.threads;
    const SpinorField field =
        evolve_strip(initial_spinor_row(data, model, grid, cfg.flip_normal || opt.flip_normal), model.connection,
                     grid, sc);
    const SurfacePatch patch = reconstruct(data.curve, field, model, opt.threads);
    SurfacePatch closed = euclidean_schwarz_oracle(data, model, grid);
    closed.trusted = patch.trusted;
    const ResidualReport d = patch_distance(patch, closed);
    std::printf("max node distance %.6e at (%d, %d) over %zu trusted nodes (tolerance %.1e)\n", d.max,
                d.worst_node[0], d.worst_node[1], d.evaluated_nodes, oracle_tol);
    return d.max <= oracle_tol ? kExitPass : kExitVerification;
  } catch (const SolverAbort& e) {
    std::cerr << "solver abort at v=" << e.v_reached() << ": " << e.what() << "\n";
    return kExitAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
