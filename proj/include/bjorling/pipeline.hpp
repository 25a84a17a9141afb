#pragma once

// End-to-end jobs: validate -> initial spinor -> march -> reconstruct ->
// verify -> export, with a JSON report written at every exit.

#include <filesystem>
#include <fstream>
#include <string>

#include "bjorling/bjorling.hpp"
#include "bjorling/ck_solver.hpp"
#include "bjorling/io.hpp"
#include "bjorling/surface.hpp"
#include "bjorling/verify.hpp"

namespace bjorling {

enum ExitCode : int { kExitPass = 0, kExitConfig = 1, kExitVerification = 2, kExitAbort = 3 };

struct RunOptions {
  std::filesystem::path output_dir = ".";
  int threads = 1;
  /// Overrides the config's flip_normal when set.
  bool flip_normal = false;
  /// Skip writing files (reports are still returned).
  bool dry_run = false;
};

struct RunResult {
  int exit_code = kExitPass;
  json report;
  std::filesystem::path report_path;
};

namespace detail {

inline const char* status_name(int code) {
  switch (code) {
    case kExitPass: return "pass";
    case kExitConfig: return "config_error";
    case kExitVerification: return "verification_failed";
    default: return "solver_abort";
  }
}

inline std::filesystem::path output_path(const RunOptions& opt, const std::string& name) {
  const std::filesystem::path p(name);
  return p.is_absolute() ? p : opt.output_dir / p;
}

inline void write_report(const json& report, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write report '" + path.string() + "'");
  out << report.dump(2) << "\n";
}

/// Shared state of a job while it runs, so a report can be emitted from any stage.
struct Job {
  json report;
  std::string stage = "config";

  int finish(int code, const std::string& error = {}) {
    report["exit_code"] = code;
    report["status"] = status_name(code);
    report["stage_reached"] = stage;
    if (!error.empty()) report["error"] = error;
    return code;
  }
};

inline json grid_json(const StripGrid& g) {
  return {{"n_u", g.n_u},
          {"n_v", g.n_v},
          {"epsilon", g.epsilon},
          {"u_range", {g.u_min, g.u_max}},
          {"periodic", g.periodic},
          {"h_u", g.h_u()},
          {"h_v", g.h_v()}};
}

/// Reconstruction, verification and export shared by solve and verify.
inline int finish_from_field(Job& job, const JobConfig& cfg, const LieGroupModel& model, const BjorlingData& data,
                             const SpinorField& field, const RunOptions& opt) {
  job.stage = "reconstruct";
  SurfacePatch patch = reconstruct(data.curve, field, model, opt.threads);
  patch.config_hash = job.report["config_hash"].get<std::string>();

  job.stage = "verify";
  VerificationReport vr;
  try {
    vr = verify_solution(field, patch, data, model, cfg.thresholds, opt.threads);
  } catch (const ValidationError& e) {
    return job.finish(kExitVerification, e.what());
  }
  job.report["residuals"] = to_json(vr);
  job.report["checks"] = checks_to_json(vr.checks);

  job.stage = "export";
  if (!opt.dry_run) {
    if (!cfg.outputs.mesh.empty()) {
      const GaussMap gm = gauss_map(patch, model);
      export_mesh(patch, cfg.outputs.mesh_format, output_path(opt, cfg.outputs.mesh).string(), &gm.normal);
    }
    if (!cfg.outputs.patch_csv.empty()) write_patch_csv(patch, output_path(opt, cfg.outputs.patch_csv).string());
  }
  job.stage = "done";
  return job.finish(vr.passed() ? kExitPass : kExitVerification);
}

inline RunResult complete(Job& job, int code, const std::string& report_name, const RunOptions& opt) {
  RunResult r;
  r.exit_code = code;
  r.report = job.report;
  r.report_path = output_path(opt, report_name);
  if (!opt.dry_run) write_report(r.report, r.report_path);
  return r;
}

}  // namespace detail

/// Solves a configured job. Never throws for job-level failures; the exit
/// code and report describe them.
inline RunResult run_solve(const JobConfig& cfg, const RunOptions& opt = {}) {
  detail::Job job;
  job.report = {{"schema_version", 1}, {"command", "solve"}, {"config_hash", config_hash(cfg)}};
  const bool flip = cfg.flip_normal || opt.flip_normal;
  job.report["flip_normal"] = flip;
  int code = kExitPass;
  try {
    job.stage = "config";
    const LieGroupModel model = load_model(cfg.model);
    const BjorlingData data = make_bjorling_data(cfg.data);
    const StripGrid grid = grid_from_config(cfg);
    job.report["model"] = model.name;
    job.report["data"] = data.name;
    job.report["grid"] = detail::grid_json(grid);
    job.report["warnings"] = model.warnings;

    job.stage = "validate";
    const DataCertificate cert = validate(data, model, cfg.validate_samples);
    job.report["data_certificate"] = to_json(cert);
    if (!cert.valid()) return detail::complete(job, job.finish(kExitConfig, cert.violations.front()), cfg.outputs.report, opt);

    job.stage = "solve";
    const std::vector<Spinor> psi0 = initial_spinor_row(data, model, grid, flip);
    SolveConfig sc = cfg.solver;
    sc.threads = opt.threads;
    SolveDiagnostics diag;
    SpinorField field;
    try {
      field = evolve_strip(psi0, model.connection, grid, sc, &diag);
    } catch (const SolverAbort& e) {
      job.report["abort"] = {{"message", e.what()}, {"v_reached", e.v_reached()}};
      return detail::complete(job, job.finish(kExitAbort, e.what()), cfg.outputs.report, opt);
    }
    job.report["solver"] = {{"scheme", scheme_name(diag.scheme)},
                            {"formulation", sc.formulation == Formulation::Reduced ? "reduced" : "all-three"},
                            {"filter", sc.filter},
                            {"noise_floor", sc.noise_floor},
                            {"max_growth_factor", sc.max_growth_factor},
                            {"trust_margin", sc.trust_margin},
                            {"steps", diag.steps},
                            {"max_growth", diag.max_growth},
                            {"untrusted_nodes", diag.untrusted_nodes}};
    if (!opt.dry_run && !cfg.outputs.field_dump.empty()) {
      write_field_csv(field, detail::output_path(opt, cfg.outputs.field_dump).string());
    }
    code = detail::finish_from_field(job, cfg, model, data, field, opt);
  } catch (const ConfigError& e) {
    code = job.finish(kExitConfig, e.what());
  } catch (const ParseError& e) {
    code = job.finish(kExitConfig, e.what());
  } catch (const ValidationError& e) {
    code = job.finish(job.stage == "config" || job.stage == "validate" || job.stage == "solve" ? kExitConfig
                                                                                              : kExitVerification,
                      e.what());
  } catch (const std::exception& e) {
    code = job.finish(kExitConfig, e.what());
  }
  return detail::complete(job, code, cfg.outputs.report, opt);
}

/// Re-runs reconstruction and verification on a stored field dump.
inline RunResult run_verify(const std::string& dump_path, const JobConfig& cfg, const RunOptions& opt = {}) {
  detail::Job job;
  job.report = {{"schema_version", 1}, {"command", "verify"}, {"config_hash", config_hash(cfg)}};
  job.report["flip_normal"] = cfg.flip_normal || opt.flip_normal;
  int code = kExitPass;
  try {
    const LieGroupModel model = load_model(cfg.model);
    const BjorlingData data = make_bjorling_data(cfg.data);
    const StripGrid grid = grid_from_config(cfg);
    job.report["model"] = model.name;
    job.report["data"] = data.name;
    job.report["grid"] = detail::grid_json(grid);
    job.report["warnings"] = model.warnings;
    job.stage = "load";
    const SpinorField field = read_field_csv(dump_path, grid);
    code = detail::finish_from_field(job, cfg, model, data, field, opt);
  } catch (const ConfigError& e) {
    code = job.finish(kExitConfig, e.what());
  } catch (const ParseError& e) {
    code = job.finish(kExitConfig, e.what());
  } catch (const ValidationError& e) {
    code = job.finish(job.stage == "config" || job.stage == "load" ? kExitConfig : kExitVerification, e.what());
  } catch (const std::exception& e) {
    code = job.finish(kExitConfig, e.what());
  }
  return detail::complete(job, code, cfg.outputs.report, opt);
}

}  // namespace bjorling
