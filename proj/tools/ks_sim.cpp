// Command-line driver: run one scenario, sweep a family of C0 values, or
// generate/inspect macroelement meshes.
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ks/scenario.hpp"
#include "ks/vtk.hpp"

namespace {

struct Flags {
  std::string scenario = "nonblowup";
  std::optional<int> nsquare;
  std::optional<std::string> macro;
  std::optional<double> k;
  std::optional<int> steps;
  std::optional<double> c0;
  std::optional<double> cu;
  std::optional<double> cv;
  std::optional<std::string> out;
  std::optional<std::string> snapshots;
  std::optional<std::string> solver;
  std::optional<double> linear_tol;
};

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) values.push_back(std::stoi(item));
  return values;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) values.push_back(std::stod(item));
  return values;
}

ks::Scenario scenario_from_flags(const Flags& f) {
  ks::Scenario s;
  if (f.scenario == "nonblowup") {
    s = ks::Scenario::non_blowup_preset();
  } else if (f.scenario == "blowup") {
    s = ks::Scenario::blowup_preset();
  } else if (f.scenario == "custom") {
    s = ks::Scenario{};
    s.kind = ks::ScenarioKind::Custom;
    s.c0 = 0.0;
    s.snapshot_steps.clear();
  } else {
    throw ks::ConfigError("unknown scenario '" + f.scenario + "'");
  }
  if (f.nsquare) s.nsquare = *f.nsquare;
  if (f.macro) {
    if (*f.macro == "acute")
      s.macro = ks::MacroKind::Acute;
    else if (*f.macro == "nonacute")
      s.macro = ks::MacroKind::NonAcute;
    else
      throw ks::ConfigError("unknown macro kind '" + *f.macro + "'");
  }
  if (f.k) s.k = *f.k;
  if (f.steps) s.n_steps = *f.steps;
  if (f.c0) s.c0 = *f.c0;
  if (f.cu) s.cu = *f.cu;
  if (f.cv) s.cv = *f.cv;
  if (f.out) s.output_dir = *f.out;
  if (f.snapshots) s.snapshot_steps = parse_int_list(*f.snapshots);
  if (f.solver) {
    if (*f.solver == "direct")
      s.solver = ks::SolverKind::Direct;
    else if (*f.solver == "iterative")
      s.solver = ks::SolverKind::Iterative;
    else
      throw ks::ConfigError("unknown solver '" + *f.solver + "'");
  }
  if (f.linear_tol) s.linear_tol = *f.linear_tol;
  return s;
}

void add_scenario_flags(CLI::App* cmd, Flags& f, bool with_scenario_choice) {
  if (with_scenario_choice)
    cmd->add_option("--scenario", f.scenario, "nonblowup, blowup or custom")
        ->check(CLI::IsMember({"nonblowup", "blowup", "custom"}));
  cmd->add_option("--nsquare", f.nsquare, "macroelements per side");
  cmd->add_option("--macro", f.macro, "acute or nonacute");
  cmd->add_option("--k", f.k, "time step");
  cmd->add_option("--steps", f.steps, "number of time steps");
  cmd->add_option("--cu", f.cu, "blowup-family u amplitude");
  cmd->add_option("--cv", f.cv, "blowup-family v amplitude");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--snapshots", f.snapshots, "comma-separated step indices for VTK dumps");
  cmd->add_option("--solver", f.solver, "direct or iterative");
  cmd->add_option("--linear-tol", f.linear_tol, "relative residual bound");
  cmd->set_config("--config", "", "flat key=value configuration file");
}

void print_summary(const ks::RunOutput& out) {
  const ks::StepRecord& last = out.records.back();
  std::printf("wrote %s (%zu records)\n", out.run_dir.string().c_str(), out.records.size());
  std::printf("  final: n=%d t=%g mass_u=%.6g min_u=%.6g max_u=%.6g positivity_u=%s\n",
              last.n, last.t, last.mass_u, last.min_u, last.max_u,
              last.positivity_u ? "yes" : "no");
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Keller-Segel finite element experiment runner"};
  app.require_subcommand(1);

  Flags run_flags;
  bool report_indicators = false;
  double delta = 0.5, epsilon = 0.5, generic_c = 1.0;
  std::optional<double> b2_target;
  CLI::App* cmd_run = app.add_subcommand("run", "run one scenario");
  add_scenario_flags(cmd_run, run_flags, true);
  cmd_run->add_option("--c0", run_flags.c0, "nonblowup-family amplitude");
  cmd_run->add_flag("--report-indicators", report_indicators,
                    "print the restriction indicators for the initial pair");
  cmd_run->add_option("--delta", delta, "indicator delta in (0,1)");
  cmd_run->add_option("--epsilon", epsilon, "indicator epsilon in (0,1)");
  cmd_run->add_option("--generic-c", generic_c, "stand-in for the generic constants");
  cmd_run->add_option("--b2-target", b2_target, "scan (delta,epsilon) for B2 closest to this");

  Flags sweep_flags;
  std::string sweep_values;
  int jobs = 1;
  CLI::App* cmd_sweep = app.add_subcommand("sweep", "run one scenario per C0 value");
  add_scenario_flags(cmd_sweep, sweep_flags, false);
  cmd_sweep->add_option("--c0", sweep_values, "comma-separated C0 values")->required();
  cmd_sweep->add_option("--jobs", jobs, "concurrent runs");

  int mesh_nsquare = 50;
  std::string mesh_macro = "acute", mesh_out, mesh_vtk, mesh_check;
  CLI::App* cmd_mesh = app.add_subcommand("mesh", "generate or inspect a mesh");
  cmd_mesh->add_option("--nsquare", mesh_nsquare, "macroelements per side");
  cmd_mesh->add_option("--macro", mesh_macro, "acute or nonacute")
      ->check(CLI::IsMember({"acute", "nonacute"}));
  cmd_mesh->add_option("--out", mesh_out, "write the mesh to this file");
  cmd_mesh->add_option("--vtk", mesh_vtk, "export the mesh to legacy VTK");
  cmd_mesh->add_option("--check", mesh_check, "load and validate an existing mesh file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (cmd_run->parsed()) {
    ks::Scenario s = scenario_from_flags(run_flags);
    if (report_indicators || b2_target) {
      ks::validate(s);
      const ks::Mesh mesh = ks::build_macro_mesh(s.nsquare, s.macro);
      const ks::LumpedMass mass = ks::assemble_lumped_mass(mesh);
      const ks::SparseOperator stiffness = ks::assemble_stiffness(mesh);
      auto [u0, v0] = ks::initial_data(s, mesh);
      ks::IndicatorConfig icfg;
      icfg.delta = delta;
      icfg.epsilon = epsilon;
      icfg.generic_C = generic_c;
      const ks::Indicators ind = ks::restriction_indicators(
          u0, v0, mass, stiffness, mesh, s.k, s.k * s.n_steps, icfg);
      std::printf("indicators (delta=%g epsilon=%g C=%g):\n", delta, epsilon, generic_c);
      std::printf("  R0=%.6g B0=%.6g B1=%.6g B2=%.6g F=%.6g C_neg=%.6g\n", ind.r0, ind.b0,
                  ind.b1, ind.b2, ind.f, ind.c_neg);
      std::printf("  smallness=%s cond_hk=%s cond_h=%s cond_hII=%s (indicators only)\n",
                  ind.smallness_ok ? "yes" : "no", ind.cond_hk ? "yes" : "no",
                  ind.cond_h ? "yes" : "no", ind.cond_hII ? "yes" : "no");
      if (b2_target) {
        const ks::B2ScanResult scan =
            ks::b2_scan(u0, v0, mass, stiffness, *b2_target, icfg);
        std::printf("  B2 scan: closest to %g is B2=%.6g at delta=%g epsilon=%g "
                    "(distance %.3g, smallness %s)\n",
                    *b2_target, scan.b2, scan.delta, scan.epsilon, scan.distance,
                    scan.smallness_ok ? "yes" : "no");
      }
    }
    print_summary(ks::run_scenario(s));
    return 0;
  }

  if (cmd_sweep->parsed()) {
    ks::Scenario base = scenario_from_flags(sweep_flags);
    base.kind = ks::ScenarioKind::NonBlowup;
    const ks::SweepOutput out = ks::sweep(base, parse_double_list(sweep_values), jobs);
    std::printf("sweep table: %s (%zu runs, %zu failures)\n",
                out.combined_table.string().c_str(), out.runs.size(), out.failures.size());
    for (const std::string& f : out.failures) std::fprintf(stderr, "failed: %s\n", f.c_str());
    return out.failures.empty() ? 0 : 3;
  }

  // mesh subcommand
  if (!mesh_check.empty()) {
    const ks::Mesh m = ks::load_mesh(mesh_check);
    const ks::AngleReport rep = ks::acuteness_report(m);
    std::printf("%s: %d vertices, %d triangles, h=%.6g, angles [%.4f, %.4f] deg, acute=%s\n",
                mesh_check.c_str(), m.vertex_count(), m.triangle_count(), ks::mesh_size(m),
                rep.min_angle_deg, rep.max_angle_deg, rep.is_acute ? "yes" : "no");
    return 0;
  }
  const ks::MacroKind kind =
      mesh_macro == "acute" ? ks::MacroKind::Acute : ks::MacroKind::NonAcute;
  const ks::Mesh m = ks::build_macro_mesh(mesh_nsquare, kind);
  const ks::AngleReport rep = ks::acuteness_report(m);
  std::printf("%s nsquare=%d: %d vertices, %d triangles, h=%.6g, angles [%.4f, %.4f] deg, "
              "acute=%s\n",
              mesh_macro.c_str(), mesh_nsquare, m.vertex_count(), m.triangle_count(),
              ks::mesh_size(m), rep.min_angle_deg, rep.max_angle_deg,
              rep.is_acute ? "yes" : "no");
  if (!mesh_out.empty()) ks::save_mesh(m, mesh_out);
  if (!mesh_vtk.empty()) ks::write_vtk(m, mesh_vtk, "macro mesh", {});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ks::SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return 3;
  } catch (const ks::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
