#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ks/scheme.hpp"

namespace ks {

enum class ScenarioKind { NonBlowup, Blowup, Custom };

/// A reproducible experiment: mesh resolution, time grid, bell-shaped initial
/// data and output selection. NonBlowup data are
///   u0 = C0 exp(-C0 (x^2 + y^2)),  v0 = C0 exp(-C0 (x^2 + (y - 1/2)^2)),
/// Blowup data are
///   u0 = Cu exp(-0.1 Cu (x^2 + y^2)),  v0 = Cv exp(-0.1 Cv (x^2 + y^2)).
/// Custom uses the C0 family when c0 > 0, otherwise the (Cu, Cv) family.
struct Scenario {
  ScenarioKind kind = ScenarioKind::NonBlowup;
  int nsquare = 50;
  MacroKind macro = MacroKind::Acute;
  double k = 1e-4;
  int n_steps = 50;
  double c0 = 70.0;   // NonBlowup family
  double cu = 0.0;    // Blowup family
  double cv = 0.0;
  std::filesystem::path output_dir = "out";
  std::vector<int> snapshot_steps;  // subset of [0, n_steps]
  SolverKind solver = SolverKind::Direct;
  double linear_tol = 1e-12;

  static Scenario non_blowup_preset();  // nsquare 50, k 1e-4, 50 steps, C0 70
  static Scenario blowup_preset();      // nsquare 100, k 1e-6, 100 steps, Cu 1000, Cv 500
};

/// Deterministic directory name derived from the parameters only.
std::string run_id(const Scenario& s);

/// Throws ConfigError on invalid parameters.
void validate(const Scenario& s);

/// Interpolate the scenario's initial pair (u0, v0) onto the mesh.
std::pair<FeFunction, FeFunction> initial_data(const Scenario& s, const Mesh& mesh);

struct RunOutput {
  std::filesystem::path run_dir;
  std::vector<StepRecord> records;
};

/// Run one scenario, writing <out>/<run-id>/{config.echo, mesh.ksmesh,
/// diagnostics.csv, u_<n>.vtk, v_<n>.vtk}. Loss of positivity is recorded and
/// the run continues; only solver failures abort.
RunOutput run_scenario(const Scenario& s);

struct SweepOutput {
  std::vector<double> c0_values;           // the values that completed
  std::vector<RunOutput> runs;             // matching c0_values
  std::vector<std::string> failures;       // one message per failed value
  std::filesystem::path combined_table;    // <out>/sweep_min_u.csv
};

/// One run per C0 value (NonBlowup family); per-run errors are collected and
/// the remaining values still execute. Writes a combined table with columns
/// n,t,min_u@C0=<value>... With jobs > 1 the runs execute concurrently; each
/// writes only inside its own run directory.
SweepOutput sweep(const Scenario& base, const std::vector<double>& c0_values, int jobs = 1);

}  // namespace ks
