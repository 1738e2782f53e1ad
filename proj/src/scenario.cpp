#include "ks/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <sstream>

#include "ks/vtk.hpp"

namespace ks {

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::string num17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

bool uses_c0_family(const Scenario& s) {
  if (s.kind == ScenarioKind::NonBlowup) return true;
  if (s.kind == ScenarioKind::Blowup) return false;
  return s.c0 > 0.0;
}

const char* kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::NonBlowup: return "nonblowup";
    case ScenarioKind::Blowup: return "blowup";
    default: return "custom";
  }
}

const char* macro_name(MacroKind m) {
  return m == MacroKind::Acute ? "acute" : "nonacute";
}

}  // namespace

Scenario Scenario::non_blowup_preset() {
  Scenario s;
  s.kind = ScenarioKind::NonBlowup;
  s.nsquare = 50;
  s.macro = MacroKind::Acute;
  s.k = 1e-4;
  s.n_steps = 50;
  s.c0 = 70.0;
  s.snapshot_steps = {0, 25, 50};  // t = 0, 2.5e-3, 5e-3
  return s;
}

Scenario Scenario::blowup_preset() {
  Scenario s;
  s.kind = ScenarioKind::Blowup;
  s.nsquare = 100;
  s.macro = MacroKind::Acute;
  s.k = 1e-6;
  s.n_steps = 100;
  s.c0 = 0.0;
  s.cu = 1000.0;
  s.cv = 500.0;
  s.snapshot_steps = {0, 30, 60, 88};
  return s;
}

void validate(const Scenario& s) {
  if (s.nsquare < 1) throw ConfigError("scenario: nsquare must be >= 1");
  if (s.macro == MacroKind::External)
    throw ConfigError("scenario: macro must be acute or nonacute");
  if (!(s.k > 0.0)) throw ConfigError("scenario: k must be > 0");
  if (s.n_steps < 0) throw ConfigError("scenario: steps must be >= 0");
  if (!(s.linear_tol > 0.0) || s.linear_tol > 1e-6)
    throw ConfigError("scenario: linear_tol must lie in (0, 1e-6]");
  if (s.kind == ScenarioKind::NonBlowup && !(s.c0 > 0.0))
    throw ConfigError("scenario: nonblowup requires c0 > 0");
  if (s.kind == ScenarioKind::Blowup && (!(s.cu > 0.0) || !(s.cv > 0.0)))
    throw ConfigError("scenario: blowup requires cu > 0 and cv > 0");
  if (s.kind == ScenarioKind::Custom) {
    const bool has_c0 = s.c0 > 0.0;
    const bool has_cucv = s.cu > 0.0 && s.cv > 0.0;
    if (has_c0 == has_cucv)
      throw ConfigError("scenario: custom requires either c0 or (cu, cv), not both");
  }
  for (int n : s.snapshot_steps)
    if (n < 0 || n > s.n_steps)
      throw ConfigError("scenario: snapshot step " + std::to_string(n) +
                        " outside [0, " + std::to_string(s.n_steps) + "]");
}

std::string run_id(const Scenario& s) {
  std::ostringstream id;
  id << kind_name(s.kind) << "_" << macro_name(s.macro) << "_ns" << s.nsquare;
  if (uses_c0_family(s))
    id << "_c0" << num(s.c0);
  else
    id << "_cu" << num(s.cu) << "_cv" << num(s.cv);
  id << "_k" << num(s.k) << "_s" << s.n_steps;
  if (s.solver == SolverKind::Iterative) id << "_it";
  return id.str();
}

namespace {

void write_config_echo(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string());
  out << "scenario=" << kind_name(s.kind) << "\n";
  out << "macro=" << macro_name(s.macro) << "\n";
  out << "nsquare=" << s.nsquare << "\n";
  out << "k=" << num17(s.k) << "\n";
  out << "steps=" << s.n_steps << "\n";
  if (uses_c0_family(s)) {
    out << "c0=" << num17(s.c0) << "\n";
  } else {
    out << "cu=" << num17(s.cu) << "\n";
    out << "cv=" << num17(s.cv) << "\n";
  }
  out << "out=" << s.output_dir.string() << "\n";
  if (!s.snapshot_steps.empty()) {
    out << "snapshots=";
    for (std::size_t i = 0; i < s.snapshot_steps.size(); ++i)
      out << (i ? "," : "") << s.snapshot_steps[i];
    out << "\n";
  }
  out << "solver=" << (s.solver == SolverKind::Direct ? "direct" : "iterative") << "\n";
  out << "linear-tol=" << num17(s.linear_tol) << "\n";
}

}  // namespace

std::pair<FeFunction, FeFunction> initial_data(const Scenario& s, const Mesh& mesh) {
  if (uses_c0_family(s)) {
    const double c = s.c0;
    return {nodal_interpolate(
                [c](Point2 p) { return c * std::exp(-c * (p.x * p.x + p.y * p.y)); }, mesh),
            nodal_interpolate(
                [c](Point2 p) {
                  return c * std::exp(-c * (p.x * p.x + (p.y - 0.5) * (p.y - 0.5)));
                },
                mesh)};
  }
  const double cu = s.cu, cv = s.cv;
  return {nodal_interpolate(
              [cu](Point2 p) { return cu * std::exp(-0.1 * cu * (p.x * p.x + p.y * p.y)); },
              mesh),
          nodal_interpolate(
              [cv](Point2 p) { return cv * std::exp(-0.1 * cv * (p.x * p.x + p.y * p.y)); },
              mesh)};
}

RunOutput run_scenario(const Scenario& s) {
  validate(s);
  if (uses_c0_family(s) && s.c0 < 40.0)
    std::cerr << "warning: c0 = " << s.c0
              << " < 40; the bell data only satisfy the Neumann condition "
                 "approximately for c0 >= 40\n";

  const Mesh mesh = build_macro_mesh(s.nsquare, s.macro);
  auto [u0, v0] = initial_data(s, mesh);

  const std::filesystem::path dir = s.output_dir / run_id(s);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string());

  try {
    write_config_echo(s, dir / "config.echo");
    save_mesh(mesh, dir / "mesh.ksmesh");
  } catch (const Error& e) {
    throw ConfigError(std::string("output path not writable: ") + e.what());
  }

  const std::set<int> snapshots(s.snapshot_steps.begin(), s.snapshot_steps.end());
  StepCallback on_step = [&](const SchemeState& state) {
    if (!snapshots.count(state.n)) return;
    const std::string tag = std::to_string(state.n);
    write_vtk(mesh, dir / ("u_" + tag + ".vtk"), "u step " + tag,
              {{"u", &state.u.values()}});
    write_vtk(mesh, dir / ("v_" + tag + ".vtk"), "v step " + tag,
              {{"v", &state.v.values()}});
  };

  SchemeConfig cfg;
  cfg.k = s.k;
  cfg.n_steps = s.n_steps;
  cfg.linear_tol = s.linear_tol;
  cfg.solver_kind = s.solver;

  RunResult result = run(mesh, u0, v0, cfg, on_step);
  emit_records(result.records, dir / "diagnostics.csv");
  return RunOutput{dir, std::move(result.records)};
}

SweepOutput sweep(const Scenario& base, const std::vector<double>& c0_values, int jobs) {
  if (!uses_c0_family(base))
    throw ConfigError("sweep: base scenario must use the c0 data family");
  if (c0_values.empty()) throw ConfigError("sweep: no c0 values given");
  if (jobs < 1) jobs = 1;

  struct Slot {
    double c0 = 0.0;
    bool ok = false;
    RunOutput output;
    std::string error;
  };
  std::vector<Slot> slots(c0_values.size());
  for (std::size_t i = 0; i < c0_values.size(); ++i) slots[i].c0 = c0_values[i];

  auto work = [&base](Slot& slot) {
    Scenario s = base;
    s.c0 = slot.c0;
    try {
      slot.output = run_scenario(s);
      slot.ok = true;
    } catch (const std::exception& e) {
      slot.error = "C0=" + num(slot.c0) + ": " + e.what();
    }
  };

  // Each run writes only inside its own run directory, so waves of
  // independent runs are safe.
  for (std::size_t begin = 0; begin < slots.size(); begin += jobs) {
    std::vector<std::future<void>> wave;
    const std::size_t end = std::min(begin + std::size_t(jobs), slots.size());
    for (std::size_t i = begin; i < end; ++i)
      wave.push_back(std::async(std::launch::async, work, std::ref(slots[i])));
    for (auto& f : wave) f.get();
  }

  SweepOutput out;
  out.combined_table = base.output_dir / "sweep_min_u.csv";
  for (Slot& slot : slots) {
    if (slot.ok) {
      out.c0_values.push_back(slot.c0);
      out.runs.push_back(std::move(slot.output));
    } else {
      out.failures.push_back(slot.error);
    }
  }

  std::filesystem::create_directories(base.output_dir);
  std::ofstream table(out.combined_table);
  if (!table) throw ConfigError("cannot write " + out.combined_table.string());
  table << "n,t";
  for (double c0 : out.c0_values) table << ",min_u@C0=" << num(c0);
  table << "\n";
  if (!out.runs.empty()) {
    const std::size_t rows = out.runs.front().records.size();
    char buf[40];
    for (std::size_t r = 0; r < rows; ++r) {
      std::snprintf(buf, sizeof buf, "%.16e", out.runs.front().records[r].t);
      table << out.runs.front().records[r].n << ',' << buf;
      for (const RunOutput& run : out.runs) {
        std::snprintf(buf, sizeof buf, "%.16e", run.records[r].min_u);
        table << ',' << buf;
      }
      table << "\n";
    }
  }
  return out;
}

}  // namespace ks
