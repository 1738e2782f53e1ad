#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "ks/fem.hpp"

namespace ks {

/// Per-time-step diagnostics row.
struct StepRecord {
  int n = 0;
  double t = 0.0;
  double mass_u = 0.0;
  double mass_v = 0.0;
  double min_u = 0.0;
  double max_u = 0.0;
  double min_v = 0.0;
  double max_v = 0.0;
  double E0 = 0.0;  // NaN when some u_i < 0 (entropy undefined)
  double E1 = 0.0;
  double grad_u_sq = 0.0;
  double grad_v_sq = 0.0;
  double lap_v_lumped_sq = 0.0;
  double v_mass_residual = 0.0;  // (1+k) mass_v(n) - mass_v(n-1) - k mass_u(n); 0 at n=0
  std::optional<double> e0_decrement;  // E0(n) - E0(n-1); absent at n=0
  bool positivity_u = false;  // min_u > 0
  bool positivity_v = false;  // min_v >= 0
};

/// E0(u,v) = 1/2 |v|_h^2 + 1/2 |grad v|^2 - (u,v)_h + (u log u, 1)_h with the
/// convention 0 log 0 = 0. Returns NaN when any u_i < 0.
double energy_E0(const FeFunction& u, const FeFunction& v, const LumpedMass& mass,
                 const SparseOperator& stiffness);

/// E1(u,v) = |u|_h^2 + |discrete_laplacian(v)|_h^2 (lumped norms).
double energy_E1(const FeFunction& u, const FeFunction& v, const LumpedMass& mass,
                 const SparseOperator& stiffness);

struct IndicatorConfig {
  double delta = 0.5;      // in (0,1)
  double epsilon = 0.5;    // in (0,1)
  double theta_omega = 1.5707963267948966;  // pi/2: min interior angle of the square
  double generic_C = 1.0;  // stand-in for the symbolic constants
};

struct MoserTrudingerPair {
  double lhs = 0.0;  // lumped integral of exp(u)
  double rhs = 0.0;  // C (1 + C |grad u|^2) exp(|grad u|^2/(8 theta) + |u|_L1/|Omega|)
  bool overflow = false;
  bool positivity_hypothesis = false;  // min u > 0, required by the bound
};

MoserTrudingerPair moser_trudinger_pair(const FeFunction& u, const LumpedMass& mass,
                                        const SparseOperator& stiffness,
                                        const IndicatorConfig& cfg);

/// Scheme-restriction indicators built from the initial pair. The generic
/// constants are symbolic in the underlying estimates; with generic_C as a
/// stand-in the boolean conditions are indicators only, not literal truth.
struct Indicators {
  double r0 = 0.0;
  double b0 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double f = 0.0;      // may overflow to +inf for large data
  double c_neg = 0.0;  // measured min |off-diagonal stiffness entry| over edges
  double smallness_lhs = 0.0;
  bool smallness_ok = false;  // (1+d)^2 (8 theta C eps + 1) |u0|_L1 / (8 theta) <= 1/2
  bool cond_hk = false;       // C (k/h^2) F < 1/2
  bool cond_h = false;        // -C_neg + C h F^(1/2) < 0
  bool cond_hII = false;      // C h E1 <= 5/12
  bool valid = false;         // false when E0 is undefined (negative u0)
};

Indicators restriction_indicators(const FeFunction& u0, const FeFunction& v0,
                                  const LumpedMass& mass, const SparseOperator& stiffness,
                                  const Mesh& mesh, double k, double t_final,
                                  const IndicatorConfig& cfg);

/// Scan (delta, epsilon) over a coarse grid in (0,1)^2 and report the pair
/// whose B2 lies closest to `target`, without asserting equality.
struct B2ScanResult {
  double delta = 0.0;
  double epsilon = 0.0;
  double b2 = 0.0;
  double distance = 0.0;
  bool smallness_ok = false;
};

B2ScanResult b2_scan(const FeFunction& u0, const FeFunction& v0, const LumpedMass& mass,
                     const SparseOperator& stiffness, double target,
                     const IndicatorConfig& base);

/// Build the diagnostics row for step n. `prev` supplies the previous row for
/// the decrement and the v-mass recursion residual (pass nullptr at n = 0).
StepRecord make_step_record(int n, double t, const FeFunction& u, const FeFunction& v,
                            const LumpedMass& mass, const SparseOperator& stiffness,
                            const StepRecord* prev, double k);

inline const char* kRecordCsvHeader =
    "n,t,mass_u,mass_v,min_u,max_u,min_v,max_v,E0,E1,grad_u_sq,grad_v_sq,"
    "lap_v_lumped_sq,v_mass_residual,e0_decrement,positivity_u,positivity_v";

/// One header row plus one row per record, 17 significant digits, booleans as
/// 0/1, absent decrement as an empty field.
void emit_records(const std::vector<StepRecord>& records, const std::filesystem::path& path);
std::vector<StepRecord> parse_records(const std::filesystem::path& path);

}  // namespace ks
