#pragma once

#include <Eigen/SparseLU>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <functional>
#include <vector>

#include "ks/diagnostics.hpp"
#include "ks/fem.hpp"

namespace ks {

enum class SolverKind { Direct, Iterative };

struct SchemeConfig {
  double k = 1e-4;          // time step, > 0
  int n_steps = 0;
  double linear_tol = 1e-12;  // relative residual bound, in (0, 1e-6]
  SolverKind solver_kind = SolverKind::Direct;
};

struct SchemeState {
  int n = 0;
  double t = 0.0;
  FeFunction u;  // cell density
  FeFunction v;  // chemoattractant density
};

/// One semi-implicit step pair: a nonsymmetric solve
///   (M/k + A - C(v^n)) u^{n+1} = (M/k) u^n
/// followed by a symmetric positive definite solve
///   ((1/k + 1) M + A) v^{n+1} = (M/k) v^n + M u^{n+1}.
/// The v-matrix is constant over a run and factorized once; the u-matrix
/// changes with v^n and is refactorized every step on a fixed pattern.
class TimeStepper {
 public:
  TimeStepper(const Mesh& mesh, const LumpedMass& mass, const SparseOperator& stiffness,
              const SchemeConfig& cfg);

  FeFunction u_step(const SchemeState& state);
  FeFunction v_step(const SchemeState& state, const FeFunction& u_next);

 private:
  Eigen::VectorXd solve_u(const Eigen::SparseMatrix<double>& B, const Eigen::VectorXd& rhs,
                          int step);
  Eigen::VectorXd solve_v(const Eigen::VectorXd& rhs, int step);

  const Mesh& mesh_;
  const LumpedMass& mass_;
  const SparseOperator& stiffness_;
  SchemeConfig cfg_;
  Eigen::SparseMatrix<double> mass_over_k_;  // diag(M)/k
  Eigen::SparseMatrix<double> v_matrix_;     // (1/k + 1) diag(M) + A
  Eigen::SparseLU<Eigen::SparseMatrix<double>> u_lu_;
  bool u_pattern_analyzed_ = false;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> v_ldlt_;
  bool v_factorized_ = false;
};

/// Single-shot conveniences with the same numerics as TimeStepper.
FeFunction u_step(const SchemeState& state, const LumpedMass& mass,
                  const SparseOperator& stiffness, const SchemeConfig& cfg);
FeFunction v_step(const SchemeState& state, const FeFunction& u_next, const LumpedMass& mass,
                  const SparseOperator& stiffness, const SchemeConfig& cfg);

struct RunResult {
  std::vector<StepRecord> records;  // n_steps + 1 rows, including n = 0
  SchemeState final_state;
};

using StepCallback = std::function<void(const SchemeState&)>;

/// Execute n_steps of the scheme from (u0, v0), recording diagnostics every
/// step. Warns (stderr) when u0 is not nodally positive or v0 not
/// nonnegative. Negative excursions of the solution are recorded, never
/// clipped. Solver failures abort with the failing step index.
RunResult run(const Mesh& mesh, const FeFunction& u0, const FeFunction& v0,
              const SchemeConfig& cfg, const StepCallback& on_step = {});

}  // namespace ks
