#include "ks/scheme.hpp"

#include <cmath>
#include <iostream>
#include <string>
#include <vector>

namespace ks {

namespace {

void validate_config(const SchemeConfig& cfg) {
  if (!(cfg.k > 0.0)) throw ConfigError("scheme: time step k must be > 0");
  if (cfg.n_steps < 0) throw ConfigError("scheme: n_steps must be >= 0");
  if (!(cfg.linear_tol > 0.0) || cfg.linear_tol > 1e-6)
    throw ConfigError("scheme: linear_tol must lie in (0, 1e-6]");
}

Eigen::SparseMatrix<double> diagonal_matrix(const Eigen::VectorXd& d) {
  Eigen::SparseMatrix<double> m(d.size(), d.size());
  m.reserve(Eigen::VectorXi::Ones(d.size()));
  for (int i = 0; i < d.size(); ++i) m.insert(i, i) = d[i];
  m.makeCompressed();
  return m;
}

double relative_residual(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& b) {
  const double denom = std::max(b.norm(), std::numeric_limits<double>::min());
  return (A * x - b).norm() / denom;
}

// Runs an Eigen iterative solver in chunks so a failure carries the residual
// trajectory, not just the final value.
template <typename Solver>
Eigen::VectorXd iterate_with_history(Solver& solver, const Eigen::SparseMatrix<double>& A,
                                     const Eigen::VectorXd& b, double tol, int step,
                                     const char* label) {
  const int chunk = std::max(50, int(A.rows() / 10));
  const int max_chunks = 40;
  solver.setTolerance(tol);
  solver.setMaxIterations(chunk);
  std::vector<double> history;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  for (int c = 0; c < max_chunks; ++c) {
    x = solver.solveWithGuess(b, x);
    history.push_back(relative_residual(A, x, b));
    if (history.back() <= tol) return x;
  }
  throw SolverError(std::string(label) + " solve did not reach tolerance " +
                        std::to_string(tol),
                    step, history);
}

}  // namespace

TimeStepper::TimeStepper(const Mesh& mesh, const LumpedMass& mass,
                         const SparseOperator& stiffness, const SchemeConfig& cfg)
    : mesh_(mesh), mass_(mass), stiffness_(stiffness), cfg_(cfg) {
  validate_config(cfg);
  if (mass.diagonal.size() != mesh.vertex_count() ||
      stiffness.matrix.rows() != mesh.vertex_count())
    throw Error("TimeStepper: operator sizes do not match the mesh");
  mass_over_k_ = diagonal_matrix(mass.diagonal / cfg.k);
  v_matrix_ = diagonal_matrix((1.0 / cfg.k + 1.0) * mass.diagonal);
  v_matrix_ += stiffness.matrix;
  if (cfg_.solver_kind == SolverKind::Direct) {
    v_ldlt_.compute(v_matrix_);
    if (v_ldlt_.info() != Eigen::Success)
      throw SolverError("factorization of the v-system failed", 0, {});
    v_factorized_ = true;
  }
}

Eigen::VectorXd TimeStepper::solve_u(const Eigen::SparseMatrix<double>& B,
                                     const Eigen::VectorXd& rhs, int step) {
  if (cfg_.solver_kind == SolverKind::Direct) {
    if (!u_pattern_analyzed_) {
      u_lu_.analyzePattern(B);
      u_pattern_analyzed_ = true;
    }
    u_lu_.factorize(B);
    if (u_lu_.info() != Eigen::Success)
      throw SolverError("LU factorization of the u-system failed", step, {});
    Eigen::VectorXd x = u_lu_.solve(rhs);
    const double res = relative_residual(B, x, rhs);
    if (!std::isfinite(res) || res > cfg_.linear_tol)
      throw SolverError("u-system residual " + std::to_string(res) + " exceeds tolerance",
                        step, {res});
    return x;
  }
  Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> solver;
  solver.compute(B);
  return iterate_with_history(solver, B, rhs, cfg_.linear_tol, step, "u-system");
}

Eigen::VectorXd TimeStepper::solve_v(const Eigen::VectorXd& rhs, int step) {
  if (cfg_.solver_kind == SolverKind::Direct) {
    Eigen::VectorXd x = v_ldlt_.solve(rhs);
    const double res = relative_residual(v_matrix_, x, rhs);
    if (!std::isfinite(res) || res > cfg_.linear_tol)
      throw SolverError("v-system residual " + std::to_string(res) + " exceeds tolerance",
                        step, {res});
    return x;
  }
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::IncompleteCholesky<double>>
      solver;
  solver.compute(v_matrix_);
  return iterate_with_history(solver, v_matrix_, rhs, cfg_.linear_tol, step, "v-system");
}

FeFunction TimeStepper::u_step(const SchemeState& state) {
  const SparseOperator transport = assemble_chemotaxis(mesh_, state.v);
  Eigen::SparseMatrix<double> B = stiffness_.matrix - transport.matrix;
  B += mass_over_k_;
  const Eigen::VectorXd rhs = (mass_.diagonal / cfg_.k).cwiseProduct(state.u.values());
  return FeFunction(mesh_, solve_u(B, rhs, state.n + 1));
}

FeFunction TimeStepper::v_step(const SchemeState& state, const FeFunction& u_next) {
  const Eigen::VectorXd rhs = (mass_.diagonal / cfg_.k).cwiseProduct(state.v.values()) +
                              mass_.diagonal.cwiseProduct(u_next.values());
  return FeFunction(mesh_, solve_v(rhs, state.n + 1));
}

FeFunction u_step(const SchemeState& state, const LumpedMass& mass,
                  const SparseOperator& stiffness, const SchemeConfig& cfg) {
  TimeStepper stepper(state.u.mesh(), mass, stiffness, cfg);
  return stepper.u_step(state);
}

FeFunction v_step(const SchemeState& state, const FeFunction& u_next, const LumpedMass& mass,
                  const SparseOperator& stiffness, const SchemeConfig& cfg) {
  TimeStepper stepper(state.u.mesh(), mass, stiffness, cfg);
  return stepper.v_step(state, u_next);
}

RunResult run(const Mesh& mesh, const FeFunction& u0, const FeFunction& v0,
              const SchemeConfig& cfg, const StepCallback& on_step) {
  validate_config(cfg);
  if (&u0.mesh() != &mesh || &v0.mesh() != &mesh)
    throw Error("run: initial data live on a different mesh");
  if (u0.values().minCoeff() <= 0.0)
    std::cerr << "warning: u0 is not nodally positive (min " << u0.values().minCoeff()
              << ")\n";
  if (v0.values().minCoeff() < 0.0)
    std::cerr << "warning: v0 has negative nodal values (min " << v0.values().minCoeff()
              << ")\n";

  const LumpedMass mass = assemble_lumped_mass(mesh);
  const SparseOperator stiffness = assemble_stiffness(mesh);
  TimeStepper stepper(mesh, mass, stiffness, cfg);

  RunResult result{{}, SchemeState{0, 0.0, u0, v0}};
  result.records.reserve(cfg.n_steps + 1);
  result.records.push_back(
      make_step_record(0, 0.0, u0, v0, mass, stiffness, nullptr, cfg.k));
  if (on_step) on_step(result.final_state);

  for (int n = 0; n < cfg.n_steps; ++n) {
    FeFunction u_next = stepper.u_step(result.final_state);
    FeFunction v_next = stepper.v_step(result.final_state, u_next);
    result.final_state = SchemeState{n + 1, (n + 1) * cfg.k, std::move(u_next),
                                     std::move(v_next)};
    result.records.push_back(make_step_record(n + 1, result.final_state.t,
                                              result.final_state.u, result.final_state.v,
                                              mass, stiffness, &result.records.back(),
                                              cfg.k));
    if (on_step) on_step(result.final_state);
  }
  return result;
}

}  // namespace ks
