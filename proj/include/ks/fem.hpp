#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <filesystem>
#include <functional>

#include "ks/mesh.hpp"

namespace ks {

/// Continuous piecewise-linear field, one coefficient per mesh vertex.
/// The mesh must outlive the function.
class FeFunction {
 public:
  explicit FeFunction(const Mesh& mesh)
      : mesh_(&mesh), values_(Eigen::VectorXd::Zero(mesh.vertex_count())) {}

  FeFunction(const Mesh& mesh, Eigen::VectorXd values);

  const Mesh& mesh() const { return *mesh_; }
  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[i]; }

 private:
  const Mesh* mesh_;
  Eigen::VectorXd values_;
};

/// Diagonal of the lumped mass matrix; entry i equals the measure of the
/// basis function patch, sum(|T|/3 over triangles touching i). Entries are
/// positive and sum to the domain measure.
struct LumpedMass {
  Eigen::VectorXd diagonal;

  double total() const { return diagonal.sum(); }
};

/// Sparse operator on the vertex index set. The sparsity pattern is the
/// vertex adjacency plus the diagonal.
struct SparseOperator {
  Eigen::SparseMatrix<double> matrix;
  bool symmetric = false;
};

LumpedMass assemble_lumped_mass(const Mesh& mesh);

/// Stiffness matrix A, entry (i,j) = sum_T int_T grad(phi_i).grad(phi_j).
/// Symmetric positive semidefinite with the constants in its kernel. On an
/// acute mesh every off-diagonal entry is strictly negative.
SparseOperator assemble_stiffness(const Mesh& mesh);

/// Transport operator C(v) of the chemotaxis term with one-point barycentric
/// quadrature on the trial factor: entry (i,j) = sum over triangles T
/// containing both i and j of (|T|/3) grad(v)|_T . grad(phi_i)|_T.
/// Row sums reproduce (A v)_i. Nonsymmetric.
SparseOperator assemble_chemotaxis(const Mesh& mesh, const FeFunction& v);

/// Vertex-wise interpolation: coefficient i = f(vertex i). Throws if f
/// returns a non-finite value, naming the vertex.
FeFunction nodal_interpolate(const std::function<double(Point2)>& f, const Mesh& mesh);

/// w with M_ii w_i = -(A v)_i, the lumped discrete Laplacian of v.
FeFunction discrete_laplacian(const FeFunction& v, const LumpedMass& mass,
                              const SparseOperator& stiffness);

struct NormReport {
  double lumped_l2 = 0.0;  // (sum M_ii u_i^2)^(1/2)
  double grad_l2 = 0.0;    // (u^T A u)^(1/2)
  double lumped_l1 = 0.0;  // sum M_ii |u_i|
  double min = 0.0;
  double max = 0.0;
  double mass = 0.0;       // sum M_ii u_i
};

NormReport norms(const FeFunction& u, const LumpedMass& mass, const SparseOperator& stiffness);

/// One value per line, 17 significant digits.
void save_fe_function(const FeFunction& u, const std::filesystem::path& path);

}  // namespace ks
