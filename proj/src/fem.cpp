#include "ks/fem.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

namespace ks {

namespace {

using Trip = Eigen::Triplet<double>;

struct TriGeometry {
  double area;
  Eigen::Vector2d grad[3];  // basis-function gradients, constant on the triangle
};

TriGeometry tri_geometry(const Mesh& mesh, const Triangle& tri) {
  const Point2& a = mesh.vertices[tri[0]];
  const Point2& b = mesh.vertices[tri[1]];
  const Point2& c = mesh.vertices[tri[2]];
  TriGeometry g;
  g.area = 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
  // grad(phi_i) = rot90(edge opposite i) / (2 |T|), rot90(x,y) = (-y,x).
  const Point2* pts[3] = {&a, &b, &c};
  for (int i = 0; i < 3; ++i) {
    const Point2& pj = *pts[(i + 1) % 3];
    const Point2& pk = *pts[(i + 2) % 3];
    g.grad[i] = Eigen::Vector2d(-(pk.y - pj.y), pk.x - pj.x) / (2.0 * g.area);
  }
  return g;
}

}  // namespace

FeFunction::FeFunction(const Mesh& mesh, Eigen::VectorXd values)
    : mesh_(&mesh), values_(std::move(values)) {
  if (values_.size() != mesh.vertex_count())
    throw Error("FeFunction: coefficient count " + std::to_string(values_.size()) +
                " does not match vertex count " + std::to_string(mesh.vertex_count()));
  if (!values_.allFinite()) throw Error("FeFunction: non-finite coefficient");
}

LumpedMass assemble_lumped_mass(const Mesh& mesh) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(mesh.vertex_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double third = signed_area(mesh, t) / 3.0;
    for (int k = 0; k < 3; ++k) diag[mesh.triangles[t][k]] += third;
  }
  return LumpedMass{std::move(diag)};
}

SparseOperator assemble_stiffness(const Mesh& mesh) {
  std::vector<Trip> trips;
  trips.reserve(9 * mesh.triangles.size());
  for (const Triangle& tri : mesh.triangles) {
    const TriGeometry g = tri_geometry(mesh, tri);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trips.emplace_back(tri[i], tri[j], g.area * g.grad[i].dot(g.grad[j]));
  }
  SparseOperator op;
  op.matrix.resize(mesh.vertex_count(), mesh.vertex_count());
  op.matrix.setFromTriplets(trips.begin(), trips.end());
  op.symmetric = true;
  return op;
}

SparseOperator assemble_chemotaxis(const Mesh& mesh, const FeFunction& v) {
  if (&v.mesh() != &mesh) throw Error("assemble_chemotaxis: v lives on a different mesh");
  std::vector<Trip> trips;
  trips.reserve(9 * mesh.triangles.size());
  for (const Triangle& tri : mesh.triangles) {
    const TriGeometry g = tri_geometry(mesh, tri);
    const Eigen::Vector2d grad_v =
        v[tri[0]] * g.grad[0] + v[tri[1]] * g.grad[1] + v[tri[2]] * g.grad[2];
    // The trial factor is evaluated at the barycentre, which for a linear
    // function is the mean of the vertex values; each column j in the
    // triangle therefore receives the same weight |T|/3.
    for (int i = 0; i < 3; ++i) {
      const double row_coef = (g.area / 3.0) * grad_v.dot(g.grad[i]);
      for (int j = 0; j < 3; ++j) trips.emplace_back(tri[i], tri[j], row_coef);
    }
  }
  SparseOperator op;
  op.matrix.resize(mesh.vertex_count(), mesh.vertex_count());
  op.matrix.setFromTriplets(trips.begin(), trips.end());
  op.symmetric = false;
  return op;
}

FeFunction nodal_interpolate(const std::function<double(Point2)>& f, const Mesh& mesh) {
  Eigen::VectorXd values(mesh.vertex_count());
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    const Point2 pt = mesh.vertices[i];
    const double y = f(pt);
    if (!std::isfinite(y))
      throw Error("nodal_interpolate: non-finite value at vertex " + std::to_string(i) + " (" +
                  std::to_string(pt.x) + ", " + std::to_string(pt.y) + ")");
    values[i] = y;
  }
  return FeFunction(mesh, std::move(values));
}

FeFunction discrete_laplacian(const FeFunction& v, const LumpedMass& mass,
                              const SparseOperator& stiffness) {
  Eigen::VectorXd w = -(stiffness.matrix * v.values()).cwiseQuotient(mass.diagonal);
  return FeFunction(v.mesh(), std::move(w));
}

NormReport norms(const FeFunction& u, const LumpedMass& mass, const SparseOperator& stiffness) {
  const Eigen::VectorXd& x = u.values();
  NormReport r;
  r.lumped_l2 = std::sqrt(mass.diagonal.dot(x.cwiseAbs2()));
  r.grad_l2 = std::sqrt(std::max(0.0, x.dot(stiffness.matrix * x)));
  r.lumped_l1 = mass.diagonal.dot(x.cwiseAbs());
  r.min = x.minCoeff();
  r.max = x.maxCoeff();
  r.mass = mass.diagonal.dot(x);
  return r;
}

void save_fe_function(const FeFunction& u, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("save_fe_function: cannot open " + path.string());
  char buf[48];
  for (int i = 0; i < u.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.16e\n", u[i]);
    out << buf;
  }
  if (!out) throw Error("save_fe_function: write failed for " + path.string());
}

}  // namespace ks
