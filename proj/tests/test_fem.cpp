#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "ks/fem.hpp"
#include "oracles.hpp"

using namespace ks;

namespace {

double max_abs_offdiag_on_edges(const SparseOperator& a, bool& any_nonnegative) {
  double worst = -1e300;
  any_nonnegative = false;
  for (int col = 0; col < a.matrix.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a.matrix, col); it; ++it)
      if (it.row() != it.col()) {
        worst = std::max(worst, it.value());
        if (it.value() >= -1e-14) any_nonnegative = true;
      }
  return worst;
}

}  // namespace

TEST_CASE("lumped mass: single triangle and partition of measure") {
  const Mesh tri = test::unit_right_triangle();
  const LumpedMass m = assemble_lumped_mass(tri);
  for (int i = 0; i < 3; ++i) CHECK(m.diagonal[i] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));

  for (MacroKind kind : {MacroKind::Acute, MacroKind::NonAcute}) {
    const Mesh mesh = build_macro_mesh(2, kind);
    const LumpedMass mm = assemble_lumped_mass(mesh);
    CHECK(mm.diagonal.minCoeff() > 0.0);
    CHECK(mm.total() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("assembled operators match the brute-force oracles entrywise") {
  std::vector<Mesh> meshes;
  meshes.push_back(test::unit_right_triangle());
  meshes.push_back(test::two_triangle_square());
  meshes.push_back(test::equilateral_triangle());
  for (int n : {1, 2, 3}) {
    meshes.push_back(build_macro_mesh(n, MacroKind::Acute));
    meshes.push_back(build_macro_mesh(n, MacroKind::NonAcute));
  }
  for (const Mesh& mesh : meshes) {
    REQUIRE(mesh.triangle_count() <= 200);
    const Eigen::MatrixXd a_ref = test::dense_stiffness_cotangent(mesh);
    const Eigen::MatrixXd a = Eigen::MatrixXd(assemble_stiffness(mesh).matrix);
    CHECK((a - a_ref).cwiseAbs().maxCoeff() < 1e-12);

    const Eigen::VectorXd m_ref = test::lumped_mass_quadrature(mesh);
    const Eigen::VectorXd m = assemble_lumped_mass(mesh).diagonal;
    CHECK((m - m_ref).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("stiffness local matrix on the unit right triangle") {
  const Eigen::MatrixXd a = Eigen::MatrixXd(assemble_stiffness(test::unit_right_triangle()).matrix);
  Eigen::Matrix3d expected;
  expected << 1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5;
  CHECK((a - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("stiffness annihilates constants and is exactly symmetric") {
  const Mesh mesh = build_macro_mesh(3, MacroKind::Acute);
  const SparseOperator a = assemble_stiffness(mesh);
  CHECK(a.symmetric);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.vertex_count());
  CHECK((a.matrix * ones).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::SparseMatrix<double> at = a.matrix.transpose();
  CHECK((Eigen::MatrixXd(a.matrix) - Eigen::MatrixXd(at)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("M-matrix sign pattern: acute negative, non-acute not") {
  for (int n : {1, 4}) {
    bool any_nonneg = false;
    const double worst =
        max_abs_offdiag_on_edges(assemble_stiffness(build_macro_mesh(n, MacroKind::Acute)),
                                 any_nonneg);
    CHECK(worst < 0.0);
    CHECK_FALSE(any_nonneg);

    max_abs_offdiag_on_edges(assemble_stiffness(build_macro_mesh(n, MacroKind::NonAcute)),
                             any_nonneg);
    CHECK(any_nonneg);
  }
}

TEST_CASE("stiffness is positive semidefinite (dense eigensolve)") {
  for (int n : {1, 2, 4}) {
    const Mesh mesh = build_macro_mesh(n, MacroKind::Acute);
    const Eigen::MatrixXd a = Eigen::MatrixXd(assemble_stiffness(mesh).matrix);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("chemotaxis operator: constants, single triangle, row sums") {
  const Mesh tri = test::unit_right_triangle();

  SUBCASE("constant v gives the zero operator") {
    const FeFunction v(tri, Eigen::VectorXd::Constant(3, 4.2));
    const SparseOperator c = assemble_chemotaxis(tri, v);
    CHECK(Eigen::MatrixXd(c.matrix).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_FALSE(c.symmetric);
  }

  SUBCASE("grad v = (1,0): row of the corner node is -1/6") {
    Eigen::VectorXd vals(3);
    vals << 0.0, 1.0, 0.0;  // v = x
    const SparseOperator c = assemble_chemotaxis(tri, FeFunction(tri, vals));
    const Eigen::MatrixXd d = Eigen::MatrixXd(c.matrix);
    for (int j = 0; j < 3; ++j) CHECK(d(0, j) == doctest::Approx(-1.0 / 6.0).epsilon(1e-14));
  }

  SUBCASE("row sums reproduce A v") {
    std::mt19937 rng(42);
    for (MacroKind kind : {MacroKind::Acute, MacroKind::NonAcute}) {
      const Mesh mesh = build_macro_mesh(3, kind);
      const SparseOperator a = assemble_stiffness(mesh);
      for (int trial = 0; trial < 10; ++trial) {
        const FeFunction v = test::random_function(mesh, rng);
        const SparseOperator c = assemble_chemotaxis(mesh, v);
        const Eigen::VectorXd row_sums =
            c.matrix * Eigen::VectorXd::Ones(mesh.vertex_count());
        const Eigen::VectorXd av = a.matrix * v.values();
        CHECK((row_sums - av).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }

  SUBCASE("mesh mismatch is an error") {
    const Mesh other = test::two_triangle_square();
    const FeFunction v(other, Eigen::VectorXd::Zero(4));
    CHECK_THROWS_AS(assemble_chemotaxis(tri, v), Error);
  }
}

TEST_CASE("nodal interpolation") {
  const Mesh mesh = build_macro_mesh(2, MacroKind::Acute);

  SUBCASE("constants reproduce") {
    const FeFunction f = nodal_interpolate([](Point2) { return 3.5; }, mesh);
    CHECK(f.values().minCoeff() == 3.5);
    CHECK(f.values().maxCoeff() == 3.5);
  }

  SUBCASE("linears reproduce, including at barycentres") {
    const FeFunction f = nodal_interpolate([](Point2 p) { return p.x; }, mesh);
    for (int i = 0; i < mesh.vertex_count(); ++i) CHECK(f[i] == mesh.vertices[i].x);
    for (const Triangle& t : mesh.triangles) {
      const double bary_x =
          (mesh.vertices[t[0]].x + mesh.vertices[t[1]].x + mesh.vertices[t[2]].x) / 3.0;
      const double bary_f = (f[t[0]] + f[t[1]] + f[t[2]]) / 3.0;
      CHECK(bary_f == doctest::Approx(bary_x).epsilon(1e-15));
    }
  }

  SUBCASE("bell data peak sits at the origin node") {
    const Mesh fine = build_macro_mesh(50, MacroKind::Acute);
    const double c0 = 70.0;
    const FeFunction u0 = nodal_interpolate(
        [c0](Point2 p) { return c0 * std::exp(-c0 * (p.x * p.x + p.y * p.y)); }, fine);
    int nearest = 0;
    double best = 1e300;
    for (int i = 0; i < fine.vertex_count(); ++i) {
      const double d = std::hypot(fine.vertices[i].x, fine.vertices[i].y);
      if (d < best) {
        best = d;
        nearest = i;
      }
    }
    CHECK(best == 0.0);  // (0,0) is a macro corner for even nsquare
    CHECK(u0[nearest] == 70.0);
    CHECK(u0.values().maxCoeff() == 70.0);
  }

  SUBCASE("non-finite values are rejected with the vertex named") {
    try {
      nodal_interpolate([](Point2 p) { return p.x == -0.5 ? 1.0 / 0.0 : 1.0; }, mesh);
      FAIL("expected Error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("vertex") != std::string::npos);
    }
  }
}

TEST_CASE("discrete laplacian: definition and constants") {
  const Mesh mesh = build_macro_mesh(3, MacroKind::Acute);
  const LumpedMass m = assemble_lumped_mass(mesh);
  const SparseOperator a = assemble_stiffness(mesh);

  SUBCASE("constant fields map to zero") {
    const FeFunction v(mesh, Eigen::VectorXd::Constant(mesh.vertex_count(), 2.0));
    const FeFunction w = discrete_laplacian(v, m, a);
    CHECK(w.values().cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("defining identity M w = -A v") {
    std::mt19937 rng(7);
    const FeFunction v = test::random_function(mesh, rng);
    const FeFunction w = discrete_laplacian(v, m, a);
    const Eigen::VectorXd residual = m.diagonal.cwiseProduct(w.values()) + a.matrix * v.values();
    const double scale = (a.matrix * v.values()).cwiseAbs().maxCoeff();
    CHECK(residual.cwiseAbs().maxCoeff() <= 1e-12 * scale);
  }
}

TEST_CASE("discrete laplacian of x^2+y^2 approaches 4 at symmetric interior nodes") {
  // Refinement study: at the grid-corner node nearest the origin the vertex
  // patch is point-symmetric and the lumped Laplacian of a quadratic is
  // consistent; the error must decay roughly first order or better.
  double prev_err = 1e300;
  for (int n : {4, 8, 16}) {
    const Mesh mesh = build_macro_mesh(n, MacroKind::Acute);
    const LumpedMass m = assemble_lumped_mass(mesh);
    const SparseOperator a = assemble_stiffness(mesh);
    const FeFunction v =
        nodal_interpolate([](Point2 p) { return p.x * p.x + p.y * p.y; }, mesh);
    const FeFunction w = discrete_laplacian(v, m, a);
    int node = -1;
    for (int i = 0; i < mesh.vertex_count(); ++i)
      if (mesh.vertices[i].x == 0.0 && mesh.vertices[i].y == 0.0) node = i;
    REQUIRE(node >= 0);
    const double err = std::abs(w[node] - 4.0);
    CHECK(err < 0.5);
    CHECK(err <= prev_err + 1e-9);
    prev_err = err;
  }
  CHECK(prev_err < 0.05);
}

TEST_CASE("norms") {
  const Mesh mesh = build_macro_mesh(2, MacroKind::Acute);
  const LumpedMass m = assemble_lumped_mass(mesh);
  const SparseOperator a = assemble_stiffness(mesh);

  SUBCASE("unit constant on the unit-measure mesh") {
    const FeFunction u(mesh, Eigen::VectorXd::Ones(mesh.vertex_count()));
    const NormReport r = norms(u, m, a);
    CHECK(r.lumped_l2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.grad_l2 < 1e-6);
    CHECK(r.lumped_l1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.min == 1.0);
    CHECK(r.max == 1.0);
  }

  SUBCASE("blowup bell data against the closed-form integrals") {
    // At moderate resolution the lumped/interpolated quantities sit within a
    // few percent of the exact integrals 1e6 pi/200 and 250000 pi.
    const Mesh fine = build_macro_mesh(40, MacroKind::Acute);
    const LumpedMass mf = assemble_lumped_mass(fine);
    const SparseOperator af = assemble_stiffness(fine);
    const FeFunction u0 = nodal_interpolate(
        [](Point2 p) { return 1000.0 * std::exp(-100.0 * (p.x * p.x + p.y * p.y)); }, fine);
    const FeFunction v0 = nodal_interpolate(
        [](Point2 p) { return 500.0 * std::exp(-50.0 * (p.x * p.x + p.y * p.y)); }, fine);
    const NormReport ru = norms(u0, mf, af);
    const NormReport rv = norms(v0, mf, af);
    CHECK(std::abs(ru.lumped_l2 * ru.lumped_l2 - 1e6 * M_PI / 200.0) / (1e6 * M_PI / 200.0) <
          0.03);
    CHECK(std::abs(rv.grad_l2 * rv.grad_l2 - 250000.0 * M_PI) / (250000.0 * M_PI) < 0.03);
  }
}

TEST_CASE("fe function text dump") {
  const Mesh mesh = test::unit_right_triangle();
  Eigen::VectorXd vals(3);
  vals << 1.0, -0.25, 1e-17;
  const auto path = std::filesystem::temp_directory_path() / "fefun.txt";
  save_fe_function(FeFunction(mesh, vals), path);
  std::ifstream in(path);
  double a, b, c;
  in >> a >> b >> c;
  CHECK(a == 1.0);
  CHECK(b == -0.25);
  CHECK(c == 1e-17);
  std::filesystem::remove(path);
}

TEST_CASE("fe function validates its coefficients") {
  const Mesh mesh = test::unit_right_triangle();
  CHECK_THROWS_AS(FeFunction(mesh, Eigen::VectorXd::Zero(5)), Error);
  Eigen::VectorXd bad(3);
  bad << 0.0, std::numeric_limits<double>::quiet_NaN(), 1.0;
  CHECK_THROWS_AS(FeFunction(mesh, bad), Error);
}
