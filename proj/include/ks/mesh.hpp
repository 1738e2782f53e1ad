#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "ks/errors.hpp"

namespace ks {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

using Triangle = std::array<int, 3>;

enum class MacroKind { Acute, NonAcute, External };

/// Conforming triangulation of a planar, simply connected polygon.
/// Triangles are counter-clockwise. Immutable after construction; safe to
/// share read-only across threads.
struct Mesh {
  std::vector<Point2> vertices;
  std::vector<Triangle> triangles;
  std::vector<int> boundary_vertices;  // sorted, derived from edge incidence
  MacroKind macro_kind = MacroKind::External;
  int nsquare = 0;  // macro grid resolution; 0 when not built from macros

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
};

struct AngleReport {
  double max_angle_deg = 0.0;
  double min_angle_deg = 0.0;
  bool is_acute = false;  // max_angle_deg < 90, strictly
  int worst_triangle = -1;
};

/// Tile [-1/2,1/2]^2 with nsquare x nsquare square macroelements, each split
/// into 14 triangles: 4 corners, 4 edge midpoints shared with the neighbours,
/// and 4 interior vertices forming a rhombus whose short diagonal carries the
/// central edge. The Acute layout keeps every angle strictly below 90 degrees;
/// the NonAcute layout repositions the interior vertices so the two central
/// triangles turn obtuse.
Mesh build_macro_mesh(int nsquare, MacroKind kind);

/// Exact max/min over all 3T vertex angles. Throws on a degenerate triangle.
AngleReport acuteness_report(const Mesh& mesh);

/// Largest triangle diameter (longest edge). Throws on an empty mesh.
double mesh_size(const Mesh& mesh);

double signed_area(const Mesh& mesh, int t);

/// Number of distinct undirected edges.
std::size_t count_edges(const Mesh& mesh);

/// Structural checks: indices in range and distinct, positive signed areas,
/// consistent orientation, every edge shared by at most two triangles, Euler
/// identity V - E + T = 1, no two vertices closer than 1e-12, and total area
/// matching the boundary polygon. Throws Error on the first violation.
/// Also (re)derives boundary_vertices from edge incidence.
void finalize_mesh(Mesh& mesh);

/// Plain-text format: "KSMESH 1", "V <count>", V lines "x y",
/// "T <count>", T lines "i j k" (0-based). Coordinates are written with 17
/// significant digits so a round trip is bit-exact.
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);
Mesh load_mesh(const std::filesystem::path& path);

/// Geometric/topological equality: bit-exact vertices, identical triangles
/// and boundary set. Provenance fields (macro_kind, nsquare) are not part of
/// the serialized format and are not compared.
bool same_mesh(const Mesh& a, const Mesh& b);

}  // namespace ks
