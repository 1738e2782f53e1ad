#include "ks/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace ks {

namespace {

// Interior-vertex offsets of the 14-triangle macroelement, in macro-local
// coordinates on [0,1]^2 relative to the centre (1/2,1/2). The main-diagonal
// pair sits at +-(p,p), the anti-diagonal pair at (+-q,-+q); the central edge
// joins the anti-diagonal pair, so the two central triangles are acute
// exactly when p > q. Chosen by a parameter scan: the acute layout has a
// maximum angle of 72.53 degrees, the non-acute layout turns the two central
// triangles obtuse (119.07 degrees) while keeping the ring acute.
constexpr double kAcuteMainOffset = 0.17;
constexpr double kAcuteCrossOffset = 0.12;
constexpr double kNonAcuteMainOffset = 0.10;
constexpr double kNonAcuteCrossOffset = 0.17;

double cross2(const Point2& a, const Point2& b, const Point2& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

double dist(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct EdgeKey {
  int a, b;  // a < b
  bool operator==(const EdgeKey& o) const { return a == o.a && b == o.b; }
};

struct EdgeKeyHash {
  std::size_t operator()(const EdgeKey& e) const {
    return std::hash<std::uint64_t>()((std::uint64_t(e.a) << 32) | std::uint32_t(e.b));
  }
};

}  // namespace

Mesh build_macro_mesh(int nsquare, MacroKind kind) {
  if (nsquare < 1) throw ConfigError("build_macro_mesh: nsquare must be >= 1");
  if (kind == MacroKind::External)
    throw ConfigError("build_macro_mesh: kind must be Acute or NonAcute");

  const int n = nsquare;
  const double p = (kind == MacroKind::Acute) ? kAcuteMainOffset : kNonAcuteMainOffset;
  const double q = (kind == MacroKind::Acute) ? kAcuteCrossOffset : kNonAcuteCrossOffset;

  Mesh m;
  m.macro_kind = kind;
  m.nsquare = n;

  // Global vertex layout: grid corners, horizontal-edge midpoints,
  // vertical-edge midpoints, then 4 interior vertices per macro. Shared
  // vertices are single instances by construction, and every coordinate is
  // produced by one formula so neighbours agree bit-exactly.
  const int o_h = (n + 1) * (n + 1);
  const int o_v = o_h + n * (n + 1);
  const int o_i = o_v + (n + 1) * n;
  m.vertices.resize(o_i + 4 * n * n);

  auto coord = [n](double steps) { return -0.5 + steps / n; };
  auto corner = [n](int i, int j) { return j * (n + 1) + i; };
  auto hmid = [n, o_h](int i, int j) { return o_h + j * n + i; };
  auto vmid = [n, o_v](int i, int j) { return o_v + j * (n + 1) + i; };
  auto interior = [n, o_i](int i, int j, int which) { return o_i + 4 * (j * n + i) + which; };

  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) m.vertices[corner(i, j)] = {coord(i), coord(j)};
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i < n; ++i) m.vertices[hmid(i, j)] = {coord(i + 0.5), coord(j)};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= n; ++i) m.vertices[vmid(i, j)] = {coord(i), coord(j + 0.5)};

  const double local[4][2] = {{0.5 - p, 0.5 - p},   // P0, lower-left
                              {0.5 + q, 0.5 - q},   // P1, lower-right
                              {0.5 + p, 0.5 + p},   // P2, upper-right
                              {0.5 - q, 0.5 + q}};  // P3, upper-left
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int w = 0; w < 4; ++w)
        m.vertices[interior(i, j, w)] = {coord(i + local[w][0]), coord(j + local[w][1])};

  m.triangles.reserve(14 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int c00 = corner(i, j), c10 = corner(i + 1, j);
      const int c11 = corner(i + 1, j + 1), c01 = corner(i, j + 1);
      const int mb = hmid(i, j), mt = hmid(i, j + 1);
      const int ml = vmid(i, j), mr = vmid(i + 1, j);
      const int p0 = interior(i, j, 0), p1 = interior(i, j, 1);
      const int p2 = interior(i, j, 2), p3 = interior(i, j, 3);
      const Triangle macro_tris[14] = {
          {c00, mb, p0}, {mb, p1, p0}, {mb, c10, p1}, {c10, mr, p1},
          {mr, p2, p1},  {mr, c11, p2}, {c11, mt, p2}, {mt, p3, p2},
          {mt, c01, p3}, {c01, ml, p3}, {ml, p0, p3}, {ml, c00, p0},
          {p0, p1, p3},  {p1, p2, p3}};
      m.triangles.insert(m.triangles.end(), macro_tris, macro_tris + 14);
    }
  }

  finalize_mesh(m);
  return m;
}

double signed_area(const Mesh& mesh, int t) {
  const Triangle& tri = mesh.triangles[t];
  return 0.5 * cross2(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
}

AngleReport acuteness_report(const Mesh& mesh) {
  if (mesh.triangles.empty()) throw Error("acuteness_report: empty mesh");
  AngleReport r;
  r.max_angle_deg = 0.0;
  r.min_angle_deg = 180.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    if (std::abs(signed_area(mesh, t)) < 1e-300)
      throw Error("acuteness_report: degenerate triangle " + std::to_string(t));
    const Triangle& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const Point2& a = mesh.vertices[tri[k]];
      const Point2& b = mesh.vertices[tri[(k + 1) % 3]];
      const Point2& c = mesh.vertices[tri[(k + 2) % 3]];
      const double ux = b.x - a.x, uy = b.y - a.y;
      const double vx = c.x - a.x, vy = c.y - a.y;
      const double nu = std::hypot(ux, uy), nv = std::hypot(vx, vy);
      if (nu == 0.0 || nv == 0.0)
        throw Error("acuteness_report: degenerate triangle " + std::to_string(t));
      double cosang = (ux * vx + uy * vy) / (nu * nv);
      cosang = std::clamp(cosang, -1.0, 1.0);
      const double deg = std::acos(cosang) * 180.0 / M_PI;
      if (deg > r.max_angle_deg) {
        r.max_angle_deg = deg;
        r.worst_triangle = t;
      }
      r.min_angle_deg = std::min(r.min_angle_deg, deg);
    }
  }
  r.is_acute = r.max_angle_deg < 90.0;
  return r;
}

double mesh_size(const Mesh& mesh) {
  if (mesh.triangles.empty()) throw Error("mesh_size: empty mesh");
  double h = 0.0;
  for (const Triangle& tri : mesh.triangles)
    for (int k = 0; k < 3; ++k)
      h = std::max(h, dist(mesh.vertices[tri[k]], mesh.vertices[tri[(k + 1) % 3]]));
  return h;
}

std::size_t count_edges(const Mesh& mesh) {
  std::unordered_map<EdgeKey, int, EdgeKeyHash> edges;
  edges.reserve(mesh.triangles.size() * 2);
  for (const Triangle& tri : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      int a = tri[k], b = tri[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edges[EdgeKey{a, b}];
    }
  return edges.size();
}

void finalize_mesh(Mesh& mesh) {
  const int nv = mesh.vertex_count();
  const int nt = mesh.triangle_count();
  if (nv < 3 || nt < 1) throw Error("mesh: needs at least one triangle");

  for (int i = 0; i < nv; ++i)
    if (!std::isfinite(mesh.vertices[i].x) || !std::isfinite(mesh.vertices[i].y))
      throw Error("mesh: non-finite coordinate at vertex " + std::to_string(i));

  // No two vertices within 1e-12 of each other (grid hash on a 1e-10 cell).
  {
    std::unordered_map<std::uint64_t, std::vector<int>> grid;
    grid.reserve(nv);
    auto cell = [](double x) { return std::int64_t(std::floor(x * 1e10)); };
    auto key = [](std::int64_t cx, std::int64_t cy) {
      return (std::uint64_t(cx) << 32) ^ std::uint64_t(cy & 0xffffffff);
    };
    for (int i = 0; i < nv; ++i) {
      const std::int64_t cx = cell(mesh.vertices[i].x), cy = cell(mesh.vertices[i].y);
      for (std::int64_t dx = -1; dx <= 1; ++dx)
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
          auto it = grid.find(key(cx + dx, cy + dy));
          if (it == grid.end()) continue;
          for (int j : it->second)
            if (dist(mesh.vertices[i], mesh.vertices[j]) < 1e-12)
              throw Error("mesh: vertices " + std::to_string(j) + " and " + std::to_string(i) +
                          " coincide");
        }
      grid[key(cx, cy)].push_back(i);
    }
  }

  double total_area = 0.0;
  std::unordered_map<EdgeKey, int, EdgeKeyHash> undirected;
  std::unordered_map<std::uint64_t, int> directed;
  undirected.reserve(nt * 2);
  directed.reserve(nt * 3);
  for (int t = 0; t < nt; ++t) {
    const Triangle& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] < 0 || tri[k] >= nv)
        throw Error("mesh: triangle " + std::to_string(t) + " references vertex " +
                    std::to_string(tri[k]) + " out of range");
      if (tri[k] == tri[(k + 1) % 3])
        throw Error("mesh: triangle " + std::to_string(t) + " has repeated vertices");
    }
    const double area = signed_area(mesh, t);
    if (!(area > 0.0))
      throw Error("mesh: triangle " + std::to_string(t) +
                  " is not counter-clockwise (signed area " + std::to_string(area) + ")");
    total_area += area;
    for (int k = 0; k < 3; ++k) {
      int a = tri[k], b = tri[(k + 1) % 3];
      const std::uint64_t dkey = (std::uint64_t(a) << 32) | std::uint32_t(b);
      if (++directed[dkey] > 1)
        throw Error("mesh: directed edge (" + std::to_string(a) + "," + std::to_string(b) +
                    ") appears twice; orientation inconsistent or triangle duplicated");
      if (a > b) std::swap(a, b);
      if (++undirected[EdgeKey{a, b}] > 2)
        throw Error("mesh: edge (" + std::to_string(a) + "," + std::to_string(b) +
                    ") shared by more than two triangles");
    }
  }

  const std::size_t ne = undirected.size();
  if (std::int64_t(nv) - std::int64_t(ne) + std::int64_t(nt) != 1)
    throw Error("mesh: Euler identity V - E + T = 1 violated (V=" + std::to_string(nv) +
                " E=" + std::to_string(ne) + " T=" + std::to_string(nt) + ")");

  // Boundary = edges with a single incident triangle. Trace the loop and
  // compare its enclosed area with the triangle total; this catches overlaps
  // and hanging nodes that pure index checks miss.
  std::unordered_map<int, int> boundary_next;
  for (const auto& [dkey, cnt] : directed) {
    const int a = int(dkey >> 32), b = int(dkey & 0xffffffff);
    int lo = std::min(a, b), hi = std::max(a, b);
    if (undirected[EdgeKey{lo, hi}] == 1) {
      if (boundary_next.count(a))
        throw Error("mesh: boundary is not a simple loop at vertex " + std::to_string(a));
      boundary_next[a] = b;
    }
  }
  if (boundary_next.empty()) throw Error("mesh: no boundary found");
  std::vector<int> loop;
  loop.reserve(boundary_next.size());
  const int start = boundary_next.begin()->first;
  int cur = start;
  do {
    loop.push_back(cur);
    auto it = boundary_next.find(cur);
    if (it == boundary_next.end())
      throw Error("mesh: boundary loop broken at vertex " + std::to_string(cur));
    cur = it->second;
  } while (cur != start && loop.size() <= boundary_next.size());
  if (loop.size() != boundary_next.size())
    throw Error("mesh: boundary has more than one loop");

  double loop_area = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Point2& a = mesh.vertices[loop[i]];
    const Point2& b = mesh.vertices[loop[(i + 1) % loop.size()]];
    loop_area += 0.5 * (a.x * b.y - a.y * b.x);
  }
  if (std::abs(loop_area - total_area) > 1e-12 * std::max(1.0, total_area))
    throw Error("mesh: triangle area sum does not match the boundary polygon area");

  mesh.boundary_vertices = loop;
  std::sort(mesh.boundary_vertices.begin(), mesh.boundary_vertices.end());
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("save_mesh: cannot open " + path.string());
  out << "KSMESH 1\n";
  out << "V " << mesh.vertex_count() << "\n";
  char buf[64];
  for (const Point2& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.16e %.16e\n", v.x, v.y);
    out << buf;
  }
  out << "T " << mesh.triangle_count() << "\n";
  for (const Triangle& t : mesh.triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
  if (!out) throw Error("save_mesh: write failed for " + path.string());
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_mesh: cannot open " + path.string());
  const std::string file = path.string();
  int lineno = 0;
  std::string line;

  auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line)) throw ParseError("unexpected end of file", file, lineno);
    ++lineno;
    return line;
  };

  if (next_line() != "KSMESH 1") throw ParseError("expected header 'KSMESH 1'", file, lineno);

  Mesh m;
  {
    std::istringstream hdr(next_line());
    std::string tag;
    long count = -1;
    if (!(hdr >> tag >> count) || tag != "V" || count < 3)
      throw ParseError("expected 'V <count>'", file, lineno);
    m.vertices.resize(count);
  }
  for (Point2& v : m.vertices) {
    std::istringstream row(next_line());
    std::string extra;
    if (!(row >> v.x >> v.y) || (row >> extra))
      throw ParseError("expected 'x y'", file, lineno);
  }
  {
    std::istringstream hdr(next_line());
    std::string tag;
    long count = -1;
    if (!(hdr >> tag >> count) || tag != "T" || count < 1)
      throw ParseError("expected 'T <count>'", file, lineno);
    m.triangles.resize(count);
  }
  for (Triangle& t : m.triangles) {
    std::istringstream row(next_line());
    std::string extra;
    if (!(row >> t[0] >> t[1] >> t[2]) || (row >> extra))
      throw ParseError("expected 'i j k'", file, lineno);
    for (int k = 0; k < 3; ++k)
      if (t[k] < 0 || t[k] >= m.vertex_count())
        throw ParseError("vertex index " + std::to_string(t[k]) + " out of range", file, lineno);
    const double area =
        0.5 * cross2(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
    if (!(area > 0.0))
      throw ParseError("triangle is not counter-clockwise (signed area " +
                           std::to_string(area) + ")",
                       file, lineno);
  }

  try {
    finalize_mesh(m);
  } catch (const Error& e) {
    throw ParseError(e.what(), file, 0);
  }
  return m;
}

bool same_mesh(const Mesh& a, const Mesh& b) {
  if (a.vertex_count() != b.vertex_count() || a.triangle_count() != b.triangle_count())
    return false;
  for (int i = 0; i < a.vertex_count(); ++i)
    if (a.vertices[i].x != b.vertices[i].x || a.vertices[i].y != b.vertices[i].y) return false;
  return a.triangles == b.triangles && a.boundary_vertices == b.boundary_vertices;
}

}  // namespace ks
