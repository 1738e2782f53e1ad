#include "ks/vtk.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ks {

void write_vtk(const Mesh& mesh, const std::filesystem::path& path, const std::string& title,
               const std::vector<NamedField>& point_fields) {
  std::ofstream out(path);
  if (!out) throw Error("write_vtk: cannot open " + path.string());
  out << "# vtk DataFile Version 2.0\n" << title << "\nASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.vertex_count() << " double\n";
  char buf[80];
  for (const Point2& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.9g %.9g 0\n", v.x, v.y);
    out << buf;
  }
  out << "CELLS " << mesh.triangle_count() << " " << 4 * mesh.triangle_count() << "\n";
  for (const Triangle& t : mesh.triangles)
    out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << mesh.triangle_count() << "\n";
  for (int t = 0; t < mesh.triangle_count(); ++t) out << "5\n";
  if (!point_fields.empty()) {
    out << "POINT_DATA " << mesh.vertex_count() << "\n";
    for (const auto& [name, values] : point_fields) {
      if (values->size() != mesh.vertex_count())
        throw Error("write_vtk: field '" + name + "' has wrong length");
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (int i = 0; i < values->size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.9g\n", (*values)[i]);
        out << buf;
      }
    }
  }
  if (!out) throw Error("write_vtk: write failed for " + path.string());
}

VtkSummary read_vtk_summary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_vtk_summary: cannot open " + path.string());
  const std::string file = path.string();
  int lineno = 0;
  std::string line;
  auto next = [&]() -> std::string& {
    if (!std::getline(in, line)) throw ParseError("unexpected end of file", file, lineno);
    ++lineno;
    return line;
  };

  if (next().rfind("# vtk DataFile Version", 0) != 0)
    throw ParseError("missing version line", file, lineno);
  next();  // title
  if (next() != "ASCII") throw ParseError("expected ASCII", file, lineno);
  if (next() != "DATASET UNSTRUCTURED_GRID")
    throw ParseError("expected DATASET UNSTRUCTURED_GRID", file, lineno);

  VtkSummary s;
  {
    std::istringstream hdr(next());
    std::string tag, type;
    if (!(hdr >> tag >> s.points >> type) || tag != "POINTS" || s.points <= 0)
      throw ParseError("expected 'POINTS <n> <type>'", file, lineno);
  }
  for (int i = 0; i < s.points; ++i) {
    std::istringstream row(next());
    double x, y, z;
    if (!(row >> x >> y >> z)) throw ParseError("bad point row", file, lineno);
  }
  int cell_ints = 0;
  {
    std::istringstream hdr(next());
    std::string tag;
    if (!(hdr >> tag >> s.cells >> cell_ints) || tag != "CELLS" || s.cells <= 0)
      throw ParseError("expected 'CELLS <n> <size>'", file, lineno);
  }
  int ints_seen = 0;
  for (int c = 0; c < s.cells; ++c) {
    std::istringstream row(next());
    int npts;
    if (!(row >> npts) || npts <= 0) throw ParseError("bad cell row", file, lineno);
    ++ints_seen;
    for (int k = 0; k < npts; ++k) {
      int idx;
      if (!(row >> idx) || idx < 0 || idx >= s.points)
        throw ParseError("cell references point out of range", file, lineno);
      ++ints_seen;
    }
  }
  if (ints_seen != cell_ints)
    throw ParseError("CELLS size field does not match the connectivity list", file, lineno);
  {
    std::istringstream hdr(next());
    std::string tag;
    int n;
    if (!(hdr >> tag >> n) || tag != "CELL_TYPES" || n != s.cells)
      throw ParseError("expected 'CELL_TYPES <n>'", file, lineno);
  }
  for (int c = 0; c < s.cells; ++c) next();

  if (std::getline(in, line)) {
    ++lineno;
    std::istringstream hdr(line);
    std::string tag;
    int n;
    if (!(hdr >> tag >> n) || tag != "POINT_DATA" || n != s.points)
      throw ParseError("expected 'POINT_DATA <n>'", file, lineno);
    std::string probe;
    while (std::getline(in, probe)) {
      ++lineno;
      std::istringstream shdr(probe);
      std::string scalars, name, type;
      if (!(shdr >> scalars >> name >> type) || scalars != "SCALARS")
        throw ParseError("expected 'SCALARS <name> <type>'", file, lineno);
      if (next().rfind("LOOKUP_TABLE", 0) != 0)
        throw ParseError("expected LOOKUP_TABLE", file, lineno);
      for (int i = 0; i < s.points; ++i) {
        std::istringstream row(next());
        double v;
        if (!(row >> v)) throw ParseError("bad scalar row", file, lineno);
      }
      s.field_names.push_back(name);
    }
  }
  return s;
}

}  // namespace ks
