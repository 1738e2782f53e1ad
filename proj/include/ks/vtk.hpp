#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ks/mesh.hpp"

namespace ks {

using NamedField = std::pair<std::string, const Eigen::VectorXd*>;

/// Legacy VTK ASCII unstructured grid with one SCALARS block per field.
void write_vtk(const Mesh& mesh, const std::filesystem::path& path, const std::string& title,
               const std::vector<NamedField>& point_fields);

struct VtkSummary {
  int points = 0;
  int cells = 0;
  std::vector<std::string> field_names;
};

/// Minimal legacy-VTK reader used to self-check emitted files. Throws
/// ParseError when the structure is inconsistent.
VtkSummary read_vtk_summary(const std::filesystem::path& path);

}  // namespace ks
