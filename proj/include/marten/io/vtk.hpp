#pragma once

#include "marten/io/csv.hpp"
#include "marten/mesh.hpp"

#include <optional>
#include <string>
#include <vector>

namespace marten::io {

/// Legacy ASCII VTK unstructured grid of the reference configuration with
/// the deformation and displacement as point vectors and the director,
/// temperature and phase index (0 austenite, k + 1 variant k) as cell data.
inline std::string format_vtk(const Triangulation& mesh, const FilmState& s, const ScalarP0* theta = nullptr,
                              const std::vector<int>* phase = nullptr, const std::string& title = "film state") {
  check_state(s, mesh);
  const std::size_t nn = mesh.num_nodes();
  const std::size_t ne = mesh.num_elements();
  std::string out;
  out.reserve(128 * (nn + ne));
  auto vec3 = [&](double a, double b, double c) {
    out += format_double(a);
    out += ' ';
    out += format_double(b);
    out += ' ';
    out += format_double(c);
    out += '\n';
  };
  out += "# vtk DataFile Version 3.0\n";
  out += title.substr(0, 255) + "\n";
  out += "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out += "POINTS " + std::to_string(nn) + " double\n";
  for (const Vector2& p : mesh.nodes()) vec3(p.x(), p.y(), 0.0);
  out += "CELLS " + std::to_string(ne) + " " + std::to_string(4 * ne) + "\n";
  for (const auto& t : mesh.triangles()) {
    out += "3 " + std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
  }
  out += "CELL_TYPES " + std::to_string(ne) + "\n";
  for (std::size_t k = 0; k < ne; ++k) out += "5\n";

  out += "POINT_DATA " + std::to_string(nn) + "\n";
  out += "VECTORS deformation double\n";
  for (std::size_t i = 0; i < nn; ++i) {
    const auto y = s.y.values.col(static_cast<Eigen::Index>(i));
    vec3(y(0), y(1), y(2));
  }
  out += "VECTORS displacement double\n";
  for (std::size_t i = 0; i < nn; ++i) {
    const auto y = s.y.values.col(static_cast<Eigen::Index>(i));
    vec3(y(0) - mesh.node(i).x(), y(1) - mesh.node(i).y(), y(2));
  }

  out += "CELL_DATA " + std::to_string(ne) + "\n";
  out += "VECTORS director double\n";
  for (std::size_t k = 0; k < ne; ++k) {
    const auto b = s.b.values.col(static_cast<Eigen::Index>(k));
    vec3(b(0), b(1), b(2));
  }
  if (theta) {
    out += "SCALARS theta double 1\nLOOKUP_TABLE default\n";
    for (std::size_t k = 0; k < ne; ++k) out += format_double(theta->values(static_cast<Eigen::Index>(k))) + "\n";
  }
  if (phase) {
    out += "SCALARS phase int 1\nLOOKUP_TABLE default\n";
    for (int p : *phase) out += std::to_string(p) + "\n";
  }
  return out;
}

}  // namespace marten::io
