#pragma once

#include "marten/io/csv.hpp"
#include "marten/mesh.hpp"

#include <istream>
#include <sstream>
#include <string>

namespace marten::io {

// Plain-text mesh format ('#' starts a comment):
//
//   nodes <N>
//   <x> <y>            (N lines)
//   triangles <M>
//   <a> <b> <c>        (M lines, zero-based node indices)

namespace detail {

inline bool next_data_line(std::istream& in, std::string& line, int& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

inline std::size_t read_header(std::istream& in, const std::string& keyword, int& line_no) {
  std::string line;
  if (!next_data_line(in, line, line_no)) throw InvalidInput("mesh file: missing '" + keyword + "' header");
  std::istringstream ss(line);
  std::string word;
  long long count = -1;
  ss >> word >> count;
  if (word != keyword || count < 0)
    throw InvalidInput("mesh file line " + std::to_string(line_no) + ": expected '" + keyword + " <count>'");
  return static_cast<std::size_t>(count);
}

}  // namespace detail

inline Triangulation read_mesh(std::istream& in) {
  int line_no = 0;
  std::string line;
  const std::size_t nn = detail::read_header(in, "nodes", line_no);
  std::vector<Vector2> nodes(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    if (!detail::next_data_line(in, line, line_no)) throw InvalidInput("mesh file: truncated node list");
    std::istringstream ss(line);
    if (!(ss >> nodes[i].x() >> nodes[i].y()))
      throw InvalidInput("mesh file line " + std::to_string(line_no) + ": expected two coordinates");
  }
  const std::size_t nt = detail::read_header(in, "triangles", line_no);
  std::vector<std::array<int, 3>> tris(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    if (!detail::next_data_line(in, line, line_no)) throw InvalidInput("mesh file: truncated triangle list");
    std::istringstream ss(line);
    if (!(ss >> tris[k][0] >> tris[k][1] >> tris[k][2]))
      throw InvalidInput("mesh file line " + std::to_string(line_no) + ": expected three node indices");
  }
  return Triangulation(std::move(nodes), std::move(tris));
}

inline std::string format_mesh(const Triangulation& mesh) {
  std::string out = "nodes " + std::to_string(mesh.num_nodes()) + "\n";
  for (const Vector2& p : mesh.nodes()) out += format_double(p.x()) + " " + format_double(p.y()) + "\n";
  out += "triangles " + std::to_string(mesh.num_elements()) + "\n";
  for (const auto& t : mesh.triangles()) {
    out += std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
  }
  return out;
}

}  // namespace marten::io
