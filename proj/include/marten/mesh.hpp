#pragma once

#include "marten/crystallography.hpp"
#include "marten/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace marten {

struct Rectangle {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
  double area() const { return (x1 - x0) * (y1 - y0); }
  bool contains(const Vector2& p) const { return p.x() >= x0 && p.x() <= x1 && p.y() >= y0 && p.y() <= y1; }
};

/// Edge of a triangulation. Interior edges have k1 < k2; boundary edges have
/// k2 == -1. Jumps are taken as value(k1) - value(k2).
struct Edge {
  int a = 0, b = 0;  // node indices, a < b
  int k1 = 0, k2 = -1;
  double length = 0.0;
  bool interior() const { return k2 >= 0; }
};

/// Conforming triangulation of a planar film domain, immutable after
/// construction. Triangles are stored counter-clockwise.
class Triangulation {
 public:
  Triangulation() = default;

  Triangulation(std::vector<Vector2> nodes, std::vector<std::array<int, 3>> triangles)
      : nodes_(std::move(nodes)), triangles_(std::move(triangles)) {
    build();
  }

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_elements() const { return triangles_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const std::vector<Vector2>& nodes() const { return nodes_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Vector2& node(std::size_t i) const { return nodes_[i]; }
  const std::array<int, 3>& triangle(std::size_t k) const { return triangles_[k]; }
  const Edge& edge(std::size_t e) const { return edges_[e]; }

  double area(std::size_t k) const { return areas_[k]; }
  const Vector2& barycenter(std::size_t k) const { return barycenters_[k]; }
  /// Gradients of the three P1 basis functions of element k (rows).
  const Eigen::Matrix<double, 3, 2>& shape_gradients(std::size_t k) const { return shape_grads_[k]; }

  bool on_boundary(std::size_t node) const { return boundary_node_[node] != 0; }
  const std::vector<char>& boundary_mask() const { return boundary_node_; }

  double total_area() const {
    double s = 0.0;
    for (double a : areas_) s += a;
    return s;
  }

  /// Mesh size: the longest edge.
  double h() const {
    double m = 0.0;
    for (const Edge& e : edges_) m = std::max(m, e.length);
    return m;
  }

  std::size_t num_interior_edges() const {
    return static_cast<std::size_t>(std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return e.interior(); }));
  }
  std::size_t num_boundary_edges() const { return num_edges() - num_interior_edges(); }

 private:
  void build() {
    const std::size_t nk = triangles_.size();
    if (nk == 0) throw InvalidInput("triangulation has no elements");
    areas_.resize(nk);
    barycenters_.resize(nk);
    shape_grads_.resize(nk);
    for (std::size_t k = 0; k < nk; ++k) {
      auto& t = triangles_[k];
      for (int v : t) {
        if (v < 0 || static_cast<std::size_t>(v) >= nodes_.size()) throw InvalidInput("triangle references a missing node");
      }
      double twice = signed_twice_area(t);
      if (twice < 0.0) {
        std::swap(t[1], t[2]);
        twice = -twice;
      }
      if (!(twice > 0.0)) throw InvalidInput("degenerate triangle " + std::to_string(k));
      areas_[k] = 0.5 * twice;
      const Vector2& p0 = nodes_[t[0]];
      const Vector2& p1 = nodes_[t[1]];
      const Vector2& p2 = nodes_[t[2]];
      barycenters_[k] = (p0 + p1 + p2) / 3.0;
      // grad N_a = rot90(opposite edge) / (2|K|)
      Eigen::Matrix<double, 3, 2> g;
      g.row(0) = Vector2(p1.y() - p2.y(), p2.x() - p1.x()) / twice;
      g.row(1) = Vector2(p2.y() - p0.y(), p0.x() - p2.x()) / twice;
      g.row(2) = Vector2(p0.y() - p1.y(), p1.x() - p0.x()) / twice;
      shape_grads_[k] = g;
    }

    std::map<std::pair<int, int>, std::size_t> lookup;
    for (std::size_t k = 0; k < nk; ++k) {
      const auto& t = triangles_[k];
      for (int s = 0; s < 3; ++s) {
        int a = t[s], b = t[(s + 1) % 3];
        if (a > b) std::swap(a, b);
        auto [it, inserted] = lookup.try_emplace({a, b}, edges_.size());
        if (inserted) {
          Edge e;
          e.a = a;
          e.b = b;
          e.k1 = static_cast<int>(k);
          e.length = (nodes_[a] - nodes_[b]).norm();
          edges_.push_back(e);
        } else {
          Edge& e = edges_[it->second];
          if (e.k2 >= 0) throw InvalidInput("non-conforming triangulation: edge shared by more than two triangles");
          e.k2 = static_cast<int>(k);  // elements visited in ascending order, so k1 < k2
        }
      }
    }
    boundary_node_.assign(nodes_.size(), 0);
    for (const Edge& e : edges_) {
      if (!e.interior()) boundary_node_[e.a] = boundary_node_[e.b] = 1;
    }
  }

  double signed_twice_area(const std::array<int, 3>& t) const {
    const Vector2 u = nodes_[t[1]] - nodes_[t[0]];
    const Vector2 v = nodes_[t[2]] - nodes_[t[0]];
    return u.x() * v.y() - u.y() * v.x();
  }

  std::vector<Vector2> nodes_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<double> areas_;
  std::vector<Vector2> barycenters_;
  std::vector<Eigen::Matrix<double, 3, 2>> shape_grads_;
  std::vector<char> boundary_node_;
};

/// nx * ny cells, each split by its (+1, +1) diagonal into two right
/// triangles. Node (i, j) has index j * (nx + 1) + i.
inline Triangulation structured_mesh(int nx, int ny, const Rectangle& domain = {}) {
  if (nx < 1 || ny < 1) throw InvalidInput("structured_mesh: nx and ny must be >= 1");
  if (!(domain.x1 > domain.x0 && domain.y1 > domain.y0)) throw InvalidInput("structured_mesh: empty domain");
  std::vector<Vector2> nodes;
  nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      nodes.emplace_back(domain.x0 + (domain.x1 - domain.x0) * i / nx, domain.y0 + (domain.y1 - domain.y0) * j / ny);
    }
  }
  std::vector<std::array<int, 3>> tris;
  tris.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int p00 = j * (nx + 1) + i;
      const int p10 = p00 + 1;
      const int p01 = p00 + nx + 1;
      const int p11 = p01 + 1;
      tris.push_back({p00, p10, p11});
      tris.push_back({p00, p11, p01});
    }
  }
  return Triangulation(std::move(nodes), std::move(tris));
}

// ---------------------------------------------------------------------------
// Fields
// ---------------------------------------------------------------------------

/// Continuous piecewise linear R^3-valued field (one column per node).
struct FieldP1 {
  Eigen::Matrix3Xd values;
};

/// Piecewise constant R^3-valued field (one column per element).
struct FieldP0 {
  Eigen::Matrix3Xd values;
};

/// Piecewise constant scalar field (temperature).
struct ScalarP0 {
  Eigen::VectorXd values;

  static ScalarP0 constant(std::size_t n, double v) { return {Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), v)}; }
};

/// Deformation y (P1) and director b (P0) of the film.
struct FilmState {
  FieldP1 y;
  FieldP0 b;
};

inline void check_state(const FilmState& s, const Triangulation& mesh) {
  if (static_cast<std::size_t>(s.y.values.cols()) != mesh.num_nodes())
    throw InvalidInput("deformation field size does not match the mesh");
  if (static_cast<std::size_t>(s.b.values.cols()) != mesh.num_elements())
    throw InvalidInput("director field size does not match the mesh");
}

/// Nodal interpolant of an arbitrary map R^2 -> R^3.
template <class Map>
FieldP1 interpolate(const Triangulation& mesh, Map&& fn) {
  FieldP1 f{Eigen::Matrix3Xd(3, static_cast<Eigen::Index>(mesh.num_nodes()))};
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) f.values.col(static_cast<Eigen::Index>(i)) = fn(mesh.node(i));
  return f;
}

inline Vector3 affine_map(const Matrix3& a, const Vector2& x) { return a.leftCols<2>() * x; }

/// Constant gradient of the P1 interpolant on element k.
inline Matrix32 gradient_p1(const Triangulation& mesh, const FieldP1& y, std::size_t k) {
  const auto& t = mesh.triangle(k);
  const auto& g = mesh.shape_gradients(k);
  Matrix32 out = Matrix32::Zero();
  for (int a = 0; a < 3; ++a) out += y.values.col(t[a]) * g.row(a);
  return out;
}

/// (grad y | b) on element k.
inline Matrix3 assemble_F(const Triangulation& mesh, const FieldP1& y, const FieldP0& b, std::size_t k) {
  Matrix3 f;
  f.leftCols<2>() = gradient_p1(mesh, y, k);
  f.col(2) = b.values.col(static_cast<Eigen::Index>(k));
  return f;
}

inline void require_interior(const Triangulation& mesh, std::size_t e) {
  if (e >= mesh.num_edges()) throw InvalidInput("edge index out of range");
  if (!mesh.edge(e).interior()) throw InvalidInput("edge_jump: edge " + std::to_string(e) + " lies on the boundary");
}

inline Vector3 edge_jump(const Triangulation& mesh, const FieldP0& field, std::size_t e) {
  require_interior(mesh, e);
  const Edge& ed = mesh.edge(e);
  return field.values.col(ed.k1) - field.values.col(ed.k2);
}

template <class T>
T edge_jump(const Triangulation& mesh, const std::vector<T>& per_element, std::size_t e) {
  require_interior(mesh, e);
  const Edge& ed = mesh.edge(e);
  return per_element[static_cast<std::size_t>(ed.k1)] - per_element[static_cast<std::size_t>(ed.k2)];
}

/// Sets boundary nodes to y0(x) = G (x1, x2, 0) and returns the mask of
/// constrained nodes.
inline std::vector<char> apply_dirichlet(const Triangulation& mesh, FieldP1& y, const Matrix3& boundary_gradient) {
  if (static_cast<std::size_t>(y.values.cols()) != mesh.num_nodes()) throw InvalidInput("apply_dirichlet: field size mismatch");
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    if (mesh.on_boundary(i)) y.values.col(static_cast<Eigen::Index>(i)) = affine_map(boundary_gradient, mesh.node(i));
  }
  return mesh.boundary_mask();
}

inline std::vector<char> apply_dirichlet(const Triangulation& mesh, FieldP1& y, const LaminateSpec& lam) {
  return apply_dirichlet(mesh, y, lam.mean_gradient());
}

/// Homogeneous state y = G (x, 0), b = G e3.
inline FilmState homogeneous_state(const Triangulation& mesh, const Matrix3& g) {
  FilmState s;
  s.y = interpolate(mesh, [&](const Vector2& x) { return affine_map(g, x); });
  s.b.values = g.col(2).replicate(1, static_cast<Eigen::Index>(mesh.num_elements()));
  return s;
}

}  // namespace marten
