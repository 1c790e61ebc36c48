#pragma once

// Structured triangular and quadrilateral meshes of the unit square.
//
// Numbering is lexicographic by (row, column) for vertices and cells. Edges
// are numbered horizontal first, then vertical, then diagonal. On triangle
// meshes each square (i, j) holds the lower-left cell 2(jn+i) and the
// upper-right cell 2(jn+i)+1; the shared diagonal runs from the top-left to the
// bottom-right corner of the square.

#include <array>
#include <compare>
#include <span>
#include <utility>
#include <vector>

#include "stokes_mg/common.hpp"

namespace stokes {

enum class CellShape { triangle, quadrilateral };

struct EntityRef {
  int dim = 0;  // 0 vertex, 1 edge, 2 cell
  int index = 0;

  friend auto operator<=>(const EntityRef&, const EntityRef&) = default;
};

class MeshTopology {
 public:
  CellShape shape() const { return shape_; }
  int vertices_per_cell() const { return shape_ == CellShape::triangle ? 3 : 4; }
  int edges_per_cell() const { return vertices_per_cell(); }

  int count(int dim) const { return counts_[dim]; }
  int num_vertices() const { return counts_[0]; }
  int num_edges() const { return counts_[1]; }
  int num_cells() const { return counts_[2]; }

  /// Sorted vertex indices of a cell.
  std::span<const int> cell_vertices(int c) const { return row(cell_vertices_, c, vertices_per_cell()); }
  /// Sorted edge indices of a cell.
  std::span<const int> cell_edges(int c) const { return row(cell_edges_, c, edges_per_cell()); }
  /// Vertices in reference-element order (counter-clockwise for triangles,
  /// tensor order for quadrilaterals).
  std::span<const int> cell_local_vertices(int c) const {
    return row(cell_local_vertices_, c, vertices_per_cell());
  }
  /// Edges in reference-element local edge order.
  std::span<const int> cell_local_edges(int c) const { return row(cell_local_edges_, c, edges_per_cell()); }

  /// (low, high) vertex pair of an edge.
  std::array<int, 2> edge_vertices(int e) const { return edge_vertices_[e]; }
  /// One or two adjacent cells, ascending.
  std::span<const int> edge_cells(int e) const {
    return {edge_cells_.data() + edge_cells_ptr_[e], edge_cells_.data() + edge_cells_ptr_[e + 1]};
  }
  std::span<const int> vertex_edges(int v) const {
    return {vertex_edges_.data() + vertex_edges_ptr_[v], vertex_edges_.data() + vertex_edges_ptr_[v + 1]};
  }
  std::span<const int> vertex_cells(int v) const {
    return {vertex_cells_.data() + vertex_cells_ptr_[v], vertex_cells_.data() + vertex_cells_ptr_[v + 1]};
  }

  bool on_boundary(EntityRef e) const;
  bool valid(EntityRef e) const { return e.dim >= 0 && e.dim <= 2 && e.index >= 0 && e.index < counts_[e.dim]; }

  /// The entity together with every higher-dimensional entity incident on it, sorted.
  std::vector<EntityRef> star(EntityRef e) const;
  /// The set together with every lower-dimensional entity incident on a member, sorted.
  std::vector<EntityRef> closure(std::span<const EntityRef> s) const;

 private:
  friend class MeshBuilder;

  static std::span<const int> row(const std::vector<int>& v, int i, int w) {
    return {v.data() + static_cast<std::size_t>(i) * w, static_cast<std::size_t>(w)};
  }

  CellShape shape_ = CellShape::triangle;
  std::array<int, 3> counts_{};
  std::vector<int> cell_vertices_, cell_edges_, cell_local_vertices_, cell_local_edges_;
  std::vector<std::array<int, 2>> edge_vertices_;
  std::vector<int> edge_cells_ptr_, edge_cells_;
  std::vector<int> vertex_edges_ptr_, vertex_edges_;
  std::vector<int> vertex_cells_ptr_, vertex_cells_;
  std::vector<char> vertex_boundary_, edge_boundary_, cell_boundary_;
};

class MeshGeometry {
 public:
  Point vertex(int v) const { return vertices_[v]; }
  double edge_length(int e) const { return edge_length_[e]; }
  /// Unit normal pointing from the lower-indexed adjacent cell into the other
  /// one; outward on boundary edges.
  Vec2 edge_normal(int e) const { return edge_normal_[e]; }
  /// Unit tangent from the low vertex to the high vertex.
  Vec2 edge_tangent(int e) const { return edge_tangent_[e]; }
  Point edge_midpoint(int e) const { return edge_midpoint_[e]; }
  Point cell_centroid(int c) const { return cell_centroid_[c]; }

 private:
  friend class MeshBuilder;
  std::vector<Point> vertices_;
  std::vector<double> edge_length_;
  std::vector<Vec2> edge_normal_, edge_tangent_;
  std::vector<Point> edge_midpoint_, cell_centroid_;
};

struct Mesh {
  int cells_per_side = 0;
  MeshTopology topology;
  MeshGeometry geometry;

  CellShape shape() const { return topology.shape(); }
  double h() const { return 1.0 / cells_per_side; }
};

struct RefinementLink {
  std::vector<std::array<int, 4>> children;          // parent cell -> fine cells
  std::vector<int> parent;                           // fine cell -> parent cell
  std::vector<int> vertex_map;                       // parent vertex -> fine vertex
  std::vector<std::array<int, 2>> edge_children;     // parent edge -> fine halves, low end first
};

Mesh build_structured_tri(int n);
Mesh build_structured_quad(int n);
Mesh build_structured(CellShape shape, int n);

/// Uniform refinement. The fine mesh is numbered exactly like
/// build_structured(shape, 2n); the link records the nesting.
std::pair<Mesh, RefinementLink> refine_uniform(const Mesh& mesh);

}  // namespace stokes
