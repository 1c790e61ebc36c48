#pragma once

// Global degree-of-freedom maps for Lagrange, discontinuous Lagrange and
// H(div) spaces on structured meshes.
//
// Global DoFs are numbered entity by entity: vertices, then edges, then cells,
// in entity order and by position within each entity. Vector Lagrange spaces
// interleave components (x then y) per scalar DoF. Edge DoFs use the global
// edge orientation, low vertex to high vertex, and the global edge normal.

#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "stokes_mg/element.hpp"
#include "stokes_mg/mesh.hpp"

namespace stokes {

class FunctionSpace {
 public:
  /// components is 2 for vector Lagrange spaces, 1 otherwise.
  FunctionSpace(std::shared_ptr<const Mesh> mesh, std::shared_ptr<const ReferenceElement> element,
                int components = 1);

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  const ReferenceElement& element() const { return *element_; }
  int components() const { return components_; }
  int value_size() const { return components_ == 2 ? 2 : element_->value_size(); }
  int size() const { return size_; }
  /// Local DoFs per cell; for vector Lagrange local DoF 2i+c is component c of scalar DoF i.
  int local_size() const { return element_->num_dofs() * components_; }

  std::span<const int> cell_dofs(int c) const {
    return {cell_dofs_.data() + static_cast<std::size_t>(c) * local_size(), static_cast<std::size_t>(local_size())};
  }
  /// +1 or -1 per local DoF: local basis function = sign * global basis function.
  std::span<const double> cell_signs(int c) const {
    return {cell_signs_.data() + static_cast<std::size_t>(c) * local_size(), static_cast<std::size_t>(local_size())};
  }
  /// Owned DoFs of an entity, a contiguous range [first, second).
  std::pair<int, int> entity_dofs(EntityRef e) const {
    return {entity_offset_[e.dim][e.index], entity_offset_[e.dim][e.index + 1]};
  }
  EntityRef owner(int dof) const { return owner_[dof]; }
  /// Owned by a vertex or edge lying on the boundary.
  bool on_boundary(int dof) const { return boundary_[dof] != 0; }

 private:
  std::shared_ptr<const Mesh> mesh_;
  std::shared_ptr<const ReferenceElement> element_;
  int components_ = 1;
  int size_ = 0;
  std::array<std::vector<int>, 3> entity_offset_;  // count + 1 entries per dimension
  std::vector<int> cell_dofs_;
  std::vector<double> cell_signs_;
  std::vector<EntityRef> owner_;
  std::vector<char> boundary_;
};

/// Physical basis of a cell at reference points, with global signs applied and
/// vector Lagrange spaces expanded to value size 2 (local DoF order of cell_dofs).
Tabulation cell_basis(const FunctionSpace& space, int cell, std::span<const Point> ref_points,
                      const Tabulation& ref_tab);
Tabulation cell_basis(const FunctionSpace& space, int cell, std::span<const Point> ref_points);

/// Applies the global dual functionals. Scalar spaces read f(x).x.
std::vector<double> interpolate(const FunctionSpace& space, const std::function<Vec2(Point)>& f);

enum class Discretization { th_tri, th_quad, bdm, rt };

std::string_view discretization_name(Discretization d);
/// Accepts th-tri, th-quad, bdm, rt. Throws Error otherwise.
Discretization parse_discretization(std::string_view name);
CellShape discretization_shape(Discretization d);
bool is_hdiv(Discretization d);

struct MixedSpace {
  Discretization discretization;
  int k = 0;
  FunctionSpace velocity;
  FunctionSpace pressure;

  int velocity_size() const { return velocity.size(); }
  int pressure_size() const { return pressure.size(); }
  int pressure_offset() const { return velocity.size(); }
  int size() const { return velocity.size() + pressure.size(); }
};

/// Taylor-Hood needs k >= 2, the H(div) pairs k >= 1. The mesh shape must match.
MixedSpace build_mixed(Discretization d, std::shared_ptr<const Mesh> mesh, int k);

struct StrongBc {
  std::vector<int> dofs;       // sorted velocity DoFs
  std::vector<double> values;  // matching boundary values
};

/// Lagrange spaces constrain every DoF on a boundary vertex or edge; H(div)
/// spaces constrain the normal-moment DoFs of boundary edges.
StrongBc strong_bc(const FunctionSpace& space, const std::function<Vec2(Point)>& g);

}  // namespace stokes
