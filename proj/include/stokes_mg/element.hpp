#pragma once

// Reference finite elements on the unit triangle (0,0), (1,0), (0,1) and the
// unit square, and the maps that carry them onto physical cells.
//
// Local numbering: triangle edge i is opposite vertex i, i.e. (v1,v2), (v0,v2),
// (v0,v1). Quadrilateral vertices are in tensor order (0,0), (1,0), (0,1),
// (1,1) with edges (v0,v2), (v1,v3), (v0,v1), (v2,v3). Every local edge is
// parameterized from its lower local vertex to its higher one.

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "stokes_mg/common.hpp"
#include "stokes_mg/dense.hpp"
#include "stokes_mg/mesh.hpp"

namespace stokes {

enum class Family { lagrange, discontinuous_lagrange, bdm, rt };

std::string_view family_name(Family f);

/// Which mesh entity (in local numbering) a degree of freedom belongs to.
struct DofAttachment {
  int dim = 0;
  int entity = 0;
  int position = 0;  // index within that entity, in the entity's local orientation
};

/// l(v) = sum_q weights[q] . v(points[q]); scalar elements read weights[q].x.
struct Functional {
  std::vector<Point> points;
  std::vector<Vec2> weights;
};

/// Basis values and gradients at a set of points.
/// grad(p, i, c, d) is the derivative of component c with respect to x_d.
class Tabulation {
 public:
  Tabulation() = default;
  Tabulation(int num_points, int num_dofs, int value_size)
      : np_(num_points), nd_(num_dofs), vs_(value_size),
        values_(static_cast<std::size_t>(num_points) * num_dofs * value_size, 0.0),
        grads_(values_.size() * 2, 0.0) {}

  int num_points() const { return np_; }
  int num_dofs() const { return nd_; }
  int value_size() const { return vs_; }

  double& value(int p, int i, int c) { return values_[vidx(p, i, c)]; }
  double value(int p, int i, int c) const { return values_[vidx(p, i, c)]; }
  double& grad(int p, int i, int c, int d) { return grads_[vidx(p, i, c) * 2 + d]; }
  double grad(int p, int i, int c, int d) const { return grads_[vidx(p, i, c) * 2 + d]; }

 private:
  std::size_t vidx(int p, int i, int c) const {
    return (static_cast<std::size_t>(p) * nd_ + i) * vs_ + c;
  }
  int np_ = 0, nd_ = 0, vs_ = 1;
  std::vector<double> values_, grads_;
};

namespace reference {
std::span<const Point> vertices(CellShape shape);
std::array<int, 2> edge_vertices(CellShape shape, int local_edge);
/// Outward unit normal of a reference edge.
Vec2 edge_normal(CellShape shape, int local_edge);
double edge_length(CellShape shape, int local_edge);
double measure(CellShape shape);
}  // namespace reference

class ReferenceElement {
 public:
  Family family() const { return family_; }
  CellShape shape() const { return shape_; }
  int order() const { return order_; }
  int value_size() const { return value_size_; }
  int num_dofs() const { return static_cast<int>(attachments_.size()); }
  bool nodal() const { return family_ == Family::lagrange || family_ == Family::discontinuous_lagrange; }

  const std::vector<DofAttachment>& attachments() const { return attachments_; }
  /// Local DoFs attached to a local entity, ordered by position.
  std::span<const int> entity_dofs(int dim, int entity) const { return entity_dofs_[dim][entity]; }
  const std::vector<Functional>& functionals() const { return functionals_; }
  /// Evaluation point of a nodal DoF.
  Point node(int i) const { return functionals_[i].points.front(); }

  Tabulation tabulate(std::span<const Point> points) const;
  /// Applies every dual functional to a function given on the reference cell.
  std::vector<double> apply_functionals(const std::function<Vec2(Point)>& f) const;

 private:
  friend class ElementBuilder;

  void eval_prime(Point p, std::vector<double>& vals, std::vector<double>& grads) const;

  Family family_ = Family::lagrange;
  CellShape shape_ = CellShape::triangle;
  int order_ = 1;
  int value_size_ = 1;
  std::vector<DofAttachment> attachments_;
  std::array<std::vector<std::vector<int>>, 3> entity_dofs_;
  std::vector<Functional> functionals_;

  // expansion ("prime") basis: orthonormal Dubiner polynomials on triangles,
  // Legendre products on squares, optionally extended
  // componentwise to vectors plus the x * homogeneous terms of Raviart-Thomas
  std::vector<std::array<int, 2>> prime_degrees_;
  int rt_extra_degree_ = -1;
  int num_prime_ = 0;
  DenseMatrix coeffs_;  // num_prime x num_dofs
};

/// Supported: lagrange on either shape with 1 <= k <= 8; discontinuous_lagrange
/// on triangles with 0 <= k <= 8; bdm and rt on triangles with 1 <= k <= 4.
/// Elements are cached and shared.
std::shared_ptr<const ReferenceElement> make_element(Family family, CellShape shape, int k);

/// Affine (triangle) or bilinear (quadrilateral) reference-to-physical map.
class CellMap {
 public:
  CellMap() = default;
  CellMap(CellShape shape, std::span<const Point> vertices);
  static CellMap for_cell(const Mesh& mesh, int cell);

  CellShape shape() const { return shape_; }
  Point map(Point ref) const;
  /// J(i, j) = d x_i / d xhat_j
  Mat2 jacobian(Point ref) const;
  Point inverse(Point phys) const;

 private:
  CellShape shape_ = CellShape::triangle;
  std::array<Point, 4> v_{};
};

/// Maps a reference tabulation to the physical cell: gradients of Lagrange
/// functions by the inverse-transpose Jacobian, BDM/RT functions by the
/// contravariant Piola map v = J vhat / det J. Throws on det J <= 0.
Tabulation push_forward(const ReferenceElement& element, const CellMap& map,
                        std::span<const Point> ref_points, const Tabulation& ref);

}  // namespace stokes
