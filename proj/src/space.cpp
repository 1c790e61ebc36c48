#include "stokes_mg/space.hpp"

#include <string>

namespace stokes {

FunctionSpace::FunctionSpace(std::shared_ptr<const Mesh> mesh, std::shared_ptr<const ReferenceElement> element,
                             int components)
    : mesh_(std::move(mesh)), element_(std::move(element)), components_(components) {
  if (mesh_->shape() != element_->shape()) throw Error("element shape does not match mesh cell shape");
  if (components_ != 1 && !(components_ == 2 && element_->nodal())) throw Error("only Lagrange spaces take components");
  const MeshTopology& topo = mesh_->topology;
  const ReferenceElement& el = *element_;

  for (int d = 0; d < 3; ++d) {
    const int per = static_cast<int>(el.entity_dofs(d, 0).size()) * components_;
    auto& off = entity_offset_[d];
    off.resize(topo.count(d) + 1);
    off[0] = size_;
    for (int i = 0; i < topo.count(d); ++i) off[i + 1] = off[i] + per;
    size_ = off.back();
  }
  owner_.resize(size_);
  boundary_.assign(size_, 0);
  for (int d = 0; d < 3; ++d)
    for (int i = 0; i < topo.count(d); ++i) {
      const bool b = d < 2 && topo.on_boundary({d, i});
      for (int g = entity_offset_[d][i]; g < entity_offset_[d][i + 1]; ++g) {
        owner_[g] = {d, i};
        boundary_[g] = b;
      }
    }

  const int nd = el.num_dofs();
  const int per_edge = static_cast<int>(el.entity_dofs(1, 0).size());
  cell_dofs_.resize(static_cast<std::size_t>(topo.num_cells()) * local_size());
  cell_signs_.assign(cell_dofs_.size(), 1.0);
  for (int c = 0; c < topo.num_cells(); ++c) {
    const auto lv = topo.cell_local_vertices(c);
    const auto le = topo.cell_local_edges(c);
    for (int i = 0; i < nd; ++i) {
      const DofAttachment& at = el.attachments()[i];
      int entity = c, pos = at.position;
      double sign = 1.0;
      if (at.dim == 0) {
        entity = lv[at.entity];
      } else if (at.dim == 1) {
        entity = le[at.entity];
        const auto [a, b] = reference::edge_vertices(el.shape(), at.entity);
        const bool reversed = lv[a] > lv[b];
        if (el.nodal()) {
          if (reversed) pos = per_edge - 1 - pos;
        } else {
          if (topo.edge_cells(entity)[0] != c) sign = -sign;
          if (reversed && pos % 2 == 1) sign = -sign;
        }
      }
      const int base = entity_offset_[at.dim][entity] + pos * components_;
      for (int comp = 0; comp < components_; ++comp) {
        const std::size_t slot = static_cast<std::size_t>(c) * local_size() + i * components_ + comp;
        cell_dofs_[slot] = base + comp;
        cell_signs_[slot] = sign;
      }
    }
  }
}

Tabulation cell_basis(const FunctionSpace& space, int cell, std::span<const Point> ref_points,
                      const Tabulation& ref_tab) {
  const CellMap map = CellMap::for_cell(space.mesh(), cell);
  Tabulation phys = push_forward(space.element(), map, ref_points, ref_tab);
  const auto signs = space.cell_signs(cell);
  if (space.components() == 2) {
    const int np = phys.num_points(), nd = phys.num_dofs();
    Tabulation v(np, 2 * nd, 2);
    for (int p = 0; p < np; ++p)
      for (int i = 0; i < nd; ++i)
        for (int c = 0; c < 2; ++c) {
          v.value(p, 2 * i + c, c) = phys.value(p, i, 0);
          v.grad(p, 2 * i + c, c, 0) = phys.grad(p, i, 0, 0);
          v.grad(p, 2 * i + c, c, 1) = phys.grad(p, i, 0, 1);
        }
    return v;
  }
  for (int i = 0; i < phys.num_dofs(); ++i) {
    if (signs[i] == 1.0) continue;
    for (int p = 0; p < phys.num_points(); ++p)
      for (int c = 0; c < phys.value_size(); ++c) {
        phys.value(p, i, c) = -phys.value(p, i, c);
        phys.grad(p, i, c, 0) = -phys.grad(p, i, c, 0);
        phys.grad(p, i, c, 1) = -phys.grad(p, i, c, 1);
      }
  }
  return phys;
}

Tabulation cell_basis(const FunctionSpace& space, int cell, std::span<const Point> ref_points) {
  return cell_basis(space, cell, ref_points, space.element().tabulate(ref_points));
}

std::vector<double> interpolate(const FunctionSpace& space, const std::function<Vec2(Point)>& f) {
  const ReferenceElement& el = space.element();
  const int nc = space.components();
  std::vector<double> out(space.size(), 0.0);
  std::vector<char> done(space.size(), 0);
  for (int c = 0; c < space.mesh().topology.num_cells(); ++c) {
    const CellMap map = CellMap::for_cell(space.mesh(), c);
    const auto dofs = space.cell_dofs(c);
    const auto signs = space.cell_signs(c);
    for (int i = 0; i < el.num_dofs(); ++i) {
      if (done[dofs[i * nc]]) continue;
      const Functional& fn = el.functionals()[i];
      Vec2 acc{0.0, 0.0};
      for (std::size_t q = 0; q < fn.points.size(); ++q) {
        const Vec2 v = f(map.map(fn.points[q]));
        if (el.nodal()) {
          acc += fn.weights[q].x * v;
        } else {
          const Mat2 J = map.jacobian(fn.points[q]);
          const Vec2 vhat = J.det() * (J.inverse() * v);
          acc.x += dot(fn.weights[q], vhat);
        }
      }
      for (int comp = 0; comp < nc; ++comp) {
        const int g = dofs[i * nc + comp];
        out[g] = signs[i * nc + comp] * (comp == 0 ? acc.x : acc.y);
        done[g] = 1;
      }
    }
  }
  return out;
}

std::string_view discretization_name(Discretization d) {
  switch (d) {
    case Discretization::th_tri: return "th-tri";
    case Discretization::th_quad: return "th-quad";
    case Discretization::bdm: return "bdm";
    case Discretization::rt: return "rt";
  }
  return "?";
}

Discretization parse_discretization(std::string_view name) {
  for (auto d : {Discretization::th_tri, Discretization::th_quad, Discretization::bdm, Discretization::rt})
    if (discretization_name(d) == name) return d;
  throw Error("unknown case '" + std::string(name) + "' (expected th-tri, th-quad, bdm or rt)");
}

CellShape discretization_shape(Discretization d) {
  return d == Discretization::th_quad ? CellShape::quadrilateral : CellShape::triangle;
}

bool is_hdiv(Discretization d) { return d == Discretization::bdm || d == Discretization::rt; }

MixedSpace build_mixed(Discretization d, std::shared_ptr<const Mesh> mesh, int k) {
  const CellShape shape = discretization_shape(d);
  if (mesh->shape() != shape)
    throw Error("case " + std::string(discretization_name(d)) + " needs a mesh of the other cell shape");
  if (k < (is_hdiv(d) ? 1 : 2))
    throw Error("order k=" + std::to_string(k) + " is too low for case " + std::string(discretization_name(d)));
  if (is_hdiv(d)) {
    const Family fam = d == Discretization::bdm ? Family::bdm : Family::rt;
    return {d, k, FunctionSpace(mesh, make_element(fam, shape, k)),
            FunctionSpace(mesh, make_element(Family::discontinuous_lagrange, shape, k - 1))};
  }
  return {d, k, FunctionSpace(mesh, make_element(Family::lagrange, shape, k), 2),
          FunctionSpace(mesh, make_element(Family::lagrange, shape, k - 1))};
}

StrongBc strong_bc(const FunctionSpace& space, const std::function<Vec2(Point)>& g) {
  const std::vector<double> all = interpolate(space, g);
  StrongBc bc;
  for (int i = 0; i < space.size(); ++i)
    if (space.on_boundary(i)) {
      bc.dofs.push_back(i);
      bc.values.push_back(all[i]);
    }
  return bc;
}

}  // namespace stokes
