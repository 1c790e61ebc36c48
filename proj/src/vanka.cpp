#include "stokes_mg/vanka.hpp"

#include <algorithm>
#include <string>

namespace stokes {

namespace {

const char* dim_name(int d) { return d == 0 ? "vertex" : d == 1 ? "edge" : "cell"; }

Patch make_patch(const MixedSpace& ms, EntityRef entity, std::span<const EntityRef> velocity_entities,
                 std::span<const EntityRef> pressure_entities, std::span<const char> constrained) {
  Patch p;
  p.entity = entity;
  for (const EntityRef& e : velocity_entities) {
    const auto [b, end] = ms.velocity.entity_dofs(e);
    for (int g = b; g < end; ++g)
      if (!constrained[g]) p.dofs.push_back(g);
  }
  std::sort(p.dofs.begin(), p.dofs.end());
  p.num_velocity = static_cast<int>(p.dofs.size());
  const std::size_t first_pressure = p.dofs.size();
  for (const EntityRef& e : pressure_entities) {
    const auto [b, end] = ms.pressure.entity_dofs(e);
    for (int g = b; g < end; ++g)
      if (!constrained[ms.pressure_offset() + g]) p.dofs.push_back(ms.pressure_offset() + g);
  }
  std::sort(p.dofs.begin() + first_pressure, p.dofs.end());
  return p;
}

}  // namespace

PatchSet::PatchSet(std::vector<Patch> patches, int system_size, int pressure_offset,
                   std::span<const char> constrained, Weighting weighting)
    : multiplicity_(system_size, 0) {
  for (auto& p : patches)
    if (!p.dofs.empty()) patches_.push_back(std::move(p));
  for (const Patch& p : patches_)
    for (int g : p.dofs) ++multiplicity_[g];
  for (Patch& p : patches_) {
    p.weights.resize(p.dofs.size());
    for (std::size_t i = 0; i < p.dofs.size(); ++i) {
      const bool velocity = p.dofs[i] < pressure_offset;
      p.weights[i] =
          velocity && weighting == Weighting::inverse_multiplicity ? 1.0 / multiplicity_[p.dofs[i]] : 1.0;
    }
  }
  for (int i = 0; i < system_size; ++i)
    if (constrained[i]) constrained_.push_back(i);
}

void PatchSet::factor(const SparseMatrix& a) {
  for (Patch& p : patches_) {
    try {
      p.lu = LuFactorization::factor(extract_submatrix(a, p.dofs, p.dofs));
    } catch (const SingularMatrixError& e) {
      throw SingularMatrixError("singular patch on " + std::string(dim_name(p.entity.dim)) + " " +
                                    std::to_string(p.entity.index) + ": " + e.what(),
                                e.step());
    }
  }
}

void PatchSet::apply_additive(std::span<const double> r, std::span<double> z) const {
  std::fill(z.begin(), z.end(), 0.0);
  std::vector<double> local, sol;
  for (const Patch& p : patches_) {
    const std::size_t n = p.dofs.size();
    local.resize(n);
    sol.resize(n);
    for (std::size_t i = 0; i < n; ++i) local[i] = r[p.dofs[i]];
    p.lu.solve(local, sol);
    for (std::size_t i = 0; i < n; ++i) z[p.dofs[i]] += p.weights[i] * sol[i];
  }
  for (int c : constrained_) z[c] = r[c];
}

PatchSet build_patches_taylor_hood(const MixedSpace& ms, std::span<const char> constrained, Weighting weighting) {
  if (is_hdiv(ms.discretization)) throw Error("topological Vanka patches need a Taylor-Hood space");
  const MeshTopology& topo = ms.velocity.mesh().topology;
  std::vector<Patch> patches;
  for (int d = 0; d < 3; ++d)
    for (int i = 0; i < topo.count(d); ++i) {
      const EntityRef e{d, i};
      const auto [b, end] = ms.pressure.entity_dofs(e);
      if (b == end) continue;
      const auto star = topo.star(e);
      const auto closure = topo.closure(star);
      const EntityRef pe[] = {e};
      patches.push_back(make_patch(ms, e, closure, pe, constrained));
    }
  return PatchSet(std::move(patches), ms.size(), ms.pressure_offset(), constrained, weighting);
}

PatchSet build_patches_hdiv_extended(const MixedSpace& ms, std::span<const char> constrained, Weighting weighting) {
  if (!is_hdiv(ms.discretization)) throw Error("extended cell patches need a BDM or RT space");
  const MeshTopology& topo = ms.velocity.mesh().topology;
  std::vector<Patch> patches;
  for (int c = 0; c < topo.num_cells(); ++c) {
    std::vector<EntityRef> cells{{2, c}};
    for (int e : topo.cell_edges(c))
      for (int nb : topo.edge_cells(e))
        if (nb != c) cells.push_back({2, nb});
    std::sort(cells.begin(), cells.end());
    const auto closure = topo.closure(cells);
    const EntityRef pe[] = {{2, c}};
    patches.push_back(make_patch(ms, {2, c}, closure, pe, constrained));
  }
  return PatchSet(std::move(patches), ms.size(), ms.pressure_offset(), constrained, weighting);
}

PatchSet build_patches(const MixedSpace& space, std::span<const char> constrained, Weighting weighting) {
  return is_hdiv(space.discretization) ? build_patches_hdiv_extended(space, constrained, weighting)
                                       : build_patches_taylor_hood(space, constrained, weighting);
}

}  // namespace stokes
