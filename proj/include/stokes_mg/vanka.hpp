#pragma once

// Vanka patches and their additive (parallel subspace correction) application.
//
// Taylor-Hood uses composite topological patches: one per mesh entity that
// carries pressure DoFs, with the velocity DoFs on the closure of the entity's
// star. H(div) pairs use extended cell patches: the cell's pressures plus the
// velocity DoFs on the closure of the cell and of its edge neighbours.
// Constrained velocity DoFs never enter a patch.

#include <span>
#include <vector>

#include "stokes_mg/dense.hpp"
#include "stokes_mg/space.hpp"
#include "stokes_mg/sparse.hpp"

namespace stokes {

enum class Weighting { inverse_multiplicity, unit };

struct Patch {
  EntityRef entity;
  std::vector<int> dofs;  // velocity indices then pressure indices, each sorted
  int num_velocity = 0;
  std::vector<double> weights;
  LuFactorization lu;
};

class PatchSet {
 public:
  PatchSet() = default;
  /// Takes patches with unfactored LU and sets the weights from the multiplicities.
  PatchSet(std::vector<Patch> patches, int system_size, int pressure_offset, std::span<const char> constrained,
           Weighting weighting);

  int size() const { return static_cast<int>(patches_.size()); }
  const std::vector<Patch>& patches() const { return patches_; }
  /// Number of patches containing each DoF of the monolithic system.
  const std::vector<int>& multiplicity() const { return multiplicity_; }

  /// Factors every patch block of `a`; a singular block raises SingularMatrixError naming the entity.
  void factor(const SparseMatrix& a);
  /// z = sum_i R_i^T W_i A_i^{-1} R_i r; constrained entries are copied from r.
  void apply_additive(std::span<const double> r, std::span<double> z) const;

 private:
  std::vector<Patch> patches_;
  std::vector<int> multiplicity_;
  std::vector<int> constrained_;
};

PatchSet build_patches_taylor_hood(const MixedSpace& space, std::span<const char> constrained,
                                   Weighting weighting = Weighting::inverse_multiplicity);
PatchSet build_patches_hdiv_extended(const MixedSpace& space, std::span<const char> constrained,
                                     Weighting weighting = Weighting::inverse_multiplicity);
/// Chooses the patch family from the discretization.
PatchSet build_patches(const MixedSpace& space, std::span<const char> constrained,
                       Weighting weighting = Weighting::inverse_multiplicity);

}  // namespace stokes
