// Continuous piecewise-linear nodal spaces with sparse mass matrices.
#pragma once

#include <functional>
#include <memory>

#include <Eigen/SparseCholesky>

#include "ncbem/mesh.hpp"
#include "ncbem/types.hpp"

namespace ncbem {

// Nodal P1 space on a mesh. The mesh must outlive the space. For screens,
// constrained_to_interior removes the boundary-edge vertices from the dof
// set (conforming discretisation of the energy space on open surfaces).
class P1Space {
 public:
  explicit P1Space(const Mesh& mesh);
  static P1Space constrained_to_interior(const Mesh& mesh);

  const Mesh& mesh() const { return *mesh_; }
  int dof_count() const { return static_cast<int>(dof_to_vertex_.size()); }
  bool constrained() const { return constrained_; }

  int dof_of_vertex(int v) const { return vertex_to_dof_[v]; }  // -1 when constrained away
  int vertex_of_dof(int d) const { return dof_to_vertex_[d]; }

  // Expands dof coefficients to a per-vertex vector (zeros on constrained).
  VecXc expand_to_vertices(const VecXc& dofs) const;

 private:
  P1Space(const Mesh& mesh, bool constrained);
  const Mesh* mesh_;
  bool constrained_;
  std::vector<int> vertex_to_dof_;
  std::vector<int> dof_to_vertex_;
};

// Galerkin mass matrix: entry (i,j) = integral of hat_i * hat_j. Symmetric
// positive definite.
SparseMatrix assemble_mass(const P1Space& space);

// Shared factorisation of an SPD mass matrix; applies M^{-1} to complex
// vectors through the real Cholesky factors.
class MassInverse {
 public:
  explicit MassInverse(const SparseMatrix& mass);
  VecXc apply(const VecXc& v) const;
  VecX apply_real(const VecX& v) const;
  Eigen::Index size() const { return size_; }

 private:
  Eigen::SimplicialLDLT<SparseMatrix> solver_;
  Eigen::Index size_;
};

// Weak-form functional of a scalar field against all test hats, assembled
// with the regular fourth-order triangle rule.
VecXc rhs_from_function(const P1Space& space, const std::function<Complex(const Vec3&)>& sampler);

}  // namespace ncbem
