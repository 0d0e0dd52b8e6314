#include "ncbem/space.hpp"

#include <stdexcept>
#include <unordered_set>

#include "ncbem/quadrature.hpp"

namespace ncbem {

P1Space::P1Space(const Mesh& mesh) : P1Space(mesh, false) {}

P1Space::P1Space(const Mesh& mesh, bool constrained) : mesh_(&mesh), constrained_(constrained) {
  const int nv = mesh.vertex_count();
  if (nv == 0) throw std::invalid_argument("P1Space: empty mesh");
  vertex_to_dof_.assign(nv, -1);
  std::vector<bool> masked(nv, false);
  if (constrained) {
    for (const auto& e : mesh.boundary_edges) {
      masked[e[0]] = true;
      masked[e[1]] = true;
    }
  }
  for (int v = 0; v < nv; ++v) {
    if (!masked[v]) {
      vertex_to_dof_[v] = static_cast<int>(dof_to_vertex_.size());
      dof_to_vertex_.push_back(v);
    }
  }
  if (dof_to_vertex_.empty()) throw std::invalid_argument("P1Space: no unconstrained dofs");
}

P1Space P1Space::constrained_to_interior(const Mesh& mesh) { return P1Space(mesh, true); }

VecXc P1Space::expand_to_vertices(const VecXc& dofs) const {
  VecXc out = VecXc::Zero(mesh_->vertex_count());
  for (int d = 0; d < dof_count(); ++d) out[dof_to_vertex_[d]] = dofs[d];
  return out;
}

SparseMatrix assemble_mass(const P1Space& space) {
  const Mesh& mesh = space.mesh();
  std::vector<Triplet> triplets;
  triplets.reserve(9 * mesh.triangle_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double a = mesh.triangle_area(t);
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      const int di = space.dof_of_vertex(tri[i]);
      if (di < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int dj = space.dof_of_vertex(tri[j]);
        if (dj < 0) continue;
        triplets.emplace_back(di, dj, (a / 12.0) * (i == j ? 2.0 : 1.0));
      }
    }
  }
  SparseMatrix mass(space.dof_count(), space.dof_count());
  mass.setFromTriplets(triplets.begin(), triplets.end());
  mass.makeCompressed();
  return mass;
}

MassInverse::MassInverse(const SparseMatrix& mass) : size_(mass.rows()) {
  if (mass.rows() != mass.cols() || mass.rows() == 0) {
    throw std::invalid_argument("MassInverse: matrix must be square and nonempty");
  }
  solver_.compute(mass);
  if (solver_.info() != Eigen::Success) throw std::runtime_error("MassInverse: factorisation failed");
}

VecX MassInverse::apply_real(const VecX& v) const { return solver_.solve(v); }

VecXc MassInverse::apply(const VecXc& v) const {
  const VecX re = solver_.solve(v.real().eval());
  const VecX im = solver_.solve(v.imag().eval());
  return re + imag_unit * im;
}

VecXc rhs_from_function(const P1Space& space, const std::function<Complex(const Vec3&)>& sampler) {
  const Mesh& mesh = space.mesh();
  // regular rule composited once: keeps the functional error well below the
  // Galerkin operator error at six elements per wavelength
  static const TriangleRule rule = composite_rule(triangle_rule(4), 1);
  VecXc rhs = VecXc::Zero(space.dof_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Vec3 a = mesh.corner(t, 0), b = mesh.corner(t, 1), c = mesh.corner(t, 2);
    const double jac = 2.0 * mesh.triangle_area(t);
    const auto& tri = mesh.triangles[t];
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Vec3& bary = rule.points[q];
      const Vec3 x = bary[0] * a + bary[1] * b + bary[2] * c;
      const Complex val = sampler(x) * (rule.weights[q] * jac);
      for (int i = 0; i < 3; ++i) {
        const int di = space.dof_of_vertex(tri[i]);
        if (di >= 0) rhs[di] += val * bary[i];
      }
    }
  }
  return rhs;
}

}  // namespace ncbem
