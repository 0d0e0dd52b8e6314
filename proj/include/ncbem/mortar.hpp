// Nonconforming grid coupling: triangle clipping in patch coordinates, the
// advancing-front sweep over intersecting triangle pairs, sparse mortar
// matrix assembly, and projection-error diagnostics.
#pragma once

#include <string>

#include "ncbem/mesh.hpp"
#include "ncbem/types.hpp"

namespace ncbem {

// Convex intersection polygon of two coplanar triangles, in 2D patch
// coordinates (at most 6 corners up to clipping tolerance).
struct ClipPolygon {
  std::vector<Vec2> points;
  double area() const;
  bool empty() const { return points.size() < 3; }
};

// Successive half-plane clipping of triangle B against triangle A. Points
// within eps_clip of an edge count as inside.
ClipPolygon clip_triangles(const std::array<Vec2, 3>& tri_a, const std::array<Vec2, 3>& tri_b,
                           double eps_clip);

// Local mortar cell: entries integral over (Ta intersect Tb) of
// hat_a^i hat_b^j, by fan triangulation of the clip polygon and a
// degree-2 rule (the integrand is quadratic, so this is exact).
Eigen::Matrix3d mortar_cell(const std::array<Vec2, 3>& tri_a, const std::array<Vec2, 3>& tri_b,
                            double eps_clip);

struct MortarOptions {
  double angle_tol = 1e-8;       // patch grouping
  double plane_tol_scale = 1e-8; // point-to-plane matching, x patch diameter
  double clip_tol_scale = 1e-10; // eps_clip, x patch diameter
  double stall_tol = 1e-6;       // relative uncovered-area threshold
};

struct MortarMatrix {
  SparseMatrix matrix;          // N_row x N_col, vertex-indexed
  double max_row_tiling_defect = 0.0;  // worst |sum_b area(Ta^Tb) - area(Ta)|
  double max_col_tiling_defect = 0.0;
};

// Cross-mesh Gram matrix P(i,j) = integral of hat_i^row hat_j^col over the
// common surface. Both meshes must cover the same polyhedral surface; plane
// groups are matched by point+normal and swept independently with the
// advancing front. Throws if plane groups cannot be matched or the front
// leaves triangles uncovered.
MortarMatrix assemble_mortar(const Mesh& row_mesh, const Mesh& col_mesh,
                             const MortarOptions& options = {});

struct ProjectionError {
  double e_int_fro = 0.0;
  double e_int_max = 0.0;
  double e_ext_fro = 0.0;
  double e_ext_max = 0.0;
};

// Defect norms of the mortar round trips,
//   E_int = || I - M_int^-1 P M_ext^-1 P^T ||,
//   E_ext = || I - M_ext^-1 P^T M_int^-1 P ||,
// in the Frobenius and maximum norms. P maps column-mesh (exterior)
// coefficients to row-mesh (interior) functionals.
ProjectionError projection_error(const SparseMatrix& mass_int, const SparseMatrix& mass_ext,
                                 const SparseMatrix& mortar_int_ext);

// Debug dump, one "row col value" line per stored entry.
void dump_triplets(const SparseMatrix& matrix, const std::string& path);

}  // namespace ncbem
