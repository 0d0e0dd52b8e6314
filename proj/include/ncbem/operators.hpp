// Helmholtz Green's function, dense Galerkin assembly of the four boundary
// integral operators, and potential evaluation at off-surface points.
#pragma once

#include <map>
#include <vector>

#include "ncbem/space.hpp"
#include "ncbem/types.hpp"

namespace ncbem {

struct MediumParams {
  double c = 1.0;        // speed of sound
  double rho = 1.0;      // mass density
  double alpha = 0.0;    // attenuation, Neper/length
  double f_alpha = 1.0;  // reference frequency of the attenuation power law
};

// Complex wavenumber k = 2 pi f / c + i alpha f / f_alpha.
struct Wavenumber {
  Complex k;
  explicit Wavenumber(Complex value);
  static Wavenumber from_frequency(double f, const MediumParams& medium);
};

// e^{ik|x-y|} / (4 pi |x-y|); throws for coincident points.
Complex green(Complex k, const Vec3& x, const Vec3& y);

enum class OperatorKind { single_layer, double_layer, adjoint_double_layer, hypersingular };

struct DenseOperator {
  OperatorKind kind;
  Complex k;
  MatXc matrix;  // rows = test dofs, cols = trial dofs
};

struct AssemblyOptions {
  int regular_order = 4;   // triangle rule degree for separated pairs
  int singular_order = 4;  // Gauss order per direction in the singular rules
};

// Galerkin matrices of the requested operators at wavenumber k, sharing one
// sweep over triangle pairs. Test and trial spaces must live on the same
// mesh; cross-mesh coupling is done exclusively through mortar matrices.
// Singular pairs are classified by shared global vertex indices. The
// hypersingular operator uses the surface-curl regularised bilinear form
//   <W phi, theta> = int int G [curl_G theta . curl_G phi
//                               - k^2 (n_x . n_y) theta phi].
std::map<OperatorKind, DenseOperator> assemble_operators(const std::vector<OperatorKind>& kinds,
                                                         const P1Space& test_space,
                                                         const P1Space& trial_space, Complex k,
                                                         const AssemblyOptions& options = {});

DenseOperator assemble_operator(OperatorKind kind, const P1Space& test_space,
                                const P1Space& trial_space, Complex k,
                                const AssemblyOptions& options = {});

enum class PotentialKind { single_layer, double_layer };

struct PotentialResult {
  VecXc values;
  std::vector<std::uint8_t> near_surface;  // 1 = point within 1e-10 x bbox diagonal
};

// Pointwise potential of a P1 density at off-surface points with the regular
// rule. Points too close to the surface are flagged, not rejected.
PotentialResult evaluate_potential(PotentialKind kind, const P1Space& space, const VecXc& coeffs,
                                   Complex k, const std::vector<Vec3>& points,
                                   const AssemblyOptions& options = {});

// Exact distance from a point to the surface (minimum over triangles).
double distance_to_surface(const Mesh& mesh, const Vec3& point);
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace ncbem
