// Neumann screen problem: hypersingular operator on the boundary-constrained
// P1 space, solved with mass or opposite-order single-layer preconditioning,
// the latter optionally assembled on a coarser nonconforming mesh.
#pragma once

#include <optional>

#include "ncbem/formulations.hpp"
#include "ncbem/gmres.hpp"

namespace ncbem {

enum class ScreenPreconditioner { mass, oo_conforming, oo_nonconforming };

struct ScreenProblem {
  const Mesh* fine_mesh = nullptr;
  const Mesh* coarse_mesh = nullptr;  // required for oo_nonconforming
  MediumParams medium;
  double frequency = 1.0;
  IncidentField incident = IncidentField::plane_wave(Vec3::UnitX());
  ScreenPreconditioner preconditioner = ScreenPreconditioner::mass;
  // the coarse single-layer may use its own wavenumber; default is the
  // model wavenumber
  std::optional<Complex> coarse_k;
  GmresOptions gmres;
  AssemblyOptions assembly;
};

struct ScreenSolution {
  VecXc density;          // per fine-mesh vertex; exactly zero on the boundary
  SolveReport report;
  double t_matrix = 0.0;  // dense + mortar assembly seconds
  Eigen::Index n_fine = 0;
  Eigen::Index n_coarse = 0;
};

// Solves HS_ext phi = weak Neumann trace of the incident field, with the
// scattered field available as u_sca = DLP_ext phi.
ScreenSolution solve_screen(const ScreenProblem& problem);

// Total field (incident + double-layer potential of the density) at points.
VecXc screen_total_field(const ScreenProblem& problem, const ScreenSolution& solution,
                         const std::vector<Vec3>& points);

}  // namespace ncbem
