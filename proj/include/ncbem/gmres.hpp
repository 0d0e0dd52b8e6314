// GMRES without restart for complex linear maps, with residual history and
// iteration accounting.
#pragma once

#include <utility>
#include <vector>

#include "ncbem/linop.hpp"
#include "ncbem/types.hpp"

namespace ncbem {

struct GmresOptions {
  double tol = 1e-5;  // relative residual termination criterion
  int max_iter = 0;   // 0 = min(10 x dofs, 20000)
  int restart = 0;    // 0 = no restart
};

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;  // relative, starting at 1
  double true_residual = 0.0;            // ||b - Ax|| / ||b|| recomputed after the solve
  double solve_seconds = 0.0;
  double matvec_seconds = 0.0;
  double seconds_per_iteration = 0.0;
};

// Modified Gram-Schmidt Arnoldi with Givens rotations. Happy breakdown is
// treated as convergence; hitting max_iter is reported, not thrown.
std::pair<VecXc, SolveReport> gmres(const LinOp& op, const VecXc& rhs, const GmresOptions& options = {});

}  // namespace ncbem
