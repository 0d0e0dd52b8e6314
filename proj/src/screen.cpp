#include "ncbem/screen.hpp"

#include <chrono>
#include <stdexcept>

#include "ncbem/mortar.hpp"

namespace ncbem {

namespace {

using Clock = std::chrono::steady_clock;

// restriction of a vertex-level sparse matrix to the free dofs of two spaces
SparseMatrix restrict_to_spaces(const SparseMatrix& vertex_matrix, const P1Space& row_space,
                                const P1Space& col_space) {
  std::vector<Triplet> triplets;
  for (int col = 0; col < vertex_matrix.outerSize(); ++col) {
    const int cd = col_space.dof_of_vertex(col);
    if (cd < 0) continue;
    for (SparseMatrix::InnerIterator it(vertex_matrix, col); it; ++it) {
      const int rd = row_space.dof_of_vertex(static_cast<int>(it.row()));
      if (rd < 0) continue;
      triplets.emplace_back(rd, cd, it.value());
    }
  }
  SparseMatrix out(row_space.dof_count(), col_space.dof_count());
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.makeCompressed();
  return out;
}

}  // namespace

ScreenSolution solve_screen(const ScreenProblem& problem) {
  if (!problem.fine_mesh) throw std::invalid_argument("solve_screen: missing fine mesh");
  if (problem.fine_mesh->closed()) throw std::invalid_argument("solve_screen: screen must be open");
  const Complex k = Wavenumber::from_frequency(problem.frequency, problem.medium).k;

  const P1Space fine = P1Space::constrained_to_interior(*problem.fine_mesh);
  ScreenSolution solution;
  solution.n_fine = fine.dof_count();

  const auto t0 = Clock::now();
  auto hs = std::make_shared<MatXc>(
      assemble_operator(OperatorKind::hypersingular, fine, fine, k, problem.assembly).matrix);
  auto mass_fine = std::make_shared<SparseMatrix>(assemble_mass(fine));
  auto minv_fine = std::make_shared<MassInverse>(*mass_fine);

  LinOp::Ptr preconditioner;
  switch (problem.preconditioner) {
    case ScreenPreconditioner::mass:
      preconditioner = mass_inverse_op(minv_fine);
      break;
    case ScreenPreconditioner::oo_conforming: {
      auto sl = std::make_shared<MatXc>(
          assemble_operator(OperatorKind::single_layer, fine, fine, k, problem.assembly).matrix);
      preconditioner = product({mass_inverse_op(minv_fine), dense_op(sl), mass_inverse_op(minv_fine)});
      break;
    }
    case ScreenPreconditioner::oo_nonconforming: {
      if (!problem.coarse_mesh) {
        throw std::invalid_argument("solve_screen: oo_nonconforming requires a coarse mesh");
      }
      const P1Space coarse = P1Space::constrained_to_interior(*problem.coarse_mesh);
      solution.n_coarse = coarse.dof_count();
      const Complex kc = problem.coarse_k.value_or(k);
      auto sl_coarse = std::make_shared<MatXc>(
          assemble_operator(OperatorKind::single_layer, coarse, coarse, kc, problem.assembly).matrix);
      auto mass_coarse = std::make_shared<SparseMatrix>(assemble_mass(coarse));
      auto minv_coarse = std::make_shared<MassInverse>(*mass_coarse);
      const MortarMatrix mortar = assemble_mortar(*problem.fine_mesh, *problem.coarse_mesh);
      auto p_fc = std::make_shared<SparseMatrix>(restrict_to_spaces(mortar.matrix, fine, coarse));
      // M_f^-1 P_fc M_c^-1 V_c M_c^-1 P_cf M_f^-1
      preconditioner = product({mass_inverse_op(minv_fine), sparse_op(p_fc),
                                mass_inverse_op(minv_coarse), dense_op(sl_coarse),
                                mass_inverse_op(minv_coarse), sparse_transpose_op(p_fc),
                                mass_inverse_op(minv_fine)});
      break;
    }
  }
  solution.t_matrix = std::chrono::duration<double>(Clock::now() - t0).count();

  auto [dirichlet, neumann] = incident_traces(problem.incident, k, fine);
  (void)dirichlet;
  const LinOp::Ptr system = product({preconditioner, dense_op(hs)});
  const VecXc rhs = preconditioner->apply(neumann);

  auto [coeffs, report] = gmres(*system, rhs, problem.gmres);
  solution.report = std::move(report);
  solution.density = fine.expand_to_vertices(coeffs);
  return solution;
}

VecXc screen_total_field(const ScreenProblem& problem, const ScreenSolution& solution,
                         const std::vector<Vec3>& points) {
  const Complex k = Wavenumber::from_frequency(problem.frequency, problem.medium).k;
  const P1Space full(*problem.fine_mesh);
  VecXc coeffs(full.dof_count());
  for (int d = 0; d < full.dof_count(); ++d) coeffs[d] = solution.density[full.vertex_of_dof(d)];
  const PotentialResult sca =
      evaluate_potential(PotentialKind::double_layer, full, coeffs, k, points, problem.assembly);
  VecXc total = sca.values;
  for (std::size_t p = 0; p < points.size(); ++p) {
    total[p] += problem.incident.value(k, points[p]);
  }
  return total;
}

}  // namespace ncbem
