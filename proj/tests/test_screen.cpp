#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ncbem/screen.hpp"

using namespace ncbem;

namespace {

const std::array<Vec3, 4> kCorners = {Vec3(-0.25, -1, -1), Vec3(0.25, 1, -1), Vec3(0.25, 1, 1),
                                      Vec3(-0.25, -1, 1)};

ScreenProblem small_problem(const Mesh& fine, const Mesh& coarse) {
  ScreenProblem p;
  p.fine_mesh = &fine;
  p.coarse_mesh = &coarse;
  p.medium = {1.0, 1.0, 0.0, 1.0};
  p.frequency = 1.5;
  p.incident = IncidentField::plane_wave(Vec3::UnitX());
  return p;
}

}  // namespace

TEST_CASE("screen preconditioners agree on the density") {
  const Mesh fine = generate_screen(kCorners, 16);
  const Mesh coarse = generate_screen(kCorners, 6);
  ScreenProblem problem = small_problem(fine, coarse);

  VecXc densities[3];
  int iters[3] = {0, 0, 0};
  int idx = 0;
  for (ScreenPreconditioner prec : {ScreenPreconditioner::mass, ScreenPreconditioner::oo_conforming,
                                    ScreenPreconditioner::oo_nonconforming}) {
    problem.preconditioner = prec;
    const ScreenSolution sol = solve_screen(problem);
    REQUIRE(sol.report.converged);
    CHECK(sol.report.true_residual <= 1.5e-5);
    densities[idx] = sol.density;
    iters[idx] = sol.report.iterations;
    ++idx;
  }
  CHECK((densities[1] - densities[0]).norm() / densities[0].norm() < 1e-2);
  CHECK((densities[2] - densities[0]).norm() / densities[0].norm() < 1e-2);
  CHECK(iters[1] < iters[0]);  // opposite-order helps already at small scale

  // boundary dofs are removed: the density vanishes on the screen edge
  std::vector<bool> on_boundary(fine.vertex_count(), false);
  for (const auto& e : fine.boundary_edges) on_boundary[e[0]] = on_boundary[e[1]] = true;
  for (int v = 0; v < fine.vertex_count(); ++v) {
    if (on_boundary[v]) CHECK(std::abs(densities[0][v]) == 0.0);
  }
}

TEST_CASE("scattered field is mirror symmetric in z") {
  const Mesh fine = generate_screen(kCorners, 16);
  const Mesh coarse = generate_screen(kCorners, 6);
  ScreenProblem problem = small_problem(fine, coarse);
  problem.preconditioner = ScreenPreconditioner::oo_nonconforming;
  const ScreenSolution sol = solve_screen(problem);
  REQUIRE(sol.report.converged);

  // geometry and incidence are symmetric under z -> -z
  std::vector<Vec3> points, mirrored;
  for (double x : {-0.8, 0.6, 1.4}) {
    for (double z : {0.25, 0.55, 0.85}) {
      points.push_back(Vec3(x, 0.2, z));
      mirrored.push_back(Vec3(x, 0.2, -z));
    }
  }
  const VecXc up = screen_total_field(problem, sol, points);
  const VecXc down = screen_total_field(problem, sol, mirrored);
  for (Eigen::Index i = 0; i < up.size(); ++i) {
    CHECK(std::abs(std::abs(up[i]) - std::abs(down[i])) / std::abs(up[i]) < 1e-2);
  }
}

TEST_CASE("screen input validation") {
  const Mesh fine = generate_screen(kCorners, 8);
  ScreenProblem problem = small_problem(fine, fine);
  problem.coarse_mesh = nullptr;
  problem.preconditioner = ScreenPreconditioner::oo_nonconforming;
  CHECK_THROWS(static_cast<void>(solve_screen(problem)));

  const Mesh cube = generate_cube_surface(2);
  ScreenProblem closed = small_problem(cube, cube);
  CHECK_THROWS(static_cast<void>(solve_screen(closed)));
}
