// Field evaluation on grids via the representation formula of each
// formulation, error norms, and CSV/JSON export.
#pragma once

#include <string>

#include "ncbem/formulations.hpp"
#include "ncbem/gmres.hpp"

namespace ncbem {

enum class PointClass : std::uint8_t { exterior = 0, interior = 1, near_surface = 2 };

// Planar lattice of evaluation points with an inside/outside classification
// against a closed mesh (ray-casting parity). Points closer to the surface
// than 1e-3 x bbox diagonal are flagged near_surface and excluded from
// norms. Open meshes have no interior; everything off-surface is exterior.
struct EvaluationGrid {
  std::vector<Vec3> points;
  std::vector<PointClass> classes;

  static EvaluationGrid planar(const Vec3& origin, const Vec3& axis1, const Vec3& axis2, int n1,
                               int n2, const Mesh& mesh);
  static EvaluationGrid from_points(std::vector<Vec3> points, const Mesh& mesh);
};

// Parity ray casting with deterministic direction fallbacks.
bool point_inside(const Mesh& mesh, const Vec3& point);

struct FieldResult {
  VecXc values;                     // total field; interior field inside
  std::vector<std::uint8_t> mask;   // 1 = usable, 0 = excluded (near surface)
};

// Total acoustic field of a solved formulation on the grid: exterior points
// carry u_ext + p_inc, interior points u_int, with densities mortar-
// transferred whenever the representation lives on the other mesh.
FieldResult evaluate_solution(FormulationKind kind, const VecXc& solution,
                              TransmissionContext& ctx, const EvaluationGrid& grid);

// || f - r ||_2 / || r ||_2 over points masked usable in both fields.
double relative_l2(const VecXc& field, const VecXc& reference, const std::vector<std::uint8_t>& mask);
double relative_l2(const FieldResult& field, const FieldResult& reference);

// "x,y,z,re,im,mask" rows at 17 significant digits.
void export_csv_grid(const EvaluationGrid& grid, const FieldResult& field, const std::string& path);

struct SolveRecord {
  std::string formulation;
  std::string mode;  // conforming / nonconforming / preconditioner tag
  Eigen::Index n_ext = 0;
  Eigen::Index n_int = 0;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
  double t_matrix = 0.0;
  double t_solve = 0.0;
  double t_iter = 0.0;
};

void export_json_report(const std::vector<SolveRecord>& records, const std::string& path);

}  // namespace ncbem
