#include "ncbem/studies.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ncbem/gmres.hpp"
#include "ncbem/mortar.hpp"
#include "ncbem/parallel.hpp"
#include "ncbem/postprocess.hpp"
#include "ncbem/screen.hpp"
#include "ncbem/studies.hpp"

namespace ncbem {

namespace {

namespace fs = std::filesystem;

std::ofstream open_output(const StudyConfig& config, const std::string& name) {
  fs::create_directories(config.out_dir);
  const fs::path path = fs::path(config.out_dir) / name;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("run_study: cannot write " + path.string());
  return out;
}

MediumParams medium_ext_of(const StudyConfig& c) { return {c.c_ext, c.rho_ext, 0.0, 1.0}; }
MediumParams medium_int_of(const StudyConfig& c) { return {c.c_int, c.rho_int, c.alpha_int, c.f_alpha}; }

int run_projection_error(const StudyConfig& config) {
  // sigma sweep on a fixed unit-square grid against its perturbations
  const Mesh base = generate_structured_square(config.square_n);
  const double h = base.max_edge_length();
  const P1Space space_int(base);
  const SparseMatrix mass_int = assemble_mass(space_int);

  auto sweep = open_output(config, "sigma_sweep.csv");
  sweep << "sigma,E_int_fro,E_int_max,E_ext_fro,E_ext_max\n";
  char buf[256];
  for (int decade = -6; decade <= -1; ++decade) {
    const double sigma = std::pow(10.0, decade) * h;
    const Mesh perturbed = perturb_nodes(base, sigma, config.seed);
    const P1Space space_ext(perturbed);
    const SparseMatrix mass_ext = assemble_mass(space_ext);
    const MortarMatrix mortar = assemble_mortar(base, perturbed);
    const ProjectionError err = projection_error(mass_int, mass_ext, mortar.matrix);
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", sigma, err.e_int_fro,
                  err.e_int_max, err.e_ext_fro, err.e_ext_max);
    sweep << buf;
  }

  // refinement sweep against a fixed 12-vertex rectangle grid
  const std::array<Vec3, 4> unit_square = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0),
                                           Vec3(0, 1, 0)};
  const Mesh coarse = generate_screen(unit_square, 3, 2);
  const P1Space coarse_space(coarse);
  const SparseMatrix coarse_mass = assemble_mass(coarse_space);
  auto refine = open_output(config, "refinement_sweep.csv");
  refine << "n_ext,N_ext,E_int_fro,E_int_max,E_ext_fro,E_ext_max\n";
  int n = 4;
  for (int level = 0; level < 4; ++level, n *= 2) {
    const Mesh fine = generate_structured_square(n);
    const P1Space fine_space(fine);
    const SparseMatrix fine_mass = assemble_mass(fine_space);
    const MortarMatrix mortar = assemble_mortar(coarse, fine);
    const ProjectionError err = projection_error(coarse_mass, fine_mass, mortar.matrix);
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g,%.17g\n", n, fine.vertex_count(),
                  err.e_int_fro, err.e_int_max, err.e_ext_fro, err.e_ext_max);
    refine << buf;
  }
  return 0;
}

struct CubeRun {
  FormulationKind kind;
  bool conforming;
  double h_ext, h_int;
  Eigen::Index n_ext, n_int;
  double rel_error = 0.0;
  SolveRecord record;
};

// solve one formulation on a cube pair and evaluate the total field
FieldResult solve_and_evaluate(FormulationKind kind, TransmissionContext& ctx,
                               const EvaluationGrid& grid, SolveRecord& record,
                               bool& converged_all) {
  DiscreteSystem weak = build_system(kind, ctx);
  DiscreteSystem strong = precondition_strong(weak, ctx);
  record.t_matrix = ctx.take_assembly_seconds();
  auto [solution, report] = gmres(*strong.op, strong.rhs, {});
  record.formulation = to_string(kind);
  record.n_ext = ctx.space_ext().dof_count();
  record.n_int = ctx.space_int().dof_count();
  record.iterations = report.iterations;
  record.converged = report.converged;
  record.residual = report.true_residual;
  record.t_solve = report.solve_seconds;
  record.t_iter = report.seconds_per_iteration;
  if (!report.converged) converged_all = false;
  return evaluate_solution(kind, solution, ctx, grid);
}

int run_convergence(const StudyConfig& config) {
  const double lambda_ext = config.c_ext / config.frequency;
  const double lambda_int = config.c_int / config.frequency;
  const int n_base = config.n_ext > 0 ? config.n_ext : 8;

  std::vector<int> ladder;
  for (int level = 0; level < config.refine_levels; ++level) {
    ladder.push_back(n_base + level * n_base / 2);
  }
  const int n_ref = 3 * n_base;

  const TransmissionProblem proto{nullptr, nullptr, medium_ext_of(config), medium_int_of(config),
                                  config.frequency, IncidentField::plane_wave(Vec3::UnitX())};

  // reference: finest conforming exterior PMCHWT
  const Mesh ref_mesh = generate_cube_surface(n_ref);
  const EvaluationGrid grid = EvaluationGrid::planar(
      Vec3(-0.5, -0.5, 0.5), Vec3(2, 0, 0), Vec3(0, 2, 0), config.grid_n, config.grid_n, ref_mesh);
  bool converged_all = true;
  FieldResult reference;
  {
    TransmissionProblem problem = proto;
    problem.mesh_ext = &ref_mesh;
    problem.mesh_int = &ref_mesh;
    TransmissionContext ctx(problem);
    SolveRecord record;
    reference = solve_and_evaluate(FormulationKind::pmchwt_ext, ctx, grid, record, converged_all);
  }

  auto csv = open_output(config, "convergence.csv");
  csv << "formulation,mode,h_ext,h_int,N_total,rel_error\n";
  char buf[256];
  for (FormulationKind kind : config.formulations) {
    for (const bool conforming : {true, false}) {
      for (int n : ladder) {
        const Mesh mesh_ext = generate_cube_surface(n);
        Mesh mesh_int_storage;
        const Mesh* mesh_int = &mesh_ext;
        if (!conforming) {
          const int ni = std::max(1, static_cast<int>(std::ceil(n * lambda_ext / lambda_int)));
          mesh_int_storage = generate_cube_surface(ni);
          mesh_int = &mesh_int_storage;
        }
        TransmissionProblem problem = proto;
        problem.mesh_ext = &mesh_ext;
        problem.mesh_int = mesh_int;
        TransmissionContext ctx(problem);
        SolveRecord record;
        const FieldResult field = solve_and_evaluate(kind, ctx, grid, record, converged_all);
        const double err = relative_l2(field, reference);
        std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,%.17g,%ld,%.17g\n",
                      to_string(kind).c_str(), conforming ? "conforming" : "nonconforming",
                      mesh_ext.max_edge_length(), mesh_int->max_edge_length(),
                      static_cast<long>(ctx.space_ext().dof_count() +
                                        (conforming ? 0 : ctx.space_int().dof_count())),
                      err);
        csv << buf;
        csv.flush();
      }
    }
  }
  return converged_all ? 0 : 2;
}

int run_efficiency(const StudyConfig& config) {
  const double lambda_ext = config.c_ext / config.frequency;
  const double lambda_int = config.c_int / config.frequency;
  const int n_ext = config.n_ext > 0
                        ? config.n_ext
                        : cube_resolution(lambda_ext, config.elements_per_wavelength, config.max_n_ext);
  const int n_int = config.n_int > 0
                        ? config.n_int
                        : cube_resolution(lambda_int, config.elements_per_wavelength,
                                          config.max_n_ext);
  const Mesh mesh_ext = generate_cube_surface(n_ext);
  const Mesh mesh_int = generate_cube_surface(n_int);

  const TransmissionProblem proto{nullptr, nullptr, medium_ext_of(config), medium_int_of(config),
                                  config.frequency, IncidentField::plane_wave(Vec3::UnitX())};
  bool converged_all = true;
  std::vector<SolveRecord> records;
  const EvaluationGrid grid = EvaluationGrid::planar(
      Vec3(-0.5, -0.5, 0.5), Vec3(2, 0, 0), Vec3(0, 2, 0), config.grid_n, config.grid_n, mesh_ext);

  for (const bool conforming : {true, false}) {
    TransmissionProblem problem = proto;
    problem.mesh_ext = &mesh_ext;
    problem.mesh_int = conforming ? &mesh_ext : &mesh_int;
    for (FormulationKind kind : config.formulations) {
      // fresh context per run so T_matrix covers exactly this formulation
      TransmissionContext ctx(problem);
      SolveRecord record;
      record.mode = conforming ? "conforming" : "nonconforming";
      (void)solve_and_evaluate(kind, ctx, grid, record, converged_all);
      records.push_back(record);
      std::cout << record.formulation << " " << record.mode << ": iter=" << record.iterations
                << " T_matrix=" << record.t_matrix << "s T_solve=" << record.t_solve << "s\n";
    }
  }
  export_json_report(records, (fs::path(config.out_dir) / "efficiency.json").string());

  // mesh statistics alongside the timings
  auto stats = open_output(config, "mesh_stats.csv");
  stats << "grid,h,N_nodes,elements_per_wavelength\n";
  char buf[160];
  std::snprintf(buf, sizeof(buf), "exterior,%.17g,%d,%.3f\n", mesh_ext.max_edge_length(),
                mesh_ext.vertex_count(), lambda_ext / mesh_ext.max_edge_length());
  stats << buf;
  std::snprintf(buf, sizeof(buf), "interior_nonconforming,%.17g,%d,%.3f\n",
                mesh_int.max_edge_length(), mesh_int.vertex_count(),
                lambda_int / mesh_int.max_edge_length());
  stats << buf;
  return converged_all ? 0 : 2;
}

int run_screen(const StudyConfig& config) {
  const std::array<Vec3, 4> corners = {Vec3(-0.25, -1, -1), Vec3(0.25, 1, -1), Vec3(0.25, 1, 1),
                                       Vec3(-0.25, -1, 1)};
  const double lambda = config.c_ext / config.frequency;
  const Mesh fine = generate_screen(corners, config.screen_n_fine);
  const double edge1 = (corners[1] - corners[0]).norm();
  const int n_coarse = config.screen_n_coarse > 0
                           ? config.screen_n_coarse
                           : std::max(2, static_cast<int>(std::ceil(std::sqrt(2.0) * edge1 /
                                                                    (lambda / 2.0))));
  const Mesh coarse = generate_screen(corners, n_coarse);

  ScreenProblem problem;
  problem.fine_mesh = &fine;
  problem.coarse_mesh = &coarse;
  problem.medium = medium_ext_of(config);
  problem.frequency = config.frequency;
  problem.incident = IncidentField::plane_wave(Vec3::UnitX());

  bool converged_all = true;
  std::vector<SolveRecord> records;
  ScreenSolution nonconforming_solution;
  for (ScreenPreconditioner prec : {ScreenPreconditioner::mass, ScreenPreconditioner::oo_conforming,
                                    ScreenPreconditioner::oo_nonconforming}) {
    problem.preconditioner = prec;
    ScreenSolution sol = solve_screen(problem);
    SolveRecord record;
    record.formulation = "neumann_screen";
    record.mode = prec == ScreenPreconditioner::mass ? "mass"
                  : prec == ScreenPreconditioner::oo_conforming ? "oo_conforming"
                                                                : "oo_nonconforming";
    record.n_ext = sol.n_fine;
    record.n_int = sol.n_coarse;
    record.iterations = sol.report.iterations;
    record.converged = sol.report.converged;
    record.residual = sol.report.true_residual;
    record.t_matrix = sol.t_matrix;
    record.t_solve = sol.report.solve_seconds;
    record.t_iter = sol.report.seconds_per_iteration;
    records.push_back(record);
    if (!sol.report.converged) converged_all = false;
    std::cout << "screen " << record.mode << ": iter=" << record.iterations << "\n";
    if (prec == ScreenPreconditioner::oo_nonconforming) nonconforming_solution = std::move(sol);
  }
  export_json_report(records, (fs::path(config.out_dir) / "screen.json").string());

  // field slice through the screen, as in the plotted benchmark
  const EvaluationGrid grid = EvaluationGrid::planar(Vec3(-2, -2, 0), Vec3(4, 0, 0), Vec3(0, 4, 0),
                                                     config.grid_n, config.grid_n, fine);
  const VecXc field = screen_total_field(problem, nonconforming_solution, grid.points);
  FieldResult result;
  result.values = field;
  result.mask.assign(grid.points.size(), 1);
  for (std::size_t p = 0; p < grid.points.size(); ++p) {
    if (grid.classes[p] == PointClass::near_surface) result.mask[p] = 0;
  }
  export_csv_grid(grid, result, (fs::path(config.out_dir) / "screen_field.csv").string());
  return converged_all ? 0 : 2;
}

int run_foam(const StudyConfig& config) {
  Mesh base = generate_foam(config.foam_nx, config.foam_ny);
  Mesh mesh_ext = base;
  for (int r = 0; r < config.foam_refine_ext; ++r) mesh_ext = refine_uniform(mesh_ext);
  Mesh mesh_int = base;
  for (int r = 0; r < config.foam_refine_int; ++r) mesh_int = refine_uniform(mesh_int);

  const double cx = 0.05 * config.foam_nx * 2.0;  // centre of the base plate
  const double cy = 0.05 * config.foam_ny * 2.0;
  const TransmissionProblem proto{nullptr,
                                  nullptr,
                                  medium_ext_of(config),
                                  medium_int_of(config),
                                  config.frequency,
                                  IncidentField::point_source(Vec3(cx, cy, config.source_height))};

  const double extent_x = 0.1 * config.foam_nx;
  const EvaluationGrid grid = EvaluationGrid::planar(
      Vec3(-0.05, cy, -0.05), Vec3(extent_x + 0.1, 0, 0), Vec3(0, 0, 0.35), config.grid_n,
      config.grid_n, mesh_ext);

  bool converged_all = true;
  std::vector<SolveRecord> records;
  bool exported = false;
  for (const bool conforming : {true, false}) {
    TransmissionProblem problem = proto;
    problem.mesh_ext = &mesh_ext;
    problem.mesh_int = conforming ? &mesh_ext : &mesh_int;
    for (FormulationKind kind : config.formulations) {
      TransmissionContext ctx(problem);
      SolveRecord record;
      record.mode = conforming ? "conforming" : "nonconforming";
      const FieldResult field = solve_and_evaluate(kind, ctx, grid, record, converged_all);
      records.push_back(record);
      std::cout << "foam " << record.formulation << " " << record.mode
                << ": iter=" << record.iterations << "\n";
      if (!conforming && !exported) {
        export_csv_grid(grid, field, (fs::path(config.out_dir) / "foam_field.csv").string());
        exported = true;
      }
    }
  }
  export_json_report(records, (fs::path(config.out_dir) / "foam.json").string());
  return converged_all ? 0 : 2;
}

}  // namespace

int cube_vertex_count(int n) { return 6 * (n + 1) * (n + 1) - 12 * (n + 1) + 8; }

int cube_resolution(double wavelength, double elements_per_wavelength, int max_nodes) {
  int n = static_cast<int>(std::ceil(std::sqrt(2.0) * elements_per_wavelength / wavelength));
  n = std::max(1, n);
  while (n > 1 && cube_vertex_count(n) > max_nodes) --n;
  return n;
}

int run_study(const StudyConfig& config) {
  if (config.threads > 0) set_num_threads(config.threads);
  if (config.study == "projection-error") return run_projection_error(config);
  if (config.study == "convergence") return run_convergence(config);
  if (config.study == "efficiency") return run_efficiency(config);
  if (config.study == "screen") return run_screen(config);
  if (config.study == "foam") return run_foam(config);
  throw std::invalid_argument("run_study: unknown study '" + config.study + "'");
}

}  // namespace ncbem
