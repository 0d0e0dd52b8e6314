#include "ncbem/postprocess.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "ncbem/parallel.hpp"

namespace ncbem {

namespace {

struct RayResult {
  bool ambiguous = false;
  int crossings = 0;
};

RayResult cast_ray(const Mesh& mesh, const Vec3& origin, const Vec3& dir) {
  RayResult res;
  const double scale = mesh.bbox_diagonal();
  const double eps = 1e-10;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Vec3 a = mesh.corner(t, 0);
    const Vec3 e1 = mesh.corner(t, 1) - a;
    const Vec3 e2 = mesh.corner(t, 2) - a;
    const Vec3 p = dir.cross(e2);
    const double det = e1.dot(p);
    if (std::abs(det) < 1e-14 * scale * scale) {
      // ray nearly parallel to the triangle plane; ambiguous only if the
      // supporting plane passes close to the ray origin
      const Vec3 n = e1.cross(e2);
      if (std::abs((origin - a).dot(n)) < eps * n.norm() * scale) res.ambiguous = true;
      continue;
    }
    const Vec3 s = origin - a;
    const double u = s.dot(p) / det;
    if (u < -eps || u > 1.0 + eps) continue;
    const Vec3 q = s.cross(e1);
    const double v = dir.dot(q) / det;
    if (v < -eps || u + v > 1.0 + eps) continue;
    const double tau = e2.dot(q) / det;
    if (tau < -eps) continue;
    if (u < eps || v < eps || u + v > 1.0 - eps || tau < eps) {
      res.ambiguous = true;
      continue;
    }
    res.crossings += 1;
  }
  return res;
}

const std::array<Vec3, 8>& ray_directions() {
  static const std::array<Vec3, 8> dirs = {
      Vec3(0.5377397836963742, 0.7253554827231842, 0.4294058476888001).normalized(),
      Vec3(-0.3617261250215, 0.8123699813411, 0.4574316012201).normalized(),
      Vec3(0.7431442169201, -0.1987253161101, 0.6389411202214).normalized(),
      Vec3(0.1299871523321, 0.4143312621501, -0.9007612315201).normalized(),
      Vec3(-0.6614121532101, -0.5321512341231, 0.5287612312311).normalized(),
      Vec3(0.3321512341231, -0.7287612312311, -0.5987253161101).normalized(),
      Vec3(-0.2143312621501, 0.3007612315201, 0.9294058476888).normalized(),
      Vec3(0.9123699813411, 0.2574316012201, -0.3177397836963).normalized(),
  };
  return dirs;
}

bool distance_below(const Mesh& mesh, const Vec3& p, double tol) {
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Vec3 a = mesh.corner(t, 0), b = mesh.corner(t, 1), c = mesh.corner(t, 2);
    // bbox reject
    const double dx = std::max({std::min({a.x(), b.x(), c.x()}) - p.x(), 0.0,
                                p.x() - std::max({a.x(), b.x(), c.x()})});
    const double dy = std::max({std::min({a.y(), b.y(), c.y()}) - p.y(), 0.0,
                                p.y() - std::max({a.y(), b.y(), c.y()})});
    const double dz = std::max({std::min({a.z(), b.z(), c.z()}) - p.z(), 0.0,
                                p.z() - std::max({a.z(), b.z(), c.z()})});
    if (dx * dx + dy * dy + dz * dz > tol * tol) continue;
    if (point_triangle_distance(p, a, b, c) <= tol) return true;
  }
  return false;
}

}  // namespace

bool point_inside(const Mesh& mesh, const Vec3& point) {
  if (!mesh.closed()) return false;
  RayResult last;
  for (const Vec3& dir : ray_directions()) {
    last = cast_ray(mesh, point, dir);
    if (!last.ambiguous) return (last.crossings % 2) == 1;
  }
  return (last.crossings % 2) == 1;
}

EvaluationGrid EvaluationGrid::planar(const Vec3& origin, const Vec3& axis1, const Vec3& axis2,
                                      int n1, int n2, const Mesh& mesh) {
  if (n1 < 2 || n2 < 2) throw std::invalid_argument("EvaluationGrid: need at least 2x2 points");
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(n1) * n2);
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      pts.push_back(origin + (static_cast<double>(i) / (n1 - 1)) * axis1 +
                    (static_cast<double>(j) / (n2 - 1)) * axis2);
    }
  }
  return from_points(std::move(pts), mesh);
}

EvaluationGrid EvaluationGrid::from_points(std::vector<Vec3> points, const Mesh& mesh) {
  EvaluationGrid grid;
  grid.points = std::move(points);
  grid.classes.assign(grid.points.size(), PointClass::exterior);
  const double near_tol = 1e-3 * mesh.bbox_diagonal();
  parallel_for_chunks(grid.points.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      if (distance_below(mesh, grid.points[p], near_tol)) {
        grid.classes[p] = PointClass::near_surface;
      } else if (point_inside(mesh, grid.points[p])) {
        grid.classes[p] = PointClass::interior;
      }
    }
  });
  return grid;
}

namespace {

// densities for the representation formulas, on both meshes
struct Representations {
  // exterior scattered field u_ext = slp_e(psi_e) - dlp_e(phi_e)
  VecXc phi_e, psi_e;
  bool use_ext_slp = true, use_ext_dlp = true;
  // interior field u_int = slp_i(psi_i) - dlp_i(phi_i)
  VecXc phi_i, psi_i;
  bool use_int_slp = true, use_int_dlp = true;
};

VecXc dense_times(const std::shared_ptr<const MatXc>& m, const VecXc& x) { return (*m) * x; }

Representations recover_densities(FormulationKind kind, const VecXc& solution,
                                  TransmissionContext& ctx) {
  using Side = TransmissionContext::Side;
  const Eigen::Index ne = ctx.space_ext().dof_count();
  const Eigen::Index ni = ctx.space_int().dof_count();
  const double re = ctx.rho_ext_over_int();
  const double ri = ctx.rho_int_over_ext();
  Representations rep;

  auto ext_traces = [&]() {
    return incident_traces(ctx.problem().incident, ctx.k_ext(), ctx.space_ext());
  };

  switch (kind) {
    case FormulationKind::pmchwt_ext:
    case FormulationKind::muller_ext: {
      if (solution.size() != 2 * ne) throw std::invalid_argument("evaluate_solution: size mismatch");
      const VecXc phi = solution.segment(0, ne);   // Dirichlet trace of p_tot
      const VecXc psi = solution.segment(ne, ne);  // Neumann trace of p_tot
      rep.phi_e = -phi;
      rep.psi_e = -psi;
      rep.phi_i = ctx.transfer_to_int(phi);
      rep.psi_i = ri * ctx.transfer_to_int(psi);
      break;
    }
    case FormulationKind::pmchwt_int:
    case FormulationKind::muller_int: {
      if (solution.size() != 2 * ni) throw std::invalid_argument("evaluate_solution: size mismatch");
      const VecXc phi = solution.segment(0, ni);
      const VecXc psi = solution.segment(ni, ni);
      rep.phi_i = phi;
      rep.psi_i = psi;
      rep.phi_e = -ctx.transfer_to_ext(phi);
      rep.psi_e = -re * ctx.transfer_to_ext(psi);
      break;
    }
    case FormulationKind::mtf: {
      if (solution.size() != 2 * ne + 2 * ni) {
        throw std::invalid_argument("evaluate_solution: size mismatch");
      }
      rep.phi_e = solution.segment(0, ne);
      rep.psi_e = solution.segment(ne, ne);
      rep.phi_i = solution.segment(2 * ne, ni);
      rep.psi_i = solution.segment(2 * ne + ni, ni);
      break;
    }
    case FormulationKind::hc_ext_neu: {
      if (solution.size() != 2 * ne) throw std::invalid_argument("evaluate_solution: size mismatch");
      const VecXc mu = solution.segment(0, ne);     // Neumann trace of p_tot
      const VecXc psi_e = solution.segment(ne, ne);  // single-layer density
      rep.psi_e = psi_e;
      rep.use_ext_dlp = false;
      rep.phi_e = VecXc::Zero(ne);
      auto [f, g] = ext_traces();
      const VecXc dirichlet =
          ctx.mass_inv_ext()->apply(dense_times(ctx.dense(Side::ext, OperatorKind::single_layer), psi_e) + f);
      rep.phi_i = ctx.transfer_to_int(dirichlet);
      rep.psi_i = ri * ctx.transfer_to_int(mu);
      break;
    }
    case FormulationKind::hc_ext_dir: {
      if (solution.size() != 2 * ne) throw std::invalid_argument("evaluate_solution: size mismatch");
      const VecXc phi_e = solution.segment(0, ne);  // double-layer density
      const VecXc d = solution.segment(ne, ne);     // Dirichlet trace of p_tot
      rep.phi_e = phi_e;
      rep.use_ext_slp = false;
      rep.psi_e = VecXc::Zero(ne);
      auto [f, g] = ext_traces();
      const VecXc neumann =
          ctx.mass_inv_ext()->apply(dense_times(ctx.dense(Side::ext, OperatorKind::hypersingular), phi_e) + g);
      rep.phi_i = ctx.transfer_to_int(d);
      rep.psi_i = ri * ctx.transfer_to_int(neumann);
      break;
    }
    case FormulationKind::hc_int_neu: {
      if (solution.size() != 2 * ni) throw std::invalid_argument("evaluate_solution: size mismatch");
      const VecXc mu = solution.segment(0, ni);     // interior Neumann trace
      const VecXc psi_i = solution.segment(ni, ni);  // single-layer density
      rep.psi_i = psi_i;
      rep.use_int_dlp = false;
      rep.phi_i = VecXc::Zero(ni);
      const VecXc dirichlet = ctx.mass_inv_int()->apply(
          dense_times(ctx.dense(Side::intr, OperatorKind::single_layer), psi_i));
      rep.phi_e = -ctx.transfer_to_ext(dirichlet);
      rep.psi_e = -re * ctx.transfer_to_ext(mu);
      break;
    }
    case FormulationKind::hc_int_dir: {
      if (solution.size() != 2 * ni) throw std::invalid_argument("evaluate_solution: size mismatch");
      const VecXc phi_i = solution.segment(0, ni);  // double-layer density
      const VecXc d = solution.segment(ni, ni);     // interior Dirichlet trace
      rep.phi_i = phi_i;
      rep.use_int_slp = false;
      rep.psi_i = VecXc::Zero(ni);
      const VecXc neumann = ctx.mass_inv_int()->apply(
          dense_times(ctx.dense(Side::intr, OperatorKind::hypersingular), phi_i));
      rep.phi_e = -ctx.transfer_to_ext(d);
      rep.psi_e = -re * ctx.transfer_to_ext(neumann);
      break;
    }
  }
  return rep;
}

}  // namespace

FieldResult evaluate_solution(FormulationKind kind, const VecXc& solution, TransmissionContext& ctx,
                              const EvaluationGrid& grid) {
  const Representations rep = recover_densities(kind, solution, ctx);
  FieldResult out;
  out.values = VecXc::Zero(grid.points.size());
  out.mask.assign(grid.points.size(), 0);

  std::vector<std::size_t> ext_idx, int_idx;
  std::vector<Vec3> ext_pts, int_pts;
  for (std::size_t p = 0; p < grid.points.size(); ++p) {
    if (grid.classes[p] == PointClass::exterior) {
      ext_idx.push_back(p);
      ext_pts.push_back(grid.points[p]);
      out.mask[p] = 1;
    } else if (grid.classes[p] == PointClass::interior) {
      int_idx.push_back(p);
      int_pts.push_back(grid.points[p]);
      out.mask[p] = 1;
    }
  }

  if (!ext_pts.empty()) {
    VecXc u = VecXc::Zero(ext_pts.size());
    if (rep.use_ext_slp) {
      u += evaluate_potential(PotentialKind::single_layer, ctx.space_ext(), rep.psi_e, ctx.k_ext(),
                              ext_pts, ctx.assembly_options())
               .values;
    }
    if (rep.use_ext_dlp) {
      u -= evaluate_potential(PotentialKind::double_layer, ctx.space_ext(), rep.phi_e, ctx.k_ext(),
                              ext_pts, ctx.assembly_options())
               .values;
    }
    for (std::size_t i = 0; i < ext_idx.size(); ++i) {
      out.values[ext_idx[i]] =
          u[i] + ctx.problem().incident.value(ctx.k_ext(), ext_pts[i]);
    }
  }
  if (!int_pts.empty()) {
    VecXc u = VecXc::Zero(int_pts.size());
    if (rep.use_int_slp) {
      u += evaluate_potential(PotentialKind::single_layer, ctx.space_int(), rep.psi_i, ctx.k_int(),
                              int_pts, ctx.assembly_options())
               .values;
    }
    if (rep.use_int_dlp) {
      u -= evaluate_potential(PotentialKind::double_layer, ctx.space_int(), rep.phi_i, ctx.k_int(),
                              int_pts, ctx.assembly_options())
               .values;
    }
    for (std::size_t i = 0; i < int_idx.size(); ++i) out.values[int_idx[i]] = u[i];
  }
  return out;
}

double relative_l2(const VecXc& field, const VecXc& reference, const std::vector<std::uint8_t>& mask) {
  if (field.size() != reference.size() || static_cast<std::size_t>(field.size()) != mask.size()) {
    throw std::invalid_argument("relative_l2: size mismatch");
  }
  double num = 0.0, den = 0.0;
  bool any = false;
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    if (!mask[i]) continue;
    any = true;
    num += std::norm(field[i] - reference[i]);
    den += std::norm(reference[i]);
  }
  if (!any) throw std::invalid_argument("relative_l2: all points masked");
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

double relative_l2(const FieldResult& field, const FieldResult& reference) {
  std::vector<std::uint8_t> mask(field.mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = field.mask[i] && reference.mask[i];
  return relative_l2(field.values, reference.values, mask);
}

void export_csv_grid(const EvaluationGrid& grid, const FieldResult& field, const std::string& path) {
  if (grid.points.size() != static_cast<std::size_t>(field.values.size())) {
    throw std::invalid_argument("export_csv_grid: size mismatch");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_csv_grid: cannot write " + path);
  out << "x,y,z,re,im,mask\n";
  char buf[256];
  for (std::size_t p = 0; p < grid.points.size(); ++p) {
    const Vec3& x = grid.points[p];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", x.x(), x.y(), x.z(),
                  field.values[p].real(), field.values[p].imag(), static_cast<int>(field.mask[p]));
    out << buf;
  }
}

void export_json_report(const std::vector<SolveRecord>& records, const std::string& path) {
  nlohmann::json doc = nlohmann::json::array();
  for (const SolveRecord& r : records) {
    doc.push_back({{"formulation", r.formulation},
                   {"mode", r.mode},
                   {"N_ext", r.n_ext},
                   {"N_int", r.n_int},
                   {"iter", r.iterations},
                   {"converged", r.converged},
                   {"residual", r.residual},
                   {"T_matrix", r.t_matrix},
                   {"T_solve", r.t_solve},
                   {"T_iter", r.t_iter}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_json_report: cannot write " + path);
  out << doc.dump(2) << "\n";
}

}  // namespace ncbem
