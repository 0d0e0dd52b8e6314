#include "ncbem/mortar.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <Eigen/SparseCholesky>

#include "ncbem/parallel.hpp"
#include "ncbem/space.hpp"

namespace ncbem {

double ClipPolygon::area() const {
  if (points.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec2& p = points[i];
    const Vec2& q = points[(i + 1) % points.size()];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * std::abs(twice);
}

namespace {

double signed_area2(const std::array<Vec2, 3>& tri) {
  return (tri[1] - tri[0]).x() * (tri[2] - tri[0]).y() -
         (tri[2] - tri[0]).x() * (tri[1] - tri[0]).y();
}

}  // namespace

ClipPolygon clip_triangles(const std::array<Vec2, 3>& tri_a, const std::array<Vec2, 3>& tri_b,
                           double eps_clip) {
  // subject polygon = B, clipped against the counterclockwise edges of A
  std::array<Vec2, 3> a = tri_a;
  if (signed_area2(a) < 0.0) std::swap(a[1], a[2]);
  std::vector<Vec2> poly(tri_b.begin(), tri_b.end());
  if (signed_area2(tri_b) < 0.0) std::swap(poly[1], poly[2]);

  std::vector<Vec2> next;
  for (int e = 0; e < 3 && !poly.empty(); ++e) {
    const Vec2 p0 = a[e];
    const Vec2 dir = a[(e + 1) % 3] - p0;
    auto inside = [&](const Vec2& p) {
      return dir.x() * (p.y() - p0.y()) - dir.y() * (p.x() - p0.x()) >= -eps_clip * dir.norm();
    };
    next.clear();
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2& cur = poly[i];
      const Vec2& prev = poly[(i + poly.size() - 1) % poly.size()];
      const bool cur_in = inside(cur);
      const bool prev_in = inside(prev);
      if (cur_in != prev_in) {
        // intersection of segment (prev, cur) with the edge line
        const double fp = dir.x() * (prev.y() - p0.y()) - dir.y() * (prev.x() - p0.x());
        const double fc = dir.x() * (cur.y() - p0.y()) - dir.y() * (cur.x() - p0.x());
        const double t = fp / (fp - fc);
        next.push_back(prev + t * (cur - prev));
      }
      if (cur_in) next.push_back(cur);
    }
    poly = next;
  }
  ClipPolygon out;
  out.points = std::move(poly);
  return out;
}

namespace {

// barycentric coordinates of p with respect to a 2D triangle
Vec3 barycentric2(const std::array<Vec2, 3>& tri, const Vec2& p) {
  const Vec2 e1 = tri[1] - tri[0], e2 = tri[2] - tri[0], d = p - tri[0];
  const double det = e1.x() * e2.y() - e2.x() * e1.y();
  const double l1 = (d.x() * e2.y() - e2.x() * d.y()) / det;
  const double l2 = (e1.x() * d.y() - d.x() * e1.y()) / det;
  return Vec3(1.0 - l1 - l2, l1, l2);
}

}  // namespace

Eigen::Matrix3d mortar_cell(const std::array<Vec2, 3>& tri_a, const std::array<Vec2, 3>& tri_b,
                            double eps_clip) {
  Eigen::Matrix3d cell = Eigen::Matrix3d::Zero();
  const ClipPolygon poly = clip_triangles(tri_a, tri_b, eps_clip);
  if (poly.empty() || poly.area() < eps_clip * eps_clip) return cell;
  // fan triangulation; midpoint rule per fan triangle is exact for the
  // quadratic integrand
  const Vec2& p0 = poly.points[0];
  for (std::size_t f = 1; f + 1 < poly.points.size(); ++f) {
    const Vec2& p1 = poly.points[f];
    const Vec2& p2 = poly.points[f + 1];
    const double area =
        0.5 * std::abs((p1 - p0).x() * (p2 - p0).y() - (p2 - p0).x() * (p1 - p0).y());
    if (area <= 0.0) continue;
    const Vec2 mids[3] = {0.5 * (p0 + p1), 0.5 * (p1 + p2), 0.5 * (p2 + p0)};
    for (const Vec2& m : mids) {
      const Vec3 la = barycentric2(tri_a, m);
      const Vec3 lb = barycentric2(tri_b, m);
      const double w = area / 3.0;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) cell(i, j) += w * la[i] * lb[j];
      }
    }
  }
  return cell;
}

namespace {

struct PlaneGroup {
  Vec3 point;
  Vec3 normal;
  std::vector<int> triangles;
};

// Patches merged by coinciding planes; parallel-but-offset facets (e.g.
// matching pyramid faces of a foam) stay separate groups.
std::vector<PlaneGroup> plane_groups(const Mesh& mesh, const MortarOptions& opt, double diameter) {
  const PlanarPatchSet patches = planar_patches(mesh, opt.angle_tol);
  std::vector<PlaneGroup> groups;
  for (std::size_t p = 0; p < patches.patches.size(); ++p) {
    const Vec3 n = patches.planes[p].normal;
    const Vec3 x = patches.planes[p].point;
    bool merged = false;
    for (PlaneGroup& g : groups) {
      if (g.normal.dot(n) > 1.0 - opt.angle_tol &&
          std::abs((x - g.point).dot(g.normal)) < opt.plane_tol_scale * diameter) {
        g.triangles.insert(g.triangles.end(), patches.patches[p].begin(), patches.patches[p].end());
        merged = true;
        break;
      }
    }
    if (!merged) groups.push_back({x, n, patches.patches[p]});
  }
  for (PlaneGroup& g : groups) std::sort(g.triangles.begin(), g.triangles.end());
  return groups;
}

struct GroupTask {
  const PlaneGroup* row = nullptr;
  const PlaneGroup* col = nullptr;
};

struct ProjectedTriangles {
  std::vector<std::array<Vec2, 3>> tri;   // group-local
  std::vector<Vec2> centroid;
  std::vector<int> global;                // group-local -> mesh triangle
  std::vector<int> local_of_global;       // mesh triangle -> group-local (-1 outside)
  std::vector<std::array<int, 3>> nbr;    // group-local adjacency
};

ProjectedTriangles project_group(const Mesh& mesh, const PlaneGroup& group, const Vec3& u,
                                 const Vec3& v, const Vec3& origin,
                                 const std::vector<std::array<int, 3>>& adjacency) {
  ProjectedTriangles out;
  out.local_of_global.assign(mesh.triangle_count(), -1);
  out.global = group.triangles;
  for (std::size_t l = 0; l < out.global.size(); ++l) out.local_of_global[out.global[l]] = static_cast<int>(l);
  out.tri.resize(out.global.size());
  out.centroid.resize(out.global.size());
  out.nbr.assign(out.global.size(), {-1, -1, -1});
  for (std::size_t l = 0; l < out.global.size(); ++l) {
    const int t = out.global[l];
    Vec2 c(0, 0);
    for (int i = 0; i < 3; ++i) {
      const Vec3 d = mesh.corner(t, i) - origin;
      out.tri[l][i] = Vec2(d.dot(u), d.dot(v));
      c += out.tri[l][i];
    }
    out.centroid[l] = c / 3.0;
    for (int e = 0; e < 3; ++e) {
      const int n = adjacency[t][e];
      if (n >= 0 && out.local_of_global[n] >= 0) out.nbr[l][e] = out.local_of_global[n];
    }
  }
  return out;
}

// Advancing-front sweep over one matched plane group: intersect the seed
// pair, then propagate candidates through edge neighbours of both meshes.
// Returns per-pair cells as triplets in vertex indexing.
void sweep_group(const Mesh& row_mesh, const Mesh& col_mesh, const ProjectedTriangles& rows,
                 const ProjectedTriangles& cols, double eps_clip, double stall_tol,
                 std::vector<Triplet>& triplets, std::vector<double>& row_covered,
                 std::vector<double>& col_covered) {
  const int nr = static_cast<int>(rows.global.size());
  const int nc = static_cast<int>(cols.global.size());
  std::vector<double> covered(nr, 0.0);
  std::vector<double> row_area(nr);
  for (int l = 0; l < nr; ++l) {
    ClipPolygon self;
    self.points.assign(rows.tri[l].begin(), rows.tri[l].end());
    row_area[l] = self.area();
  }
  std::unordered_set<std::uint64_t> visited;
  auto key = [nc](int a, int b) { return static_cast<std::uint64_t>(a) * nc + b; };

  std::deque<std::pair<int, int>> front;
  auto process = [&](int a, int b) {
    const Eigen::Matrix3d cell = mortar_cell(rows.tri[a], cols.tri[b], eps_clip);
    const double area = cell.sum();  // hats partition unity on both sides
    if (area <= eps_clip * eps_clip) return false;
    const int tr = rows.global[a];
    const int tc = cols.global[b];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        triplets.emplace_back(row_mesh.triangles[tr][i], col_mesh.triangles[tc][j], cell(i, j));
      }
    }
    covered[a] += area;
    row_covered[tr] += area;
    col_covered[tc] += area;
    for (int e = 0; e < 3; ++e) {
      const int an = rows.nbr[a][e];
      if (an >= 0 && !visited.count(key(an, b))) {
        visited.insert(key(an, b));
        front.emplace_back(an, b);
      }
      const int bn = cols.nbr[b][e];
      if (bn >= 0 && !visited.count(key(a, bn))) {
        visited.insert(key(a, bn));
        front.emplace_back(a, bn);
      }
    }
    return true;
  };

  auto seed_for = [&](int a) -> int {
    // nearest centroid first, then brute force over the group
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int b = 0; b < nc; ++b) {
      const double d = (cols.centroid[b] - rows.centroid[a]).squaredNorm();
      if (d < best_d && !visited.count(key(a, b))) {
        best_d = d;
        best = b;
      }
    }
    if (best >= 0) {
      visited.insert(key(a, best));
      const ClipPolygon probe = clip_triangles(rows.tri[a], cols.tri[best], eps_clip);
      if (probe.area() > eps_clip * eps_clip) return best;
    }
    for (int b = 0; b < nc; ++b) {
      if (visited.count(key(a, b))) continue;
      visited.insert(key(a, b));
      const ClipPolygon probe = clip_triangles(rows.tri[a], cols.tri[b], eps_clip);
      if (probe.area() > eps_clip * eps_clip) return b;
    }
    return -1;
  };

  while (true) {
    // find an uncovered row triangle to (re)seed from
    int seed = -1;
    for (int a = 0; a < nr; ++a) {
      if (covered[a] < (1.0 - stall_tol) * row_area[a]) {
        seed = a;
        break;
      }
    }
    if (seed < 0) break;
    const int b = seed_for(seed);
    if (b < 0) {
      double uncovered = 0.0;
      for (int a = 0; a < nr; ++a) uncovered += std::max(0.0, row_area[a] - covered[a]);
      throw std::runtime_error("assemble_mortar: advancing front stalled, uncovered area " +
                               std::to_string(uncovered));
    }
    front.emplace_back(seed, b);
    while (!front.empty()) {
      const auto [a, bb] = front.front();
      front.pop_front();
      process(a, bb);
    }
  }
}

}  // namespace

MortarMatrix assemble_mortar(const Mesh& row_mesh, const Mesh& col_mesh,
                             const MortarOptions& options) {
  const double diameter = std::max(row_mesh.bbox_diagonal(), col_mesh.bbox_diagonal());
  const auto row_groups = plane_groups(row_mesh, options, diameter);
  const auto col_groups = plane_groups(col_mesh, options, diameter);
  const auto row_adjacency = element_adjacency(row_mesh);
  const auto col_adjacency = element_adjacency(col_mesh);

  // match plane groups one-to-one by point+normal
  std::vector<GroupTask> tasks;
  std::vector<bool> used(col_groups.size(), false);
  for (const PlaneGroup& rg : row_groups) {
    bool matched = false;
    for (std::size_t c = 0; c < col_groups.size(); ++c) {
      if (used[c]) continue;
      const PlaneGroup& cg = col_groups[c];
      if (rg.normal.dot(cg.normal) > 1.0 - options.angle_tol &&
          std::abs((cg.point - rg.point).dot(rg.normal)) < options.plane_tol_scale * diameter) {
        tasks.push_back({&rg, &cg});
        used[c] = true;
        matched = true;
        break;
      }
    }
    if (!matched) throw std::runtime_error("assemble_mortar: unmatched plane group between meshes");
  }
  if (std::find(used.begin(), used.end(), false) != used.end()) {
    throw std::runtime_error("assemble_mortar: column mesh has an unmatched plane group");
  }

  const double eps_clip = options.clip_tol_scale * diameter;
  std::vector<std::vector<Triplet>> task_triplets(tasks.size());
  std::vector<double> row_covered(row_mesh.triangle_count(), 0.0);
  std::vector<double> col_covered(col_mesh.triangle_count(), 0.0);
  std::vector<std::string> task_errors(tasks.size());

  parallel_for_chunks(tasks.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t ti = begin; ti < end; ++ti) {
      const GroupTask& task = tasks[ti];
      const Vec3 n = task.row->normal;
      const Vec3 u = n.unitOrthogonal();
      const Vec3 v = n.cross(u);
      const Vec3 origin = task.row->point;
      const ProjectedTriangles rows = project_group(row_mesh, *task.row, u, v, origin, row_adjacency);
      const ProjectedTriangles cols = project_group(col_mesh, *task.col, u, v, origin, col_adjacency);
      try {
        sweep_group(row_mesh, col_mesh, rows, cols, eps_clip, options.stall_tol, task_triplets[ti],
                    row_covered, col_covered);
      } catch (const std::exception& e) {
        task_errors[ti] = e.what();
      }
    }
  });
  for (const std::string& err : task_errors) {
    if (!err.empty()) throw std::runtime_error(err);
  }

  std::vector<Triplet> triplets;
  std::size_t total = 0;
  for (const auto& tt : task_triplets) total += tt.size();
  triplets.reserve(total);
  for (const auto& tt : task_triplets) triplets.insert(triplets.end(), tt.begin(), tt.end());

  MortarMatrix out;
  out.matrix.resize(row_mesh.vertex_count(), col_mesh.vertex_count());
  out.matrix.setFromTriplets(triplets.begin(), triplets.end());
  out.matrix.makeCompressed();
  for (int t = 0; t < row_mesh.triangle_count(); ++t) {
    out.max_row_tiling_defect =
        std::max(out.max_row_tiling_defect, std::abs(row_covered[t] - row_mesh.triangle_area(t)));
  }
  for (int t = 0; t < col_mesh.triangle_count(); ++t) {
    out.max_col_tiling_defect =
        std::max(out.max_col_tiling_defect, std::abs(col_covered[t] - col_mesh.triangle_area(t)));
  }
  return out;
}

ProjectionError projection_error(const SparseMatrix& mass_int, const SparseMatrix& mass_ext,
                                 const SparseMatrix& mortar_int_ext) {
  const Eigen::Index ni = mass_int.rows();
  const Eigen::Index ne = mass_ext.rows();
  if (mortar_int_ext.rows() != ni || mortar_int_ext.cols() != ne) {
    throw std::invalid_argument("projection_error: dimension mismatch");
  }
  Eigen::SimplicialLDLT<SparseMatrix> mi(mass_int);
  Eigen::SimplicialLDLT<SparseMatrix> me(mass_ext);
  if (mi.info() != Eigen::Success || me.info() != Eigen::Success) {
    throw std::runtime_error("projection_error: mass factorisation failed");
  }
  const SparseMatrix p_ext_int = SparseMatrix(mortar_int_ext.transpose());

  // interior round trip: I - Mi^-1 P Me^-1 P^T
  MatX x = me.solve(MatX(p_ext_int));
  MatX d_int = mi.solve(MatX(mortar_int_ext * x));
  d_int = MatX::Identity(ni, ni) - d_int;
  // exterior round trip: I - Me^-1 P^T Mi^-1 P
  MatX y = mi.solve(MatX(mortar_int_ext));
  MatX d_ext = me.solve(MatX(p_ext_int * y));
  d_ext = MatX::Identity(ne, ne) - d_ext;

  ProjectionError err;
  err.e_int_fro = d_int.norm();
  err.e_int_max = d_int.cwiseAbs().maxCoeff();
  err.e_ext_fro = d_ext.norm();
  err.e_ext_max = d_ext.cwiseAbs().maxCoeff();
  return err;
}

void dump_triplets(const SparseMatrix& matrix, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("dump_triplets: cannot write " + path);
  char buf[96];
  for (int col = 0; col < matrix.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(matrix, col); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%ld %ld %.17g\n", static_cast<long>(it.row()),
                    static_cast<long>(it.col()), it.value());
      out << buf;
    }
  }
}

}  // namespace ncbem
