#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "ncbem/mortar.hpp"
#include "ncbem/space.hpp"

using namespace ncbem;

namespace {

constexpr double kEps = 1e-12;

bool inside_triangle(const std::array<Vec2, 3>& tri, const Vec2& p, double tol = 0.0) {
  auto side = [&](int i, int j) {
    return (tri[j] - tri[i]).x() * (p - tri[i]).y() - (tri[j] - tri[i]).y() * (p - tri[i]).x();
  };
  const double orient = (tri[1] - tri[0]).x() * (tri[2] - tri[0]).y() -
                        (tri[2] - tri[0]).x() * (tri[1] - tri[0]).y();
  const double sgn = orient >= 0 ? 1.0 : -1.0;
  return sgn * side(0, 1) >= -tol && sgn * side(1, 2) >= -tol && sgn * side(2, 0) >= -tol;
}

double triangle_area2(const std::array<Vec2, 3>& t) {
  return 0.5 * std::abs((t[1] - t[0]).x() * (t[2] - t[0]).y() -
                        (t[2] - t[0]).x() * (t[1] - t[0]).y());
}

// independent intersection-polygon construction: corner/corner containment
// plus all edge-edge crossings, convex-ordered around the centroid
std::vector<Vec2> intersection_polygon_oracle(const std::array<Vec2, 3>& a,
                                              const std::array<Vec2, 3>& b) {
  std::vector<Vec2> pts;
  const double tol = 1e-13;
  for (const Vec2& p : a) {
    if (inside_triangle(b, p, tol)) pts.push_back(p);
  }
  for (const Vec2& p : b) {
    if (inside_triangle(a, p, tol)) pts.push_back(p);
  }
  for (int i = 0; i < 3; ++i) {
    const Vec2 p1 = a[i], p2 = a[(i + 1) % 3];
    for (int j = 0; j < 3; ++j) {
      const Vec2 q1 = b[j], q2 = b[(j + 1) % 3];
      const Vec2 r = p2 - p1, s = q2 - q1;
      const double denom = r.x() * s.y() - r.y() * s.x();
      if (std::abs(denom) < 1e-15) continue;
      const Vec2 d = q1 - p1;
      const double t = (d.x() * s.y() - d.y() * s.x()) / denom;
      const double u = (d.x() * r.y() - d.y() * r.x()) / denom;
      if (t >= -tol && t <= 1 + tol && u >= -tol && u <= 1 + tol) pts.push_back(p1 + t * r);
    }
  }
  if (pts.size() < 3) return {};
  Vec2 centroid = Vec2::Zero();
  for (const Vec2& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  std::sort(pts.begin(), pts.end(), [&](const Vec2& p, const Vec2& q) {
    return std::atan2(p.y() - centroid.y(), p.x() - centroid.x()) <
           std::atan2(q.y() - centroid.y(), q.x() - centroid.x());
  });
  // drop duplicates
  std::vector<Vec2> unique;
  for (const Vec2& p : pts) {
    if (unique.empty() || (unique.back() - p).norm() > 1e-12) unique.push_back(p);
  }
  if (unique.size() > 1 && (unique.front() - unique.back()).norm() <= 1e-12) unique.pop_back();
  return unique.size() >= 3 ? unique : std::vector<Vec2>{};
}

// exact quadratic moments of a polygon via the shoelace expansion
struct PolygonMoments {
  double one = 0, x = 0, y = 0, xx = 0, xy = 0, yy = 0;
};

PolygonMoments polygon_moments(const std::vector<Vec2>& poly) {
  PolygonMoments m;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    const double cross = p.x() * q.y() - q.x() * p.y();
    m.one += cross / 2.0;
    m.x += (p.x() + q.x()) * cross / 6.0;
    m.y += (p.y() + q.y()) * cross / 6.0;
    m.xx += (p.x() * p.x() + p.x() * q.x() + q.x() * q.x()) * cross / 12.0;
    m.yy += (p.y() * p.y() + p.y() * q.y() + q.y() * q.y()) * cross / 12.0;
    m.xy += (2 * p.x() * p.y() + p.x() * q.y() + q.x() * p.y() + 2 * q.x() * q.y()) * cross / 24.0;
  }
  return m;
}

struct Affine {
  double c, dx, dy;  // value = c + dx x + dy y
  double at(const Vec2& p) const { return c + dx * p.x() + dy * p.y(); }
};

std::array<Affine, 3> hat_functions(const std::array<Vec2, 3>& tri) {
  std::array<Affine, 3> hats;
  for (int i = 0; i < 3; ++i) {
    const Vec2& a = tri[i];
    const Vec2& b = tri[(i + 1) % 3];
    const Vec2& c = tri[(i + 2) % 3];
    // affine with value 1 at a, 0 at b and c
    const double det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
    const double dx = (b.y() - c.y()) / det;
    const double dy = (c.x() - b.x()) / det;
    hats[i] = {1.0 - dx * a.x() - dy * a.y(), dx, dy};
  }
  return hats;
}

// exact cell integrals of hat_a^i hat_b^j over the intersection polygon
Eigen::Matrix3d cell_oracle(const std::array<Vec2, 3>& tri_a, const std::array<Vec2, 3>& tri_b) {
  Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
  const std::vector<Vec2> poly = intersection_polygon_oracle(tri_a, tri_b);
  if (poly.size() < 3) return out;
  PolygonMoments m = polygon_moments(poly);
  if (m.one < 0) {  // clockwise ordering
    m.one = -m.one;
    m.x = -m.x;
    m.y = -m.y;
    m.xx = -m.xx;
    m.xy = -m.xy;
    m.yy = -m.yy;
  }
  const auto ha = hat_functions(tri_a);
  const auto hb = hat_functions(tri_b);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Affine& u = ha[i];
      const Affine& v = hb[j];
      out(i, j) = u.c * v.c * m.one + (u.c * v.dx + u.dx * v.c) * m.x +
                  (u.c * v.dy + u.dy * v.c) * m.y + u.dx * v.dx * m.xx +
                  (u.dx * v.dy + u.dy * v.dx) * m.xy + u.dy * v.dy * m.yy;
    }
  }
  return out;
}

SparseMatrix mass_of(const Mesh& mesh) { return assemble_mass(P1Space(mesh)); }

}  // namespace

TEST_CASE("clip self and disjoint") {
  const std::array<Vec2, 3> tri = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  const ClipPolygon self = clip_triangles(tri, tri, kEps);
  CHECK(self.area() == doctest::Approx(0.5).epsilon(1e-14));

  const std::array<Vec2, 3> far = {Vec2(5, 5), Vec2(6, 5), Vec2(5, 6)};
  CHECK(clip_triangles(tri, far, kEps).area() == 0.0);
}

TEST_CASE("clip against monte carlo oracle") {
  // unit right triangle vs its reflection across the line x + y = 1/2,
  // parallel to the hypotenuse through the leg midpoints
  const std::array<Vec2, 3> a = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  const std::array<Vec2, 3> b = {Vec2(0.5, 0.5), Vec2(0.5, -0.5), Vec2(-0.5, 0.5)};
  const double area = clip_triangles(a, b, kEps).area();

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> dist(-0.5, 1.0);
  const long samples = 10'000'000;
  long hits = 0;
  for (long s = 0; s < samples; ++s) {
    const Vec2 p(dist(rng), dist(rng));
    if (inside_triangle(a, p) && inside_triangle(b, p)) ++hits;
  }
  const double box = 1.5 * 1.5;
  const double estimate = box * static_cast<double>(hits) / samples;
  const double p_hat = static_cast<double>(hits) / samples;
  const double sigma = box * std::sqrt(p_hat * (1.0 - p_hat) / samples);
  CHECK(std::abs(area - estimate) < 3.0 * sigma);
  CHECK(area > 0.0);
}

TEST_CASE("mortar cell basics") {
  const std::array<Vec2, 3> tri = {Vec2(0.2, 0.1), Vec2(1.3, 0.4), Vec2(0.5, 1.2)};
  const Eigen::Matrix3d self = mortar_cell(tri, tri, kEps);
  Eigen::Matrix3d expected;
  expected << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  expected *= triangle_area2(tri) / 12.0;
  CHECK((self - expected).cwiseAbs().maxCoeff() < 1e-14);

  const std::array<Vec2, 3> far = {Vec2(9, 9), Vec2(10, 9), Vec2(9, 10)};
  CHECK(mortar_cell(tri, far, kEps).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mortar cell against exact-moments oracle") {
  const std::array<Vec2, 3> a = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  // half-overlap configuration
  const std::array<Vec2, 3> half = {Vec2(0.5, -0.2), Vec2(1.2, 0.8), Vec2(-0.1, 0.9)};
  CHECK((mortar_cell(a, half, kEps) - cell_oracle(a, half)).cwiseAbs().maxCoeff() < 1e-12);

  // reflected-triangle configuration
  const std::array<Vec2, 3> mirror = {Vec2(0.5, 0.5), Vec2(0.5, -0.5), Vec2(-0.5, 0.5)};
  CHECK((mortar_cell(a, mirror, kEps) - cell_oracle(a, mirror)).cwiseAbs().maxCoeff() < 1e-12);

  // crossed diagonals: each intersection is a quarter square
  const std::array<Vec2, 3> d1 = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1)};
  const std::array<Vec2, 3> d2 = {Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
  CHECK(clip_triangles(d1, d2, kEps).area() == doctest::Approx(0.25).epsilon(1e-13));
  CHECK((mortar_cell(d1, d2, kEps) - cell_oracle(d1, d2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("conforming limit: mortar equals mass") {
  const Mesh square = generate_structured_square(4);
  const MortarMatrix mortar = assemble_mortar(square, square);
  const SparseMatrix mass = mass_of(square);
  CHECK((MatX(mortar.matrix) - MatX(mass)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(mortar.max_row_tiling_defect < 1e-12);

  const Mesh cube = generate_cube_surface(2);
  const MortarMatrix cube_mortar = assemble_mortar(cube, cube);
  CHECK((MatX(cube_mortar.matrix) - MatX(mass_of(cube))).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("crossed diagonals of the unit square") {
  Mesh a;
  a.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  a.triangles = {{0, 1, 2}, {0, 2, 3}};
  finalize_mesh(a);
  Mesh b;
  b.vertices = a.vertices;
  b.triangles = {{0, 1, 3}, {1, 2, 3}};
  finalize_mesh(b);

  const MortarMatrix mortar = assemble_mortar(a, b);
  CHECK(mortar.max_row_tiling_defect < 1e-12);
  CHECK(MatX(mortar.matrix).sum() == doctest::Approx(1.0).epsilon(1e-12));

  MatX expected = MatX::Zero(4, 4);
  auto tri2 = [&](const Mesh& m, int t) {
    return std::array<Vec2, 3>{Vec2(m.corner(t, 0).x(), m.corner(t, 0).y()),
                               Vec2(m.corner(t, 1).x(), m.corner(t, 1).y()),
                               Vec2(m.corner(t, 2).x(), m.corner(t, 2).y())};
  };
  for (int ta = 0; ta < 2; ++ta) {
    for (int tb = 0; tb < 2; ++tb) {
      CHECK(clip_triangles(tri2(a, ta), tri2(b, tb), kEps).area() ==
            doctest::Approx(0.25).epsilon(1e-12));
      const Eigen::Matrix3d cell = cell_oracle(tri2(a, ta), tri2(b, tb));
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          expected(a.triangles[ta][i], b.triangles[tb][j]) += cell(i, j);
        }
      }
    }
  }
  CHECK((MatX(mortar.matrix) - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("partition of unity and transpose consistency") {
  const Mesh coarse = generate_cube_surface(3);
  const Mesh fine = generate_cube_surface(4);
  const MortarMatrix p = assemble_mortar(coarse, fine);

  CHECK(p.max_row_tiling_defect < 1e-9);
  CHECK(p.max_col_tiling_defect < 1e-9);
  CHECK(MatX(p.matrix).sum() == doctest::Approx(6.0).epsilon(1e-9));

  const VecX p_rows = MatX(p.matrix).rowwise().sum();
  const VecX m_rows = MatX(mass_of(coarse)).rowwise().sum();
  CHECK((p_rows - m_rows).cwiseAbs().maxCoeff() < 1e-9);

  const MortarMatrix q = assemble_mortar(fine, coarse);
  CHECK((MatX(p.matrix) - MatX(q.matrix).transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("linear reproduction across meshes") {
  const Mesh coarse = generate_structured_square(3);
  const Mesh fine = generate_structured_square(5);
  const MortarMatrix p = assemble_mortar(coarse, fine);
  const MassInverse minv(mass_of(coarse));

  auto linear = [](const Vec3& x) { return 0.75 * x.x() - 1.25 * x.y() + 0.5; };
  VecX fine_coeffs(fine.vertex_count());
  for (int v = 0; v < fine.vertex_count(); ++v) fine_coeffs[v] = linear(fine.vertex(v));
  VecX coarse_coeffs(coarse.vertex_count());
  for (int v = 0; v < coarse.vertex_count(); ++v) coarse_coeffs[v] = linear(coarse.vertex(v));

  const VecX projected = minv.apply_real(p.matrix * fine_coeffs);
  CHECK((projected - coarse_coeffs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("projection error trends") {
  const Mesh base = generate_structured_square(8);
  const SparseMatrix mass_int = mass_of(base);
  const double h = base.max_edge_length();

  {
    const MortarMatrix p = assemble_mortar(base, base);
    const ProjectionError err = projection_error(mass_int, mass_int, p.matrix);
    CHECK(err.e_int_fro < 1e-10);
    CHECK(err.e_int_max < 1e-10);
    CHECK(err.e_ext_fro < 1e-10);
    CHECK(err.e_ext_max < 1e-10);
  }

  const Mesh small_sigma = perturb_nodes(base, 1e-3 * h, 5);
  const Mesh large_sigma = perturb_nodes(base, 1e-1 * h, 5);
  const ProjectionError e_small =
      projection_error(mass_int, mass_of(small_sigma), assemble_mortar(base, small_sigma).matrix);
  const ProjectionError e_large =
      projection_error(mass_int, mass_of(large_sigma), assemble_mortar(base, large_sigma).matrix);
  CHECK(e_small.e_int_fro < e_large.e_int_fro);
  CHECK(e_small.e_ext_fro < e_large.e_ext_fro);
  CHECK(e_small.e_int_max < e_large.e_int_max);

  // refining one side: interior error decreases, exterior increases
  const std::array<Vec3, 4> unit = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  const Mesh fixed = generate_screen(unit, 3, 2);  // 12 vertices
  const SparseMatrix fixed_mass = mass_of(fixed);
  double prev_int = -1.0, prev_ext = -1.0;
  for (int n : {4, 8, 16}) {
    const Mesh fine = generate_structured_square(n);
    const ProjectionError err =
        projection_error(fixed_mass, mass_of(fine), assemble_mortar(fixed, fine).matrix);
    if (prev_int >= 0.0) {
      CHECK(err.e_int_fro < prev_int);
      CHECK(err.e_ext_fro > prev_ext);
    }
    prev_int = err.e_int_fro;
    prev_ext = err.e_ext_fro;
  }
}

TEST_CASE("mortar across foam plane groups") {
  const Mesh coarse = generate_foam(2, 2);
  const Mesh fine = refine_uniform(coarse);
  const MortarMatrix p = assemble_mortar(coarse, fine);
  CHECK(p.max_row_tiling_defect < 1e-9);
  CHECK(p.max_col_tiling_defect < 1e-9);
  CHECK(MatX(p.matrix).sum() == doctest::Approx(coarse.total_area()).epsilon(1e-9));
}

TEST_CASE("unmatched patches rejected") {
  const Mesh cube = generate_cube_surface(2);
  const Mesh square = generate_structured_square(2);
  CHECK_THROWS(static_cast<void>(assemble_mortar(cube, square)));
}

TEST_CASE("triplet dump") {
  const Mesh square = generate_structured_square(2);
  const MortarMatrix p = assemble_mortar(square, square);
  const std::string path = "mortar_dump.txt";
  dump_triplets(p.matrix, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  long row, col;
  double value;
  int lines = 0;
  while (in >> row >> col >> value) {
    CHECK(row >= 0);
    CHECK(col >= 0);
    ++lines;
  }
  CHECK(lines == p.matrix.nonZeros());
  std::remove(path.c_str());
}
