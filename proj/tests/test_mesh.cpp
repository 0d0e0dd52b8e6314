#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <map>
#include <set>

#include "ncbem/mesh.hpp"

using namespace ncbem;

namespace {

// O(T^2) shared-edge scan, the reference for element_adjacency
std::vector<std::array<int, 3>> brute_force_adjacency(const Mesh& mesh) {
  std::vector<std::array<int, 3>> nbr(mesh.triangle_count(), {-1, -1, -1});
  auto edge_of = [&](int t, int e) {
    int a = mesh.triangles[t][e], b = mesh.triangles[t][(e + 1) % 3];
    if (a > b) std::swap(a, b);
    return std::make_pair(a, b);
  };
  for (int s = 0; s < mesh.triangle_count(); ++s) {
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      if (s == t) continue;
      for (int es = 0; es < 3; ++es) {
        for (int et = 0; et < 3; ++et) {
          if (edge_of(s, es) == edge_of(t, et)) nbr[s][es] = t;
        }
      }
    }
  }
  return nbr;
}

// normal clustering over exact plane keys, the reference for planar_patches
std::size_t brute_force_facet_count(const Mesh& mesh) {
  std::vector<int> facet_of(mesh.triangle_count(), -1);
  std::vector<std::pair<Vec3, double>> facets;  // (normal, offset)
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Vec3 n = mesh.triangle_normal(t);
    const double d = n.dot(mesh.triangle_centroid(t));
    bool found = false;
    for (std::size_t f = 0; f < facets.size(); ++f) {
      if ((facets[f].first - n).norm() < 1e-9 && std::abs(facets[f].second - d) < 1e-9) {
        facet_of[t] = static_cast<int>(f);
        found = true;
        break;
      }
    }
    if (!found) {
      facet_of[t] = static_cast<int>(facets.size());
      facets.emplace_back(n, d);
    }
  }
  // split coplanar facets into edge-connected components
  const auto adjacency = element_adjacency(mesh);
  std::vector<int> comp(mesh.triangle_count(), -1);
  int ncomp = 0;
  for (int seed = 0; seed < mesh.triangle_count(); ++seed) {
    if (comp[seed] >= 0) continue;
    std::vector<int> stack{seed};
    comp[seed] = ncomp;
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      for (int e = 0; e < 3; ++e) {
        const int n = adjacency[t][e];
        if (n >= 0 && comp[n] < 0 && facet_of[n] == facet_of[t]) {
          comp[n] = ncomp;
          stack.push_back(n);
        }
      }
    }
    ++ncomp;
  }
  return ncomp;
}

}  // namespace

TEST_CASE("structured square basics") {
  const Mesh m1 = generate_structured_square(1, DiagonalPattern::uniform);
  CHECK(m1.vertex_count() == 4);
  CHECK(m1.triangle_count() == 2);
  CHECK(m1.total_area() == doctest::Approx(1.0).epsilon(1e-14));

  const Mesh m2 = generate_structured_square(2);
  CHECK(m2.vertex_count() == 9);
  CHECK(m2.triangle_count() == 8);
  for (int t = 0; t < m2.triangle_count(); ++t) {
    CHECK(m2.triangle_area(t) == doctest::Approx(0.125).epsilon(1e-13));
  }

  // vertex-count law of the structured family
  for (int n : {3, 10, 38}) {
    const Mesh m = generate_structured_square(n);
    CHECK(m.vertex_count() == (n + 1) * (n + 1));
    CHECK(m.triangle_count() == 2 * n * n);
    CHECK(m.max_edge_length() == doctest::Approx(std::sqrt(2.0) / n).epsilon(1e-12));
  }
}

TEST_CASE("cube surface closed and oriented") {
  const Mesh c1 = generate_cube_surface(1);
  CHECK(c1.vertex_count() == 8);
  CHECK(c1.triangle_count() == 12);
  CHECK(c1.closed());
  CHECK(c1.signed_volume() == doctest::Approx(1.0).epsilon(1e-13));

  const Mesh c2 = generate_cube_surface(2);
  CHECK(c2.total_area() == doctest::Approx(6.0).epsilon(1e-12));
  const Vec3 center(0.5, 0.5, 0.5);
  for (int t = 0; t < c2.triangle_count(); ++t) {
    CHECK((c2.triangle_centroid(t) - center).dot(c2.triangle_normal(t)) > 0.0);
  }

  // resolution for h <= lambda/6 with lambda = 0.3 requires n >= 29
  const Mesh c29 = generate_cube_surface(29);
  CHECK(c29.max_edge_length() <= 0.05);
  CHECK(generate_cube_surface(28).max_edge_length() > 0.05);
  CHECK(c29.triangle_count() == 12 * 29 * 29);
}

TEST_CASE("screen generation") {
  const std::array<Vec3, 4> unit = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  const Mesh s1 = generate_screen(unit, 1);
  CHECK(s1.triangle_count() == 2);
  CHECK(s1.boundary_edges.size() == 4);
  CHECK_FALSE(s1.closed());

  // benchmark screen: 2.0616 x 2 rectangle
  const std::array<Vec3, 4> corners = {Vec3(-0.25, -1, -1), Vec3(0.25, 1, -1), Vec3(0.25, 1, 1),
                                       Vec3(-0.25, -1, 1)};
  const Mesh screen = generate_screen(corners, 10);
  const double exact_area = std::sqrt(0.25 + 4.0) * 2.0;
  CHECK(screen.total_area() == doctest::Approx(exact_area).epsilon(1e-12));
  CHECK(exact_area == doctest::Approx(4.1231056256176605).epsilon(1e-12));

  const std::array<Vec3, 4> degenerate = {Vec3(0, 0, 0), Vec3(0, 0, 0), Vec3(1, 1, 0),
                                          Vec3(0, 1, 0)};
  CHECK_THROWS(generate_screen(degenerate, 2));
  const std::array<Vec3, 4> skew = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0.3), Vec3(0, 1, 0)};
  CHECK_THROWS(generate_screen(skew, 2));
}

TEST_CASE("foam volumes and watertightness") {
  const Mesh f1 = generate_foam(1, 1);
  CHECK(f1.closed());
  const double slab = 0.1 * 0.1 * 0.02;
  const double pyramid = 0.1 * 0.1 * 0.07 / 3.0;
  CHECK(f1.signed_volume() == doctest::Approx(slab + pyramid).epsilon(1e-10));

  const Mesh f2 = generate_foam(2, 2);
  CHECK(f2.closed());
  CHECK(f2.signed_volume() == doctest::Approx(0.2 * 0.2 * 0.02 + 4.0 * pyramid).epsilon(1e-10));
  for (int t = 0; t < f2.triangle_count(); ++t) CHECK(f2.triangle_area(t) > 0.0);
}

TEST_CASE("closed-mesh volume identity") {
  CHECK(generate_cube_surface(3).signed_volume() == doctest::Approx(1.0).epsilon(1e-10));
  const double foam_volume = 0.1 * 0.1 * 0.02 + 0.1 * 0.1 * 0.07 / 3.0;
  CHECK(generate_foam(1, 1).signed_volume() == doctest::Approx(foam_volume).epsilon(1e-10));
}

TEST_CASE("element adjacency") {
  const Mesh cube = generate_cube_surface(1);
  const auto nbr = element_adjacency(cube);
  for (int t = 0; t < cube.triangle_count(); ++t) {
    for (int e = 0; e < 3; ++e) CHECK(nbr[t][e] >= 0);
  }

  const std::array<Vec3, 4> unit = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  const Mesh screen = generate_screen(unit, 1);
  const auto snbr = element_adjacency(screen);
  int neighbor_count = 0;
  for (int e = 0; e < 3; ++e) {
    if (snbr[0][e] >= 0) ++neighbor_count;
  }
  CHECK(neighbor_count == 1);

  const Mesh foam = generate_foam(1, 1);
  const auto fast = element_adjacency(foam);
  const auto brute = brute_force_adjacency(foam);
  CHECK(fast == brute);
  // symmetry
  for (int t = 0; t < foam.triangle_count(); ++t) {
    for (int e = 0; e < 3; ++e) {
      const int n = fast[t][e];
      if (n < 0) continue;
      bool back = false;
      for (int f = 0; f < 3; ++f) back = back || fast[n][f] == t;
      CHECK(back);
    }
  }
}

TEST_CASE("planar patches") {
  const Mesh cube = generate_cube_surface(4);
  const PlanarPatchSet patches = planar_patches(cube);
  CHECK(patches.patches.size() == 6);
  for (const auto& p : patches.patches) CHECK(p.size() == 32);

  const Mesh flat = generate_structured_square(3);
  CHECK(planar_patches(flat).patches.size() == 1);

  const Mesh foam = generate_foam(1, 1);
  CHECK(planar_patches(foam).patches.size() == brute_force_facet_count(foam));

  // patch count is refinement invariant
  const Mesh cube_fine = refine_uniform(cube);
  CHECK(planar_patches(cube_fine).patches.size() == 6);
  const std::array<Vec3, 4> unit = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  const Mesh screen = generate_screen(unit, 2);
  CHECK(planar_patches(screen).patches.size() == planar_patches(refine_uniform(screen)).patches.size());
}

TEST_CASE("uniform refinement") {
  const Mesh cube = generate_cube_surface(2);
  const Mesh fine = refine_uniform(cube);
  CHECK(fine.triangle_count() == 4 * cube.triangle_count());
  CHECK(fine.closed());
  CHECK(fine.total_area() == doctest::Approx(cube.total_area()).epsilon(1e-12));
  CHECK(fine.signed_volume() == doctest::Approx(cube.signed_volume()).epsilon(1e-12));
  CHECK(fine.max_edge_length() == doctest::Approx(0.5 * cube.max_edge_length()).epsilon(1e-12));
}

TEST_CASE("node perturbation") {
  const Mesh base = generate_structured_square(6);
  const double h = base.max_edge_length();

  const Mesh zero = perturb_nodes(base, 0.0, 42);
  CHECK(zero.vertices == base.vertices);

  const Mesh a = perturb_nodes(base, 0.05 * h, 42);
  const Mesh b = perturb_nodes(base, 0.05 * h, 42);
  for (int v = 0; v < base.vertex_count(); ++v) {
    CHECK(a.vertex(v).x() == b.vertex(v).x());
    CHECK(a.vertex(v).y() == b.vertex(v).y());
    CHECK(a.vertex(v).z() == b.vertex(v).z());
  }
  CHECK(perturb_nodes(base, 0.05 * h, 43).vertices != a.vertices);

  // corners fixed, boundary slides along the boundary, covered square kept
  std::set<int> boundary_vertices;
  for (const auto& e : base.boundary_edges) {
    boundary_vertices.insert(e[0]);
    boundary_vertices.insert(e[1]);
  }
  for (int v = 0; v < base.vertex_count(); ++v) {
    const Vec3 p0 = base.vertex(v), p1 = a.vertex(v);
    const bool corner = (std::abs(p0.x()) < 1e-14 || std::abs(p0.x() - 1) < 1e-14) &&
                        (std::abs(p0.y()) < 1e-14 || std::abs(p0.y() - 1) < 1e-14);
    if (corner) {
      CHECK((p1 - p0).norm() == 0.0);
    } else if (boundary_vertices.count(v)) {
      const bool on_x = std::abs(p0.y()) < 1e-14 || std::abs(p0.y() - 1) < 1e-14;
      if (on_x) {
        CHECK(p1.y() == p0.y());
      } else {
        CHECK(p1.x() == p0.x());
      }
    }
    CHECK(p1.z() == 0.0);
  }
  CHECK(a.total_area() == doctest::Approx(1.0).epsilon(1e-10));  // union of planar triangles
}

TEST_CASE("gmsh round trip and errors") {
  const Mesh cube = generate_cube_surface(2);
  const std::string path = "test_roundtrip.msh";
  write_gmsh(cube, path);
  const Mesh back = read_gmsh(path);
  CHECK(back.vertex_count() == cube.vertex_count());
  CHECK(back.triangles == cube.triangles);
  for (int v = 0; v < cube.vertex_count(); ++v) {
    CHECK(back.vertex(v) == cube.vertex(v));
  }
  std::remove(path.c_str());

  // quadrilateral element type rejected
  {
    std::ofstream bad("test_bad_elem.msh");
    bad << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 1 1 0\n4 0 1 0\n"
        << "$EndNodes\n$Elements\n1\n1 3 2 0 0 1 2 3 4\n$EndElements\n";
  }
  CHECK_THROWS_WITH_AS(static_cast<void>(read_gmsh("test_bad_elem.msh")),
                       doctest::Contains("unsupported element type"), std::runtime_error);
  std::remove("test_bad_elem.msh");

  CHECK_THROWS(static_cast<void>(read_gmsh("does_not_exist.msh")));
  {
    std::ofstream bad("test_malformed.msh");
    bad << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\nnot_a_number\n";
  }
  CHECK_THROWS(static_cast<void>(read_gmsh("test_malformed.msh")));
  std::remove("test_malformed.msh");
}
