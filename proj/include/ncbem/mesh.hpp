// Triangular surface meshes: generators for the benchmark geometries,
// Gmsh MSH 2.2 I/O, node perturbation, and the connectivity queries
// needed by the advancing-front mortar assembly.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ncbem/types.hpp"

namespace ncbem {

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  // Edges owned by exactly one triangle, as sorted vertex pairs.
  // Empty for closed surfaces, nonempty for open screens.
  std::vector<std::array<int, 2>> boundary_edges;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
  bool closed() const { return boundary_edges.empty(); }

  Vec3 vertex(int v) const { return vertices[static_cast<std::size_t>(v)]; }
  Vec3 corner(int t, int local) const { return vertices[static_cast<std::size_t>(triangles[static_cast<std::size_t>(t)][static_cast<std::size_t>(local)])]; }

  double triangle_area(int t) const;
  Vec3 triangle_normal(int t) const;  // unit normal per vertex orientation
  Vec3 triangle_centroid(int t) const;

  double total_area() const;
  double signed_volume() const;  // divergence theorem; > 0 for outward closed meshes
  double max_edge_length() const;  // the mesh width h
  double bbox_diagonal() const;
};

// Recomputes boundary_edges from the triangle list and checks basic sanity
// (index bounds, non-degenerate areas, each edge used by at most two
// triangles with opposite orientation). Throws std::runtime_error on defects.
void finalize_mesh(Mesh& mesh);

enum class DiagonalPattern { alternating, uniform };

// Structured mesh of [0,1]^2 in the z=0 plane with n cells per side:
// (n+1)^2 vertices, 2n^2 triangles, h = sqrt(2)/n.
Mesh generate_structured_square(int n_per_side, DiagonalPattern pattern = DiagonalPattern::alternating);

// Closed outward-oriented surface of the unit cube, n cells per edge,
// 12 n^2 triangles.
Mesh generate_cube_surface(int n_per_edge, DiagonalPattern pattern = DiagonalPattern::alternating);

// Open rectangular screen spanned by four corners (in cyclic order).
// nx cells along corner0->corner1; ny cells along corner0->corner3,
// ny <= 0 picks ny from the aspect ratio so cells stay near-square.
Mesh generate_screen(const std::array<Vec3, 4>& corners, int nx, int ny = -1,
                     DiagonalPattern pattern = DiagonalPattern::alternating);

// Acoustic foam: a base slab of nx-by-ny square cells of side base_w and
// thickness base_t, carrying one pyramid of height pyr_h per cell. Closed
// and outward oriented.
Mesh generate_foam(int nx, int ny, double base_w = 0.10, double base_t = 0.02, double pyr_h = 0.07);

// Uniform 1:4 refinement through edge midpoints.
Mesh refine_uniform(const Mesh& mesh);

// Gaussian node perturbation for a planar single-patch mesh. Inner nodes
// move in the two in-plane directions, boundary nodes only along their
// boundary segment, corner nodes stay fixed. Deterministic in the seed.
// Draws producing an inverted or degenerate triangle are rejected and
// redrawn up to 100 times per node, then an error is raised.
Mesh perturb_nodes(const Mesh& mesh, double sigma, std::uint64_t seed);

Mesh read_gmsh(const std::string& path);
void write_gmsh(const Mesh& mesh, const std::string& path);

struct PatchPlane {
  Vec3 point;
  Vec3 normal;
};

struct PlanarPatchSet {
  std::vector<std::vector<int>> patches;  // triangle indices, a partition
  std::vector<PatchPlane> planes;
};

// Maximal edge-connected sets of triangles with mutually parallel normals.
PlanarPatchSet planar_patches(const Mesh& mesh, double angle_tol = 1e-8);

// Per triangle, the neighbor across each local edge (v_e, v_{e+1}); -1 if
// the edge is a boundary edge.
std::vector<std::array<int, 3>> element_adjacency(const Mesh& mesh);

}  // namespace ncbem
