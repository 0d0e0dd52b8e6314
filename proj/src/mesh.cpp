#include "ncbem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <queue>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace ncbem {

namespace {

struct EdgeKey {
  std::uint64_t key;
  EdgeKey(int a, int b) {
    if (a > b) std::swap(a, b);
    key = (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
  }
  bool operator==(const EdgeKey& o) const { return key == o.key; }
};

struct EdgeKeyHash {
  std::size_t operator()(const EdgeKey& e) const { return std::hash<std::uint64_t>{}(e.key); }
};

}  // namespace

double Mesh::triangle_area(int t) const {
  const Vec3 a = corner(t, 0), b = corner(t, 1), c = corner(t, 2);
  return 0.5 * (b - a).cross(c - a).norm();
}

Vec3 Mesh::triangle_normal(int t) const {
  const Vec3 a = corner(t, 0), b = corner(t, 1), c = corner(t, 2);
  return (b - a).cross(c - a).normalized();
}

Vec3 Mesh::triangle_centroid(int t) const {
  return (corner(t, 0) + corner(t, 1) + corner(t, 2)) / 3.0;
}

double Mesh::total_area() const {
  double s = 0.0;
  for (int t = 0; t < triangle_count(); ++t) s += triangle_area(t);
  return s;
}

double Mesh::signed_volume() const {
  double v = 0.0;
  for (int t = 0; t < triangle_count(); ++t) {
    v += corner(t, 0).dot(corner(t, 1).cross(corner(t, 2))) / 6.0;
  }
  return v;
}

double Mesh::max_edge_length() const {
  double h = 0.0;
  for (int t = 0; t < triangle_count(); ++t) {
    for (int e = 0; e < 3; ++e) {
      h = std::max(h, (corner(t, e) - corner(t, (e + 1) % 3)).norm());
    }
  }
  return h;
}

double Mesh::bbox_diagonal() const {
  if (vertices.empty()) return 0.0;
  Vec3 lo = vertices.front(), hi = vertices.front();
  for (const Vec3& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return (hi - lo).norm();
}

void finalize_mesh(Mesh& mesh) {
  const int nv = mesh.vertex_count();
  std::unordered_map<EdgeKey, int, EdgeKeyHash> edge_use;
  std::unordered_map<std::uint64_t, int> directed;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) {
      const int a = tri[e], b = tri[(e + 1) % 3];
      if (a < 0 || a >= nv || b < 0 || b >= nv) throw std::runtime_error("mesh: triangle index out of range");
      if (a == b) throw std::runtime_error("mesh: degenerate triangle (repeated vertex)");
      edge_use[EdgeKey(a, b)] += 1;
      directed[(static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b)] += 1;
    }
  }
  const double diag2 = mesh.bbox_diagonal() * mesh.bbox_diagonal();
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    if (mesh.triangle_area(t) <= 1e-14 * diag2) throw std::runtime_error("mesh: triangle area below tolerance");
  }
  mesh.boundary_edges.clear();
  for (const auto& [edge, uses] : edge_use) {
    if (uses > 2) throw std::runtime_error("mesh: edge shared by more than two triangles");
    if (uses == 1) {
      mesh.boundary_edges.push_back({static_cast<int>(edge.key >> 32), static_cast<int>(edge.key & 0xffffffffu)});
    }
  }
  std::sort(mesh.boundary_edges.begin(), mesh.boundary_edges.end());
  if (mesh.boundary_edges.empty()) {
    // closed surface: each interior edge must be walked once per direction
    for (const auto& [key, uses] : directed) {
      if (uses != 1) throw std::runtime_error("mesh: inconsistent orientation on closed surface");
    }
  }
}

namespace {

Mesh structured_rect(const Vec3& origin, const Vec3& e1, const Vec3& e2, int nx, int ny,
                     DiagonalPattern pattern) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("structured mesh: resolution must be >= 1");
  Mesh m;
  m.vertices.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      m.vertices.push_back(origin + (static_cast<double>(i) / nx) * e1 + (static_cast<double>(j) / ny) * e2);
    }
  }
  auto idx = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = idx(i, j), v10 = idx(i + 1, j), v01 = idx(i, j + 1), v11 = idx(i + 1, j + 1);
      const bool flip = (pattern == DiagonalPattern::alternating) && (((i + j) % 2) == 1);
      if (!flip) {
        m.triangles.push_back({v00, v10, v11});
        m.triangles.push_back({v00, v11, v01});
      } else {
        m.triangles.push_back({v00, v10, v01});
        m.triangles.push_back({v10, v11, v01});
      }
    }
  }
  finalize_mesh(m);
  return m;
}

}  // namespace

Mesh generate_structured_square(int n_per_side, DiagonalPattern pattern) {
  return structured_rect(Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(), n_per_side, n_per_side, pattern);
}

Mesh generate_screen(const std::array<Vec3, 4>& corners, int nx, int ny, DiagonalPattern pattern) {
  const Vec3 e1 = corners[1] - corners[0];
  const Vec3 e2 = corners[3] - corners[0];
  const double scale = std::max(e1.norm(), e2.norm());
  if (scale < 1e-14 || e1.norm() < 1e-14 * scale || e2.norm() < 1e-14 * scale) {
    throw std::invalid_argument("screen: degenerate corners");
  }
  if ((corners[2] - (corners[0] + e1 + e2)).norm() > 1e-10 * scale ||
      std::abs(e1.dot(e2)) > 1e-10 * e1.norm() * e2.norm()) {
    throw std::invalid_argument("screen: corners are not a planar rectangle");
  }
  if (ny <= 0) ny = std::max(1, static_cast<int>(std::lround(nx * e2.norm() / e1.norm())));
  return structured_rect(corners[0], e1, e2, nx, ny, pattern);
}

namespace {

// Welds vertices on an integer key so shared face/edge nodes coincide exactly.
class VertexWelder {
 public:
  explicit VertexWelder(Mesh& mesh) : mesh_(mesh) {}

  int at(int i, int j, int k, const Vec3& position) {
    const std::uint64_t key = pack(i, j, k);
    auto it = map_.find(key);
    if (it != map_.end()) return it->second;
    const int id = mesh_.vertex_count();
    mesh_.vertices.push_back(position);
    map_.emplace(key, id);
    return id;
  }

 private:
  static std::uint64_t pack(int i, int j, int k) {
    auto u = [](int x) { return static_cast<std::uint64_t>(static_cast<std::uint32_t>(x + (1 << 20))) & 0x1fffffu; };
    return (u(i) << 42) | (u(j) << 21) | u(k);
  }
  Mesh& mesh_;
  std::unordered_map<std::uint64_t, int> map_;
};

}  // namespace

Mesh generate_cube_surface(int n, DiagonalPattern pattern) {
  if (n < 1) throw std::invalid_argument("cube: resolution must be >= 1");
  Mesh m;
  VertexWelder weld(m);
  auto grid_vertex = [&](int i, int j, int k) {
    return weld.at(i, j, k, Vec3(static_cast<double>(i) / n, static_cast<double>(j) / n, static_cast<double>(k) / n));
  };
  // face(axis, level, outward sign): grid over the two remaining axes in a
  // right-handed frame (axis+1, axis+2, axis), so default winding faces +axis
  auto face = [&](int axis, int level, bool positive) {
    auto at = [&](int a, int b) {
      int c[3];
      c[axis] = level;
      c[(axis + 1) % 3] = a;
      c[(axis + 2) % 3] = b;
      return grid_vertex(c[0], c[1], c[2]);
    };
    auto emit = [&](int a, int b, int c) {
      if (positive) {
        m.triangles.push_back({a, b, c});
      } else {
        m.triangles.push_back({a, c, b});
      }
    };
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const int v00 = at(i, j), v10 = at(i + 1, j), v01 = at(i, j + 1), v11 = at(i + 1, j + 1);
        const bool flip = (pattern == DiagonalPattern::alternating) && (((i + j) % 2) == 1);
        if (!flip) {
          emit(v00, v10, v11);
          emit(v00, v11, v01);
        } else {
          emit(v00, v10, v01);
          emit(v10, v11, v01);
        }
      }
    }
  };
  for (int axis = 0; axis < 3; ++axis) {
    face(axis, n, true);
    face(axis, 0, false);
  }
  finalize_mesh(m);
  return m;
}

Mesh generate_foam(int nx, int ny, double base_w, double base_t, double pyr_h) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("foam: pyramid counts must be >= 1");
  if (base_w <= 0 || base_t <= 0 || pyr_h <= 0) throw std::invalid_argument("foam: dimensions must be positive");
  Mesh m;
  VertexWelder weld(m);
  const double half = base_w / 2.0;
  // z levels: 0 bottom, 1 top of slab, 2 pyramid apex; x/y on the half-cell
  // lattice so apexes land on cell centers
  const double zlevel[3] = {0.0, base_t, base_t + pyr_h};
  auto vtx = [&](int i2, int j2, int zl) {
    return weld.at(i2, j2, zl, Vec3(i2 * half, j2 * half, zlevel[zl]));
  };
  auto tri = [&](int a, int b, int c) { m.triangles.push_back({a, b, c}); };

  // bottom, outward -z
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = vtx(2 * i, 2 * j, 0), v10 = vtx(2 * i + 2, 2 * j, 0);
      const int v01 = vtx(2 * i, 2 * j + 2, 0), v11 = vtx(2 * i + 2, 2 * j + 2, 0);
      tri(v00, v11, v10);
      tri(v00, v01, v11);
    }
  }
  // side walls: boundary edges walked counterclockwise seen from +z, so
  // (edge direction) x (+z lift) faces outward
  auto wall = [&](int i2a, int j2a, int i2b, int j2b) {
    const int b0 = vtx(i2a, j2a, 0), b1 = vtx(i2b, j2b, 0);
    const int t0 = vtx(i2a, j2a, 1), t1 = vtx(i2b, j2b, 1);
    tri(b0, b1, t1);
    tri(b0, t1, t0);
  };
  for (int i = 0; i < nx; ++i) {
    wall(2 * i, 0, 2 * i + 2, 0);
    wall(2 * (nx - i), 2 * ny, 2 * (nx - i) - 2, 2 * ny);
  }
  for (int j = 0; j < ny; ++j) {
    wall(2 * nx, 2 * j, 2 * nx, 2 * j + 2);
    wall(0, 2 * (ny - j), 0, 2 * (ny - j) - 2);
  }
  // one pyramid per cell, apex above the cell center
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int c00 = vtx(2 * i, 2 * j, 1), c10 = vtx(2 * i + 2, 2 * j, 1);
      const int c01 = vtx(2 * i, 2 * j + 2, 1), c11 = vtx(2 * i + 2, 2 * j + 2, 1);
      const int apex = vtx(2 * i + 1, 2 * j + 1, 2);
      tri(c00, c10, apex);
      tri(c10, c11, apex);
      tri(c11, c01, apex);
      tri(c01, c00, apex);
    }
  }
  finalize_mesh(m);
  if (!m.closed()) throw std::runtime_error("foam: generated mesh is not watertight");
  return m;
}

Mesh refine_uniform(const Mesh& mesh) {
  Mesh out;
  out.vertices = mesh.vertices;
  std::unordered_map<EdgeKey, int, EdgeKeyHash> midpoint;
  auto mid = [&](int a, int b) {
    const EdgeKey key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int id = out.vertex_count();
    out.vertices.push_back(0.5 * (mesh.vertex(a) + mesh.vertex(b)));
    midpoint.emplace(key, id);
    return id;
  };
  for (const auto& tri : mesh.triangles) {
    const int a = tri[0], b = tri[1], c = tri[2];
    const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
    out.triangles.push_back({a, ab, ca});
    out.triangles.push_back({ab, b, bc});
    out.triangles.push_back({ca, bc, c});
    out.triangles.push_back({ab, bc, ca});
  }
  finalize_mesh(out);
  return out;
}

namespace {

// Deterministic standard normals via Box-Muller on the raw mt19937_64 stream
// (std::normal_distribution is implementation-defined).
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}
  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 1e-300);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  double uniform() { return (rng_() >> 11) * (1.0 / 9007199254740992.0); }
  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace

Mesh perturb_nodes(const Mesh& mesh, double sigma, std::uint64_t seed) {
  if (sigma < 0) throw std::invalid_argument("perturb_nodes: sigma must be >= 0");
  Mesh out = mesh;
  if (sigma == 0.0 || mesh.triangle_count() == 0) return out;
  if (mesh.closed()) throw std::invalid_argument("perturb_nodes: requires a planar mesh with a boundary");

  const Vec3 normal = mesh.triangle_normal(0);
  for (int t = 1; t < mesh.triangle_count(); ++t) {
    if (std::abs(mesh.triangle_normal(t).dot(normal) - 1.0) > 1e-10) {
      throw std::invalid_argument("perturb_nodes: mesh is not a single planar patch");
    }
  }
  const Vec3 u = normal.unitOrthogonal();
  const Vec3 v = normal.cross(u);

  // node roles from boundary edges: two non-collinear boundary edges mark a
  // corner; one direction marks a slidable boundary node
  const int nv = mesh.vertex_count();
  std::vector<std::vector<int>> bnd_nbrs(nv);
  for (const auto& e : mesh.boundary_edges) {
    bnd_nbrs[e[0]].push_back(e[1]);
    bnd_nbrs[e[1]].push_back(e[0]);
  }
  enum class Role { inner, boundary, corner };
  std::vector<Role> role(nv, Role::inner);
  std::vector<Vec3> slide(nv, Vec3::Zero());
  for (int n = 0; n < nv; ++n) {
    const auto& others = bnd_nbrs[n];
    if (others.empty()) continue;
    const Vec3 d0 = (mesh.vertex(others[0]) - mesh.vertex(n)).normalized();
    bool corner = false;
    for (std::size_t i = 1; i < others.size(); ++i) {
      const Vec3 di = (mesh.vertex(others[i]) - mesh.vertex(n)).normalized();
      if (std::abs(std::abs(di.dot(d0)) - 1.0) > 1e-10) corner = true;
    }
    role[n] = corner ? Role::corner : Role::boundary;
    slide[n] = d0;
  }

  std::vector<std::vector<int>> star(nv);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    for (int e = 0; e < 3; ++e) star[mesh.triangles[t][e]].push_back(t);
  }
  const double min_area = 1e-14 * mesh.bbox_diagonal() * mesh.bbox_diagonal();

  GaussianStream gauss(seed);
  for (int n = 0; n < nv; ++n) {
    if (role[n] == Role::corner) continue;
    const Vec3 original = out.vertex(n);
    bool placed = false;
    for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
      Vec3 candidate;
      if (role[n] == Role::inner) {
        candidate = original + sigma * gauss.next() * u + sigma * gauss.next() * v;
      } else {
        candidate = original + sigma * gauss.next() * slide[n];
      }
      out.vertices[n] = candidate;
      placed = true;
      for (int t : star[n]) {
        const Vec3 a = out.corner(t, 0), b = out.corner(t, 1), c = out.corner(t, 2);
        const Vec3 cr = (b - a).cross(c - a);
        if (cr.dot(normal) <= 0.0 || 0.5 * cr.norm() <= min_area) {
          placed = false;
          break;
        }
      }
      if (!placed) out.vertices[n] = original;
    }
    if (!placed) throw std::runtime_error("perturb_nodes: could not place node after 100 redraws");
  }
  return out;
}

Mesh read_gmsh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("gmsh: cannot open " + path);
  Mesh mesh;
  std::string line;
  std::map<long, int> id_map;
  bool saw_nodes = false, saw_elements = false;
  auto expect_tail = [&](const char* tag) {
    std::getline(in, line);  // rest of current line
    std::getline(in, line);
    if (line.rfind(tag, 0) != 0) throw std::runtime_error(std::string("gmsh: malformed section, expected ") + tag);
  };
  while (std::getline(in, line)) {
    if (line.rfind("$MeshFormat", 0) == 0) {
      double version = 0.0;
      int file_type = 0, data_size = 0;
      if (!(in >> version >> file_type >> data_size)) throw std::runtime_error("gmsh: malformed $MeshFormat");
      if (std::abs(version - 2.2) > 1e-9 || file_type != 0) {
        throw std::runtime_error("gmsh: only ASCII MSH 2.2 is supported");
      }
      expect_tail("$EndMeshFormat");
    } else if (line.rfind("$Nodes", 0) == 0) {
      long count = 0;
      if (!(in >> count) || count < 0) throw std::runtime_error("gmsh: malformed $Nodes section");
      mesh.vertices.reserve(count);
      for (long i = 0; i < count; ++i) {
        long id;
        double x, y, z;
        if (!(in >> id >> x >> y >> z)) throw std::runtime_error("gmsh: malformed node line");
        id_map[id] = mesh.vertex_count();
        mesh.vertices.push_back(Vec3(x, y, z));
      }
      expect_tail("$EndNodes");
      saw_nodes = true;
    } else if (line.rfind("$Elements", 0) == 0) {
      long count = 0;
      if (!(in >> count) || count < 0) throw std::runtime_error("gmsh: malformed $Elements section");
      for (long i = 0; i < count; ++i) {
        long id;
        int type, ntags;
        if (!(in >> id >> type >> ntags)) throw std::runtime_error("gmsh: malformed element line");
        if (type != 2) throw std::runtime_error("gmsh: unsupported element type " + std::to_string(type));
        long tag;
        for (int tg = 0; tg < ntags; ++tg) in >> tag;
        long a, b, c;
        if (!(in >> a >> b >> c)) throw std::runtime_error("gmsh: malformed element line");
        auto lookup = [&](long nid) {
          auto it = id_map.find(nid);
          if (it == id_map.end()) throw std::runtime_error("gmsh: element references unknown node");
          return it->second;
        };
        mesh.triangles.push_back({lookup(a), lookup(b), lookup(c)});
      }
      expect_tail("$EndElements");
      saw_elements = true;
    }
  }
  if (!saw_nodes || !saw_elements) throw std::runtime_error("gmsh: missing $Nodes or $Elements section");
  finalize_mesh(mesh);
  return mesh;
}

void write_gmsh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("gmsh: cannot write " + path);
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
  out << "$Nodes\n" << mesh.vertex_count() << "\n";
  char buf[160];
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const Vec3& p = mesh.vertex(v);
    std::snprintf(buf, sizeof(buf), "%d %.17g %.17g %.17g\n", v + 1, p.x(), p.y(), p.z());
    out << buf;
  }
  out << "$EndNodes\n$Elements\n" << mesh.triangle_count() << "\n";
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    out << (t + 1) << " 2 2 0 0 " << (tri[0] + 1) << ' ' << (tri[1] + 1) << ' ' << (tri[2] + 1) << "\n";
  }
  out << "$EndElements\n";
}

std::vector<std::array<int, 3>> element_adjacency(const Mesh& mesh) {
  std::vector<std::array<int, 3>> nbr(mesh.triangle_count(), {-1, -1, -1});
  std::unordered_map<EdgeKey, std::pair<int, int>, EdgeKeyHash> first_use;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) {
      const EdgeKey key(tri[e], tri[(e + 1) % 3]);
      auto it = first_use.find(key);
      if (it == first_use.end()) {
        first_use.emplace(key, std::make_pair(t, e));
      } else {
        nbr[t][e] = it->second.first;
        nbr[it->second.first][it->second.second] = t;
      }
    }
  }
  return nbr;
}

PlanarPatchSet planar_patches(const Mesh& mesh, double angle_tol) {
  const auto adjacency = element_adjacency(mesh);
  PlanarPatchSet set;
  std::vector<int> patch_of(mesh.triangle_count(), -1);
  for (int seed = 0; seed < mesh.triangle_count(); ++seed) {
    if (patch_of[seed] >= 0) continue;
    const int patch_id = static_cast<int>(set.patches.size());
    const Vec3 ref = mesh.triangle_normal(seed);
    std::vector<int> members;
    std::queue<int> frontier;
    frontier.push(seed);
    patch_of[seed] = patch_id;
    while (!frontier.empty()) {
      const int t = frontier.front();
      frontier.pop();
      members.push_back(t);
      for (int e = 0; e < 3; ++e) {
        const int n = adjacency[t][e];
        if (n < 0 || patch_of[n] >= 0) continue;
        if (std::abs(mesh.triangle_normal(n).dot(ref) - 1.0) < angle_tol) {
          patch_of[n] = patch_id;
          frontier.push(n);
        }
      }
    }
    std::sort(members.begin(), members.end());
    Vec3 avg = Vec3::Zero();
    for (int t : members) avg += mesh.triangle_area(t) * mesh.triangle_normal(t);
    set.patches.push_back(std::move(members));
    set.planes.push_back({mesh.triangle_centroid(seed), avg.normalized()});
  }
  return set;
}

}  // namespace ncbem
