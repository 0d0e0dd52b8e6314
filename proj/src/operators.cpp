#include "ncbem/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ncbem/parallel.hpp"
#include "ncbem/quadrature.hpp"

namespace ncbem {

Wavenumber::Wavenumber(Complex value) : k(value) {
  if (!(k.real() > 0.0) || k.imag() < 0.0) {
    throw std::invalid_argument("Wavenumber: requires Re(k) > 0 and Im(k) >= 0");
  }
}

Wavenumber Wavenumber::from_frequency(double f, const MediumParams& medium) {
  if (f <= 0.0 || medium.c <= 0.0 || medium.rho <= 0.0 || medium.alpha < 0.0 || medium.f_alpha <= 0.0) {
    throw std::invalid_argument("Wavenumber: invalid physical parameters");
  }
  return Wavenumber(Complex(2.0 * M_PI * f / medium.c, medium.alpha * f / medium.f_alpha));
}

Complex green(Complex k, const Vec3& x, const Vec3& y) {
  const double r = (x - y).norm();
  if (r == 0.0) throw std::invalid_argument("green: coincident points");
  return std::exp(imag_unit * k * r) / (4.0 * M_PI * r);
}

namespace {

constexpr double kFourPi = 4.0 * M_PI;

// e^{ikr}/(4 pi r) with complex k, split for speed
inline Complex green_scalar(Complex k, double r) {
  const double damp = std::exp(-k.imag() * r) / (kFourPi * r);
  const double phase = k.real() * r;
  return Complex(damp * std::cos(phase), damp * std::sin(phase));
}

struct TriangleData {
  std::vector<Vec3> qpt;      // ntri x nq physical rule points
  std::vector<double> qw;     // rule weight x 2A, sums to the area
  std::vector<Vec3> normal;   // per triangle
  std::vector<double> area;
  std::vector<Vec3> curl;     // ntri x 3 surface curls of the local hats
  int nq = 0;
};

TriangleData precompute(const Mesh& mesh, const TriangleRule& rule) {
  TriangleData data;
  const int nt = mesh.triangle_count();
  data.nq = static_cast<int>(rule.points.size());
  data.qpt.resize(nt * data.nq);
  data.qw.resize(nt * data.nq);
  data.normal.resize(nt);
  data.area.resize(nt);
  data.curl.resize(nt * 3);
  for (int t = 0; t < nt; ++t) {
    const Vec3 a = mesh.corner(t, 0), b = mesh.corner(t, 1), c = mesh.corner(t, 2);
    const double area = mesh.triangle_area(t);
    data.area[t] = area;
    data.normal[t] = mesh.triangle_normal(t);
    // curl_G hat_i = (v_{i+1} - v_{i+2}) / (2A) for counterclockwise (a,b,c)
    data.curl[3 * t + 0] = (b - c) / (2.0 * area);
    data.curl[3 * t + 1] = (c - a) / (2.0 * area);
    data.curl[3 * t + 2] = (a - b) / (2.0 * area);
    for (int q = 0; q < data.nq; ++q) {
      const Vec3& bary = rule.points[q];
      data.qpt[t * data.nq + q] = bary[0] * a + bary[1] * b + bary[2] * c;
      data.qw[t * data.nq + q] = rule.weights[q] * 2.0 * area;
    }
  }
  return data;
}

// Orders the shared vertices first, in matched order, for the singular
// rules. Shared vertices are sorted by global index so that the pair (b,a)
// receives exactly the role-swapped parametrisation of (a,b).
void shared_vertex_permutation(const std::array<int, 3>& ta, const std::array<int, 3>& tb,
                               int perm_a[3], int perm_b[3], int& shared) {
  shared = 0;
  bool used_a[3] = {false, false, false};
  bool used_b[3] = {false, false, false};
  std::array<std::array<int, 3>, 3> matches;  // (global, local a, local b)
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (ta[i] == tb[j]) {
        matches[shared] = {ta[i], i, j};
        used_a[i] = used_b[j] = true;
        ++shared;
        break;
      }
    }
  }
  std::sort(matches.begin(), matches.begin() + shared);
  for (int s = 0; s < shared; ++s) {
    perm_a[s] = matches[s][1];
    perm_b[s] = matches[s][2];
  }
  int na = shared, nb = shared;
  for (int i = 0; i < 3; ++i) {
    if (!used_a[i]) perm_a[na++] = i;
    if (!used_b[i]) perm_b[nb++] = i;
  }
}

struct LocalBlocks {
  Complex sl[9], dl[9], ad[9];
  Complex s0;  // plain kernel integral, for the curl-curl part of HS
  void reset() {
    for (int i = 0; i < 9; ++i) sl[i] = dl[i] = ad[i] = Complex(0, 0);
    s0 = Complex(0, 0);
  }
};

struct KindMask {
  bool sl = false, dl = false, ad = false, hs = false;
  bool needs_gs1() const { return sl || hs; }
};

}  // namespace

std::map<OperatorKind, DenseOperator> assemble_operators(const std::vector<OperatorKind>& kinds,
                                                         const P1Space& test_space,
                                                         const P1Space& trial_space, Complex k,
                                                         const AssemblyOptions& options) {
  if (&test_space.mesh() != &trial_space.mesh()) {
    throw std::invalid_argument("assemble_operators: test and trial spaces must share one mesh");
  }
  if (kinds.empty()) throw std::invalid_argument("assemble_operators: no kinds requested");
  const Mesh& mesh = test_space.mesh();
  const int nt = mesh.triangle_count();
  const int rows = test_space.dof_count();
  const int cols = trial_space.dof_count();

  KindMask mask;
  std::map<OperatorKind, DenseOperator> result;
  for (OperatorKind kind : kinds) {
    if (result.count(kind)) continue;
    result.emplace(kind, DenseOperator{kind, k, MatXc::Zero(rows, cols)});
    switch (kind) {
      case OperatorKind::single_layer: mask.sl = true; break;
      case OperatorKind::double_layer: mask.dl = true; break;
      case OperatorKind::adjoint_double_layer: mask.ad = true; break;
      case OperatorKind::hypersingular: mask.hs = true; break;
    }
  }
  MatXc* m_sl = mask.sl ? &result.at(OperatorKind::single_layer).matrix : nullptr;
  MatXc* m_dl = mask.dl ? &result.at(OperatorKind::double_layer).matrix : nullptr;
  MatXc* m_ad = mask.ad ? &result.at(OperatorKind::adjoint_double_layer).matrix : nullptr;
  MatXc* m_hs = mask.hs ? &result.at(OperatorKind::hypersingular).matrix : nullptr;

  const TriangleRule& rule = triangle_rule(options.regular_order);
  const TriangleData data = precompute(mesh, rule);
  const int nq = data.nq;
  const Complex k2 = k * k;

  // shape values at the regular rule points
  std::vector<double> shp(nq * 3);
  for (int q = 0; q < nq; ++q) {
    for (int i = 0; i < 3; ++i) shp[q * 3 + i] = rule.points[q][i];
  }

  const PairRule* singular_rules[4] = {
      nullptr,
      &singular_pair_rule(PairClass::vertex_shared, options.singular_order),
      &singular_pair_rule(PairClass::edge_shared, options.singular_order),
      &singular_pair_rule(PairClass::coincident, options.singular_order),
  };

  // triangles touching each test vertex, for the row-partitioned sweep
  const int nv = mesh.vertex_count();
  std::vector<std::vector<int>> tris_of_vertex(nv);
  for (int t = 0; t < nt; ++t) {
    for (int i = 0; i < 3; ++i) tris_of_vertex[mesh.triangles[t][i]].push_back(t);
  }

  parallel_for_chunks(nv, [&](std::size_t v_begin, std::size_t v_end) {
    // test triangles owned by this vertex range (deduplicated)
    std::vector<int> owned;
    for (std::size_t v = v_begin; v < v_end; ++v) {
      for (int t : tris_of_vertex[v]) owned.push_back(t);
    }
    std::sort(owned.begin(), owned.end());
    owned.erase(std::unique(owned.begin(), owned.end()), owned.end());

    LocalBlocks blocks;
    for (int ta : owned) {
      const auto& tri_a = mesh.triangles[ta];
      // rows this chunk may write: vertices of ta inside [v_begin, v_end)
      int row_dof[3];
      bool row_mine[3];
      for (int i = 0; i < 3; ++i) {
        const int v = tri_a[i];
        row_mine[i] = (static_cast<std::size_t>(v) >= v_begin && static_cast<std::size_t>(v) < v_end);
        row_dof[i] = test_space.dof_of_vertex(v);
      }
      const Vec3 na = data.normal[ta];
      const Vec3* curl_a = &data.curl[3 * ta];
      const Vec3* qa_pts = &data.qpt[ta * nq];
      const double* qa_w = &data.qw[ta * nq];

      for (int tb = 0; tb < nt; ++tb) {
        const auto& tri_b = mesh.triangles[tb];
        int perm_a[3], perm_b[3], shared = 0;
        shared_vertex_permutation(tri_a, tri_b, perm_a, perm_b, shared);
        blocks.reset();
        const Vec3 nb = data.normal[tb];

        if (shared == 0) {
          const Vec3* qb_pts = &data.qpt[tb * nq];
          const double* qb_w = &data.qw[tb * nq];
          for (int qa = 0; qa < nq; ++qa) {
            const Vec3 x = qa_pts[qa];
            const double wa = qa_w[qa];
            for (int qb = 0; qb < nq; ++qb) {
              const Vec3 d = qb_pts[qb] - x;
              const double r = d.norm();
              const Complex g = green_scalar(k, r) * (wa * qb_w[qb]);
              const Complex dfac = g * (imag_unit * k - 1.0 / r) / r;
              const Complex kdl = dfac * d.dot(nb);
              const Complex kad = -dfac * d.dot(na);
              blocks.s0 += g;
              const double* sa = &shp[qa * 3];
              const double* sb = &shp[qb * 3];
              for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                  const double uv = sa[i] * sb[j];
                  blocks.sl[3 * i + j] += g * uv;
                  blocks.dl[3 * i + j] += kdl * uv;
                  blocks.ad[3 * i + j] += kad * uv;
                }
              }
            }
          }
        } else {
          const PairRule& prule = *singular_rules[shared];
          const double jac = 4.0 * data.area[ta] * data.area[tb];
          const Vec3 a0 = mesh.vertex(tri_a[perm_a[0]]);
          const Vec3 a1 = mesh.vertex(tri_a[perm_a[1]]);
          const Vec3 a2 = mesh.vertex(tri_a[perm_a[2]]);
          const Vec3 b0 = mesh.vertex(tri_b[perm_b[0]]);
          const Vec3 b1 = mesh.vertex(tri_b[perm_b[1]]);
          const Vec3 b2 = mesh.vertex(tri_b[perm_b[2]]);
          for (const auto& p : prule.points) {
            const double sa0 = 1.0 - p.a1 - p.a2, sb0 = 1.0 - p.b1 - p.b2;
            const Vec3 x = sa0 * a0 + p.a1 * a1 + p.a2 * a2;
            const Vec3 y = sb0 * b0 + p.b1 * b1 + p.b2 * b2;
            const Vec3 d = y - x;
            const double r = d.norm();
            const Complex g = green_scalar(k, r) * (p.w * jac);
            const Complex dfac = g * (imag_unit * k - 1.0 / r) / r;
            const Complex kdl = dfac * d.dot(nb);
            const Complex kad = -dfac * d.dot(na);
            double sa[3], sb[3];
            sa[perm_a[0]] = sa0;
            sa[perm_a[1]] = p.a1;
            sa[perm_a[2]] = p.a2;
            sb[perm_b[0]] = sb0;
            sb[perm_b[1]] = p.b1;
            sb[perm_b[2]] = p.b2;
            blocks.s0 += g;
            for (int i = 0; i < 3; ++i) {
              for (int j = 0; j < 3; ++j) {
                const double uv = sa[i] * sb[j];
                blocks.sl[3 * i + j] += g * uv;
                blocks.dl[3 * i + j] += kdl * uv;
                blocks.ad[3 * i + j] += kad * uv;
              }
            }
          }
        }

        const Complex hs_mass_factor = -k2 * na.dot(nb);
        const Vec3* curl_b = &data.curl[3 * tb];
        for (int i = 0; i < 3; ++i) {
          if (!row_mine[i] || row_dof[i] < 0) continue;
          for (int j = 0; j < 3; ++j) {
            const int col = trial_space.dof_of_vertex(tri_b[j]);
            if (col < 0) continue;
            if (m_sl) (*m_sl)(row_dof[i], col) += blocks.sl[3 * i + j];
            if (m_dl) (*m_dl)(row_dof[i], col) += blocks.dl[3 * i + j];
            if (m_ad) (*m_ad)(row_dof[i], col) += blocks.ad[3 * i + j];
            if (m_hs) {
              (*m_hs)(row_dof[i], col) +=
                  curl_a[i].dot(curl_b[j]) * blocks.s0 + hs_mass_factor * blocks.sl[3 * i + j];
            }
          }
        }
      }
    }
  });

  return result;
}

DenseOperator assemble_operator(OperatorKind kind, const P1Space& test_space,
                                const P1Space& trial_space, Complex k,
                                const AssemblyOptions& options) {
  auto ops = assemble_operators({kind}, test_space, trial_space, k, options);
  return std::move(ops.at(kind));
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // closest point on triangle (Ericson, Real-Time Collision Detection)
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return (p - a).norm();
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return (p - b).norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return (p - (a + v * ab)).norm();
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return (p - c).norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return (p - (a + w * ac)).norm();
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + w * (c - b))).norm();
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  return (p - (a + v * ab + w * ac)).norm();
}

double distance_to_surface(const Mesh& mesh, const Vec3& point) {
  double best = std::numeric_limits<double>::infinity();
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    best = std::min(best, point_triangle_distance(point, mesh.corner(t, 0), mesh.corner(t, 1),
                                                  mesh.corner(t, 2)));
  }
  return best;
}

PotentialResult evaluate_potential(PotentialKind kind, const P1Space& space, const VecXc& coeffs,
                                   Complex k, const std::vector<Vec3>& points,
                                   const AssemblyOptions& options) {
  if (coeffs.size() != space.dof_count()) {
    throw std::invalid_argument("evaluate_potential: coefficient size mismatch");
  }
  const Mesh& mesh = space.mesh();
  const TriangleRule& rule = triangle_rule(options.regular_order);
  const TriangleData data = precompute(mesh, rule);
  const int nq = data.nq;
  const int nt = mesh.triangle_count();
  const VecXc nodal = space.expand_to_vertices(coeffs);

  // density values at the rule points, weighted
  std::vector<Complex> density(nt * nq);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    for (int q = 0; q < nq; ++q) {
      const Vec3& bary = rule.points[q];
      density[t * nq + q] = data.qw[t * nq + q] * (bary[0] * nodal[tri[0]] + bary[1] * nodal[tri[1]] +
                                                   bary[2] * nodal[tri[2]]);
    }
  }

  PotentialResult out;
  out.values = VecXc::Zero(points.size());
  out.near_surface.assign(points.size(), 0);
  const double near_tol = 1e-10 * mesh.bbox_diagonal();

  parallel_for_chunks(points.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const Vec3 x = points[p];
      Complex sum(0, 0);
      double rmin = std::numeric_limits<double>::infinity();
      for (int t = 0; t < nt; ++t) {
        const Vec3 nb = data.normal[t];
        for (int q = 0; q < nq; ++q) {
          const Vec3 d = data.qpt[t * nq + q] - x;
          const double r = d.norm();
          rmin = std::min(rmin, r);
          const Complex g = green_scalar(k, r);
          if (kind == PotentialKind::single_layer) {
            sum += g * density[t * nq + q];
          } else {
            sum += g * (imag_unit * k - 1.0 / r) / r * d.dot(nb) * density[t * nq + q];
          }
        }
      }
      out.values[p] = sum;
      // quadrature points over-estimate the distance by O(h); confirm with
      // the exact distance only for candidates
      if (rmin < 0.75 * mesh.max_edge_length() && distance_to_surface(mesh, x) <= near_tol) {
        out.near_surface[p] = 1;
      }
    }
  });
  return out;
}

}  // namespace ncbem
