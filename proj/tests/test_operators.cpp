#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ncbem/operators.hpp"
#include "ncbem/mesh.hpp"
#include "ncbem/space.hpp"

using namespace ncbem;

namespace {

struct PlaneWaveTraces {
  VecXc dirichlet;  // coefficients of the nodal trace
  VecXc neumann;
};

// quadrature-projected traces of u = e^{ik d.x} on the mesh
PlaneWaveTraces plane_wave_traces(const P1Space& space, const MassInverse& minv, double k,
                                  const Vec3& d) {
  const Mesh& mesh = space.mesh();
  VecXc f = VecXc::Zero(space.dof_count());
  VecXc g = VecXc::Zero(space.dof_count());
  // weak traces with the regular rule, then mass projection
  const Mesh& m = mesh;
  for (int t = 0; t < m.triangle_count(); ++t) {
    const Vec3 a = m.corner(t, 0), b = m.corner(t, 1), c = m.corner(t, 2);
    const Vec3 n = m.triangle_normal(t);
    const double jac = 2.0 * m.triangle_area(t);
    // degree-4 rule, inlined barycentric points
    static const double pts[6][3] = {
        {0.10810301816807022, 0.44594849091596489, 0.44594849091596489},
        {0.44594849091596489, 0.10810301816807022, 0.44594849091596489},
        {0.44594849091596489, 0.44594849091596489, 0.10810301816807022},
        {0.81684757298045851, 0.09157621350977074, 0.09157621350977074},
        {0.09157621350977074, 0.81684757298045851, 0.09157621350977074},
        {0.09157621350977074, 0.09157621350977074, 0.81684757298045851}};
    static const double wts[6] = {0.11169079483900573, 0.11169079483900573, 0.11169079483900573,
                                  0.05497587182766093, 0.05497587182766093, 0.05497587182766093};
    for (int q = 0; q < 6; ++q) {
      const Vec3 x = pts[q][0] * a + pts[q][1] * b + pts[q][2] * c;
      const Complex u = std::exp(imag_unit * k * d.dot(x));
      const Complex du = imag_unit * k * d.dot(n) * u;
      const double w = wts[q] * jac;
      for (int i = 0; i < 3; ++i) {
        f[m.triangles[t][i]] += w * pts[q][i] * u;
        g[m.triangles[t][i]] += w * pts[q][i] * du;
      }
    }
  }
  return {minv.apply(f), minv.apply(g)};
}

struct CalderonOps {
  MatXc sl, dl, ad, hs;
};

CalderonOps assemble_calderon(const P1Space& space, Complex k) {
  auto ops = assemble_operators({OperatorKind::single_layer, OperatorKind::double_layer,
                                 OperatorKind::adjoint_double_layer, OperatorKind::hypersingular},
                                space, space, k);
  return {std::move(ops.at(OperatorKind::single_layer).matrix),
          std::move(ops.at(OperatorKind::double_layer).matrix),
          std::move(ops.at(OperatorKind::adjoint_double_layer).matrix),
          std::move(ops.at(OperatorKind::hypersingular).matrix)};
}

// relative residual of the interior Calderon identity (1/2 I - C)[phi;psi] = 0
// for plane-wave traces, in the strong form
double calderon_residual(const Mesh& mesh, double k, const Vec3& d) {
  const P1Space space(mesh);
  const SparseMatrix mass = assemble_mass(space);
  const MassInverse minv(mass);
  const CalderonOps ops = assemble_calderon(space, Complex(k, 0.0));
  const PlaneWaveTraces traces = plane_wave_traces(space, minv, k, d);

  const VecXc row1 = 0.5 * traces.dirichlet -
                     minv.apply(VecXc(-ops.dl * traces.dirichlet + ops.sl * traces.neumann));
  const VecXc row2 = 0.5 * traces.neumann -
                     minv.apply(VecXc(ops.hs * traces.dirichlet + ops.ad * traces.neumann));
  const double num = std::sqrt(row1.squaredNorm() + row2.squaredNorm());
  const double den =
      std::sqrt(traces.dirichlet.squaredNorm() + traces.neumann.squaredNorm());
  return num / den;
}

}  // namespace

TEST_CASE("green function values") {
  CHECK(std::abs(green(Complex(0.0, 0.0), Vec3(0, 0, 0), Vec3(1, 0, 0)) -
                 Complex(1.0 / (4.0 * M_PI), 0.0)) < 1e-12);
  // full period: k = 2 pi at unit distance
  CHECK(std::abs(green(Complex(2.0 * M_PI, 0.0), Vec3(0, 0, 0), Vec3(0, 1, 0)) -
                 Complex(1.0 / (4.0 * M_PI), 0.0)) < 1e-12);
  // complex wavenumber against direct arithmetic
  const Complex k(1.0, 0.5);
  const Complex expected = std::exp(Complex(0.0, 2.0) * k) / (8.0 * M_PI);
  CHECK(std::abs(green(k, Vec3(0, 0, 0), Vec3(2, 0, 0)) - expected) < 1e-14);
  CHECK_THROWS(static_cast<void>(green(Complex(1.0, 0.0), Vec3(1, 1, 1), Vec3(1, 1, 1))));
}

TEST_CASE("wavenumber construction") {
  const MediumParams foam{1104.0, 1750.0, 86.3, 2e6};
  const Wavenumber k = Wavenumber::from_frequency(1500.0, foam);
  CHECK(k.k.real() == doctest::Approx(2.0 * M_PI * 1500.0 / 1104.0).epsilon(1e-14));
  CHECK(k.k.imag() == doctest::Approx(86.3 * 1500.0 / 2e6).epsilon(1e-14));
  CHECK_THROWS(Wavenumber(Complex(-1.0, 0.0)));
  CHECK_THROWS(Wavenumber(Complex(1.0, -0.1)));
  CHECK_THROWS(Wavenumber::from_frequency(-1.0, foam));
}

TEST_CASE("operator symmetry relations") {
  const Mesh cube = generate_cube_surface(2);
  const P1Space space(cube);
  const Complex k(3.1, 0.2);
  const CalderonOps ops = assemble_calderon(space, k);

  const double sl_scale = ops.sl.cwiseAbs().maxCoeff();
  CHECK((ops.sl - ops.sl.transpose()).cwiseAbs().maxCoeff() < 1e-10 * sl_scale);
  const double hs_scale = ops.hs.cwiseAbs().maxCoeff();
  CHECK((ops.hs - ops.hs.transpose()).cwiseAbs().maxCoeff() < 1e-10 * hs_scale);
  const double dl_scale = ops.dl.cwiseAbs().maxCoeff();
  CHECK((ops.ad - ops.dl.transpose()).cwiseAbs().maxCoeff() < 1e-10 * dl_scale);
}

TEST_CASE("wavenumber continuity") {
  const Mesh cube = generate_cube_surface(2);
  const P1Space space(cube);
  const Complex k(2.0, 0.0);
  const double delta = 1e-8;
  const MatXc a0 = assemble_operator(OperatorKind::single_layer, space, space, k).matrix;
  const MatXc a1 = assemble_operator(OperatorKind::single_layer, space, space, k + delta).matrix;
  CHECK((a1 - a0).cwiseAbs().maxCoeff() < 1e-6 * a0.cwiseAbs().maxCoeff());
}

TEST_CASE("calderon residual for plane-wave traces") {
  // 6 elements per wavelength on the coarse cube, then one refinement
  const Mesh coarse = generate_cube_surface(6);
  const double k = 2.0 * M_PI / (6.0 * coarse.max_edge_length());
  const Vec3 d = Vec3(1, 0.3, -0.2).normalized();
  const double r_coarse = calderon_residual(coarse, k, d);
  CHECK(r_coarse < 5e-2);
  const Mesh fine = generate_cube_surface(12);
  const double r_fine = calderon_residual(fine, k, d);
  CHECK(r_coarse / r_fine >= 1.4);
}

TEST_CASE("calderon projector property on random data") {
  const Mesh mesh = generate_cube_surface(6);
  const P1Space space(mesh);
  const double k = 2.0 * M_PI / (6.0 * mesh.max_edge_length());
  const SparseMatrix mass = assemble_mass(space);
  const MassInverse minv(mass);
  const CalderonOps ops = assemble_calderon(space, Complex(k, 0.0));
  const int n = space.dof_count();

  auto project = [&](const VecXc& phi, const VecXc& psi) {
    // (1/2 I + C)[phi; psi] in strong form
    VecXc top = 0.5 * phi + minv.apply(VecXc(-ops.dl * phi + ops.sl * psi));
    VecXc bottom = 0.5 * psi + minv.apply(VecXc(ops.hs * phi + ops.ad * psi));
    return std::make_pair(top, bottom);
  };

  std::mt19937 rng(17);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    VecXc phi(n), psi(n);
    for (int i = 0; i < n; ++i) {
      phi[i] = Complex(dist(rng), dist(rng));
      psi[i] = k * Complex(dist(rng), dist(rng));
    }
    auto [p1, q1] = project(phi, psi);
    auto [p2, q2] = project(p1, q1);
    const double defect = std::sqrt((p2 - p1).squaredNorm() + (q2 - q1).squaredNorm());
    const double scale = std::sqrt(p1.squaredNorm() + q1.squaredNorm());
    worst = std::max(worst, defect / scale);
  }
  CHECK(worst < 5e-2);
}

TEST_CASE("representation formula and null field") {
  const Mesh mesh = generate_cube_surface(9);
  const double k = 2.0 * M_PI / (6.0 * mesh.max_edge_length());
  const Vec3 d = Vec3(1, 0, 0);
  const P1Space space(mesh);
  const SparseMatrix mass = assemble_mass(space);
  const MassInverse minv(mass);
  const PlaneWaveTraces traces = plane_wave_traces(space, minv, k, d);

  // u = SLP(gammaN u) - DLP(gammaD u) reproduces the wave inside
  const std::vector<Vec3> inside = {Vec3(0.5, 0.5, 0.5), Vec3(0.3, 0.6, 0.4),
                                    Vec3(0.7, 0.3, 0.6), Vec3(0.4, 0.45, 0.7)};
  const VecXc slp = evaluate_potential(PotentialKind::single_layer, space, traces.neumann,
                                       Complex(k, 0), inside)
                        .values;
  const VecXc dlp = evaluate_potential(PotentialKind::double_layer, space, traces.dirichlet,
                                       Complex(k, 0), inside)
                        .values;
  for (std::size_t p = 0; p < inside.size(); ++p) {
    const Complex expected = std::exp(imag_unit * k * d.dot(inside[p]));
    CHECK(std::abs(slp[p] - dlp[p] - expected) / std::abs(expected) < 2e-2);
  }

  // the same densities produce (almost) nothing outside
  const std::vector<Vec3> outside = {Vec3(1.8, 0.4, 0.5), Vec3(-0.7, 0.2, 0.3),
                                     Vec3(0.5, 1.9, 0.8)};
  const VecXc slp_out = evaluate_potential(PotentialKind::single_layer, space, traces.neumann,
                                           Complex(k, 0), outside)
                            .values;
  const VecXc dlp_out = evaluate_potential(PotentialKind::double_layer, space, traces.dirichlet,
                                           Complex(k, 0), outside)
                            .values;
  for (std::size_t p = 0; p < outside.size(); ++p) {
    CHECK(std::abs(slp_out[p] - dlp_out[p]) < 2e-2);
  }
}

TEST_CASE("potential evaluation basics") {
  const Mesh mesh = generate_cube_surface(2);
  const P1Space space(mesh);
  const std::vector<Vec3> points = {Vec3(2, 2, 2), Vec3(0.5, 0.5, 0.5)};
  const VecXc zero = VecXc::Zero(space.dof_count());
  const PotentialResult result =
      evaluate_potential(PotentialKind::single_layer, space, zero, Complex(1.0, 0), points);
  CHECK(result.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(result.near_surface[0] == 0);

  // a point on the surface gets flagged, not rejected
  const std::vector<Vec3> on_surface = {Vec3(0.5, 0.5, 0.0)};
  const PotentialResult flagged =
      evaluate_potential(PotentialKind::single_layer, space, zero, Complex(1.0, 0), on_surface);
  CHECK(flagged.near_surface[0] == 1);
}

TEST_CASE("mismatched spaces rejected") {
  const Mesh a = generate_cube_surface(1);
  const Mesh b = generate_cube_surface(2);
  const P1Space sa(a), sb(b);
  CHECK_THROWS(static_cast<void>(
      assemble_operator(OperatorKind::single_layer, sa, sb, Complex(1.0, 0))));
}
