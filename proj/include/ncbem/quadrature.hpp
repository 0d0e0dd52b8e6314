// Triangle quadrature: regular rules on the reference triangle and
// singularity-adapted tensor rules for coincident/adjacent triangle pairs.
#pragma once

#include <vector>

#include "ncbem/types.hpp"

namespace ncbem {

// Points in barycentric coordinates (b0, b1, b2) on the reference triangle
// {x >= 0, y >= 0, x + y <= 1}; weights sum to the reference area 1/2.
struct TriangleRule {
  int degree = 0;
  std::vector<Vec3> points;
  std::vector<double> weights;
};

// Symmetric rules exact up to the requested total degree (1, 2 or 4; all
// weights positive). Throws on unsupported degrees.
const TriangleRule& triangle_rule(int degree);

// Tensor Gauss rule on the collapsed square (Duffy map), n points per
// direction; exact for polynomials of degree <= 2n-2 and a convenient
// high-order oracle for smooth integrands.
TriangleRule tensor_duffy_rule(int n);

// Gauss-Legendre nodes/weights on [0,1].
void gauss_legendre_01(int n, std::vector<double>& points, std::vector<double>& weights);

// The rule applied on the 4^splits congruent subtriangles of the reference
// triangle; same exactness degree, error reduced by 2^(degree+2) per split.
TriangleRule composite_rule(const TriangleRule& rule, int splits);

enum class PairClass { separated, vertex_shared, edge_shared, coincident };

PairClass pair_class_from_shared(int shared_vertices);

// A 4D rule over reference-triangle pairs. Points are barycentric pairs
// for the two (vertex-permuted) triangles; weights sum to 1/4. For the
// singular classes the shared vertices must come first, in matched order,
// in both triangles' vertex lists.
struct PairRule {
  PairClass cls = PairClass::separated;
  struct Point {
    double a1, a2;  // trial coordinates on triangle A: bary = (1-a1-a2, a1, a2)
    double b1, b2;  // on triangle B
    double w;
  };
  std::vector<Point> points;
};

// Regularizing coordinate transforms per adjacency class, built on a
// tensor Gauss grid of the given order per direction. Cached per
// (class, order); the returned reference stays valid for program lifetime.
const PairRule& singular_pair_rule(PairClass cls, int order);

}  // namespace ncbem
