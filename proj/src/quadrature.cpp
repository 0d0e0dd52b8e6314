#include "ncbem/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace ncbem {

namespace {

TriangleRule make_rule(int degree) {
  TriangleRule rule;
  rule.degree = degree;
  auto orbit1 = [&](double w) {
    rule.points.push_back(Vec3(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0));
    rule.weights.push_back(w * 0.5);
  };
  auto orbit3 = [&](double a, double w) {
    const double b = 1.0 - 2.0 * a;
    rule.points.push_back(Vec3(b, a, a));
    rule.points.push_back(Vec3(a, b, a));
    rule.points.push_back(Vec3(a, a, b));
    for (int i = 0; i < 3; ++i) rule.weights.push_back(w * 0.5);
  };
  switch (degree) {
    case 1:
      orbit1(1.0);
      break;
    case 2:
      orbit3(0.5, 1.0 / 3.0);  // edge midpoints
      break;
    case 4:
      // six-point rule, all weights positive
      orbit3(0.44594849091596488, 0.22338158967801146);
      orbit3(0.09157621350977074, 0.10995174365532187);
      break;
    default:
      throw std::invalid_argument("triangle_rule: unsupported degree " + std::to_string(degree));
  }
  return rule;
}

}  // namespace

const TriangleRule& triangle_rule(int degree) {
  static std::map<int, TriangleRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, make_rule(degree)).first;
  return it->second;
}

void gauss_legendre_01(int n, std::vector<double>& points, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_01: n must be >= 1");
  points.assign(n, 0.0);
  weights.assign(n, 0.0);
  // Newton iteration on Legendre polynomials over [-1,1], then map to [0,1].
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    points[i] = 0.5 * (1.0 - x);
    points[n - 1 - i] = 0.5 * (1.0 + x);
    weights[i] = 0.5 * w;
    weights[n - 1 - i] = 0.5 * w;
  }
}

TriangleRule tensor_duffy_rule(int n) {
  std::vector<double> x, w;
  gauss_legendre_01(n, x, w);
  TriangleRule rule;
  rule.degree = 2 * n - 2;
  rule.points.reserve(n * n);
  rule.weights.reserve(n * n);
  // (u, v) in [0,1]^2 -> (u, v(1-u)) with Jacobian (1-u)
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a = x[i];
      const double b = x[j] * (1.0 - x[i]);
      rule.points.push_back(Vec3(1.0 - a - b, a, b));
      rule.weights.push_back(w[i] * w[j] * (1.0 - x[i]));
    }
  }
  return rule;
}

TriangleRule composite_rule(const TriangleRule& rule, int splits) {
  TriangleRule out = rule;
  for (int s = 0; s < splits; ++s) {
    TriangleRule next;
    next.degree = out.degree;
    // corners of the four children in barycentric coordinates
    static const Vec3 v0(1, 0, 0), v1(0, 1, 0), v2(0, 0, 1);
    const Vec3 m01 = 0.5 * (v0 + v1), m12 = 0.5 * (v1 + v2), m20 = 0.5 * (v2 + v0);
    const std::array<std::array<Vec3, 3>, 4> children = {{{v0, m01, m20},
                                                          {m01, v1, m12},
                                                          {m20, m12, v2},
                                                          {m01, m12, m20}}};
    for (const auto& child : children) {
      for (std::size_t q = 0; q < out.points.size(); ++q) {
        const Vec3& b = out.points[q];
        next.points.push_back(b[0] * child[0] + b[1] * child[1] + b[2] * child[2]);
        next.weights.push_back(0.25 * out.weights[q]);
      }
    }
    out = std::move(next);
  }
  return out;
}

PairClass pair_class_from_shared(int shared_vertices) {
  switch (shared_vertices) {
    case 0:
      return PairClass::separated;
    case 1:
      return PairClass::vertex_shared;
    case 2:
      return PairClass::edge_shared;
    case 3:
      return PairClass::coincident;
    default:
      throw std::invalid_argument("pair_class_from_shared: invalid shared vertex count");
  }
}

namespace {

// The regularizing transforms below subdivide [0,1]^4 and map onto pairs of
// points in the triangle {0 <= x2 <= x1 <= 1}; subtracting x2 from x1 then
// lands in the reference triangle with coordinates (a1, a2) such that the
// barycentric weights are (1-a1-a2, a1, a2). Weights carry the full
// Jacobians and sum to 1/4.
class PairRuleBuilder {
 public:
  explicit PairRuleBuilder(int order) { gauss_legendre_01(order, x_, w_); }

  PairRule coincident() const {
    PairRule rule;
    rule.cls = PairClass::coincident;
    loop4([&](double xi, double e1, double e2, double e3, double weight) {
      const double lw = weight * xi * xi * xi * e1 * e1 * e2;
      add(rule, xi, xi * (1.0 - e1 + e1 * e2), xi * (1.0 - e1 * e2 * e3), xi * (1.0 - e1), lw);
      add(rule, xi * (1.0 - e1 * e2 * e3), xi * (1.0 - e1), xi, xi * (1.0 - e1 + e1 * e2), lw);
      add(rule, xi, xi * e1 * (1.0 - e2 + e2 * e3), xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2), lw);
      add(rule, xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2), xi, xi * e1 * (1.0 - e2 + e2 * e3), lw);
      add(rule, xi * (1.0 - e1 * e2 * e3), xi * e1 * (1.0 - e2 * e3), xi, xi * e1 * (1.0 - e2), lw);
      add(rule, xi, xi * e1 * (1.0 - e2), xi * (1.0 - e1 * e2 * e3), xi * e1 * (1.0 - e2 * e3), lw);
    });
    return rule;
  }

  PairRule edge_shared() const {
    PairRule rule;
    rule.cls = PairClass::edge_shared;
    loop4([&](double xi, double e1, double e2, double e3, double weight) {
      const double lw = weight * xi * xi * xi * e1 * e1 * e2;
      add(rule, xi, xi * e1 * e3, xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2),
          weight * xi * xi * xi * e1 * e1);
      add(rule, xi, xi * e1, xi * (1.0 - e1 * e2 * e3), xi * e1 * e2 * (1.0 - e3), lw);
      add(rule, xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2), xi, xi * e1 * e2 * e3, lw);
      add(rule, xi * (1.0 - e1 * e2 * e3), xi * e1 * e2 * (1.0 - e3), xi, xi * e1, lw);
      add(rule, xi * (1.0 - e1 * e2 * e3), xi * e1 * (1.0 - e2 * e3), xi, xi * e1 * e2, lw);
    });
    return rule;
  }

  PairRule vertex_shared() const {
    PairRule rule;
    rule.cls = PairClass::vertex_shared;
    loop4([&](double xi, double e1, double e2, double e3, double weight) {
      const double lw = weight * xi * xi * xi * e2;
      add(rule, xi, xi * e1, xi * e2, xi * e2 * e3, lw);
      add(rule, xi * e2, xi * e2 * e3, xi, xi * e1, lw);
    });
    return rule;
  }

  static PairRule separated(int order) {
    // tensor product of two regular triangle rules
    const TriangleRule& tri = triangle_rule(order);
    PairRule rule;
    rule.cls = PairClass::separated;
    for (std::size_t i = 0; i < tri.points.size(); ++i) {
      for (std::size_t j = 0; j < tri.points.size(); ++j) {
        rule.points.push_back({tri.points[i][1], tri.points[i][2], tri.points[j][1],
                               tri.points[j][2], tri.weights[i] * tri.weights[j]});
      }
    }
    return rule;
  }

 private:
  template <typename Fn>
  void loop4(const Fn& fn) const {
    const int n = static_cast<int>(x_.size());
    for (int i0 = 0; i0 < n; ++i0) {
      for (int i1 = 0; i1 < n; ++i1) {
        for (int i2 = 0; i2 < n; ++i2) {
          for (int i3 = 0; i3 < n; ++i3) {
            fn(x_[i0], x_[i1], x_[i2], x_[i3], w_[i0] * w_[i1] * w_[i2] * w_[i3]);
          }
        }
      }
    }
  }

  static void add(PairRule& rule, double ax1, double ax2, double bx1, double bx2, double w) {
    // from the lower triangle {x2 <= x1} to reference coordinates
    rule.points.push_back({ax1 - ax2, ax2, bx1 - bx2, bx2, w});
  }

  std::vector<double> x_, w_;
};

// Points swapped between the two triangles, weights halved; makes the rule
// invariant under exchanging the triangles so that transposed pairs produce
// bitwise-transposed Galerkin contributions.
PairRule symmetrized(PairRule rule) {
  const std::size_t n = rule.points.size();
  rule.points.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    PairRule::Point p = rule.points[i];
    rule.points[i].w *= 0.5;
    rule.points.push_back({p.b1, p.b2, p.a1, p.a2, 0.5 * p.w});
  }
  return rule;
}

PairRule build_pair_rule(PairClass cls, int order) {
  if (cls == PairClass::separated) return PairRuleBuilder::separated(order);
  // Gauss counts per direction chosen so the static 1/|x-y| kernel is
  // integrated to better than 1e-6 relative on unit triangles at order 4.
  switch (cls) {
    case PairClass::coincident:
      return PairRuleBuilder(order + 4).coincident();
    case PairClass::edge_shared:
      return symmetrized(PairRuleBuilder(order + 2).edge_shared());
    case PairClass::vertex_shared:
      return PairRuleBuilder(order + 2).vertex_shared();
    default:
      throw std::invalid_argument("singular_pair_rule: unsupported class");
  }
}

}  // namespace

const PairRule& singular_pair_rule(PairClass cls, int order) {
  if (order < 1) throw std::invalid_argument("singular_pair_rule: order must be >= 1");
  static std::map<std::pair<int, int>, PairRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_pair(static_cast<int>(cls), order);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_pair_rule(cls, order)).first;
  return it->second;
}

}  // namespace ncbem
