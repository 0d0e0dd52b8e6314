#include "ncbem/gmres.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace ncbem {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// complex Givens rotation zeroing b: [c, s; -conj(s), c] [a; b] = [r; 0]
void make_givens(Complex a, Complex b, double& c, Complex& s, Complex& r) {
  const double na = std::abs(a), nb = std::abs(b);
  if (nb == 0.0) {
    c = 1.0;
    s = Complex(0, 0);
    r = a;
    return;
  }
  const double t = std::hypot(na, nb);
  if (na == 0.0) {
    c = 0.0;
    s = std::conj(b) / nb;
    r = nb;
    return;
  }
  const Complex phase = a / na;
  c = na / t;
  s = phase * std::conj(b) / t;
  r = phase * t;
}

}  // namespace

std::pair<VecXc, SolveReport> gmres(const LinOp& op, const VecXc& rhs, const GmresOptions& options) {
  if (op.rows() != op.cols()) throw std::invalid_argument("gmres: map must be square");
  if (rhs.size() != op.rows()) throw std::invalid_argument("gmres: rhs size mismatch");
  const Eigen::Index n = op.rows();

  SolveReport report;
  VecXc x = VecXc::Zero(n);
  const double normb = rhs.norm();
  if (normb == 0.0) {
    report.converged = true;
    return {x, report};
  }

  const auto t_start = Clock::now();
  int max_iter = options.max_iter;
  if (max_iter <= 0) max_iter = static_cast<int>(std::min<long long>(10LL * n, 20000LL));
  const int cycle = options.restart > 0 ? options.restart : max_iter;

  report.residual_history.push_back(1.0);

  auto timed_apply = [&](const VecXc& v) {
    const auto t0 = Clock::now();
    VecXc w = op.apply(v);
    report.matvec_seconds += seconds_since(t0);
    return w;
  };

  bool done = false;
  while (!done && report.iterations < max_iter) {
    VecXc r = x.isZero(0.0) ? rhs : VecXc(rhs - timed_apply(x));
    const double beta = r.norm();
    if (beta / normb <= options.tol) {
      report.converged = true;
      break;
    }
    std::vector<VecXc> basis;
    basis.push_back(r / beta);
    std::vector<std::vector<Complex>> hcols;  // column j holds h(0..j+1, j)
    std::vector<double> giv_c;
    std::vector<Complex> giv_s;
    std::vector<Complex> g{Complex(beta, 0.0)};

    int j = 0;
    for (; j < cycle && report.iterations < max_iter; ++j) {
      VecXc w = timed_apply(basis[j]);
      std::vector<Complex> h(j + 2, Complex(0, 0));
      for (int i = 0; i <= j; ++i) {
        h[i] = basis[i].dot(w);  // conjugated inner product
        w -= h[i] * basis[i];
      }
      const double hnext = w.norm();
      h[j + 1] = Complex(hnext, 0.0);
      for (int i = 0; i < j; ++i) {
        const Complex t0 = giv_c[i] * h[i] + giv_s[i] * h[i + 1];
        h[i + 1] = -std::conj(giv_s[i]) * h[i] + giv_c[i] * h[i + 1];
        h[i] = t0;
      }
      double c;
      Complex s, rr;
      make_givens(h[j], h[j + 1], c, s, rr);
      giv_c.push_back(c);
      giv_s.push_back(s);
      h[j] = rr;
      h[j + 1] = Complex(0, 0);
      g.push_back(-std::conj(s) * g[j]);
      g[j] *= c;
      hcols.push_back(std::move(h));

      report.iterations += 1;
      const double resid = std::abs(g[j + 1]) / normb;
      report.residual_history.push_back(resid);

      const bool happy = hnext <= 1e-14 * normb;
      if (resid <= options.tol || happy) {
        report.converged = true;
        ++j;
        break;
      }
      basis.push_back(w / hnext);
    }

    // back substitution on the triangularised Hessenberg system
    if (j > 0) {
      std::vector<Complex> y(j, Complex(0, 0));
      for (int i = j - 1; i >= 0; --i) {
        Complex acc = g[i];
        for (int l = i + 1; l < j; ++l) acc -= hcols[l][i] * y[l];
        y[i] = acc / hcols[i][i];
      }
      for (int i = 0; i < j; ++i) x += y[i] * basis[i];
    }
    done = report.converged;
  }

  report.solve_seconds = seconds_since(t_start);
  report.seconds_per_iteration =
      report.iterations > 0 ? report.solve_seconds / report.iterations : 0.0;
  report.true_residual = (rhs - op.apply(x)).norm() / normb;
  return {x, report};
}

}  // namespace ncbem
