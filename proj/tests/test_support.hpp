#pragma once

#include <Eigen/Dense>
#include <functional>
#include <numeric>
#include <vector>

#include "mmot/measure.hpp"
#include "mmot/problem.hpp"
#include "mmot/rng.hpp"

namespace mmot::test {

// ---- finite differences --------------------------------------------------

inline Vector fd_gradient(const std::function<double(const Vector&)>& f,
                          const Vector& x, double h = 1e-5) {
  Vector g(x.size());
  Vector xp = x;
  for (int d = 0; d < x.size(); ++d) {
    xp[d] = x[d] + h;
    const double fp = f(xp);
    xp[d] = x[d] - h;
    const double fm = f(xp);
    xp[d] = x[d];
    g[d] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f,
                          const Vector& x, double h = 1e-4) {
  const Vector f0 = f(x);
  Matrix j(f0.size(), x.size());
  Vector xp = x;
  for (int d = 0; d < x.size(); ++d) {
    xp[d] = x[d] + h;
    const Vector fp = f(xp);
    xp[d] = x[d] - h;
    const Vector fm = f(xp);
    xp[d] = x[d];
    j.col(d) = (fp - fm) / (2.0 * h);
  }
  return j;
}

/// d^2 g / (da db) for g seen through two separate argument blocks.
inline Matrix fd_cross_hessian(
    const std::function<double(const Vector&, const Vector&)>& g,
    const Vector& a, const Vector& b, double h = 1e-4) {
  Matrix out(a.size(), b.size());
  Vector ap = a, bp = b;
  for (int r = 0; r < a.size(); ++r) {
    for (int c = 0; c < b.size(); ++c) {
      ap[r] = a[r] + h;
      bp[c] = b[c] + h;
      const double pp = g(ap, bp);
      bp[c] = b[c] - h;
      const double pm = g(ap, bp);
      ap[r] = a[r] - h;
      const double mm = g(ap, bp);
      bp[c] = b[c] + h;
      const double mp = g(ap, bp);
      ap[r] = a[r];
      bp[c] = b[c];
      out(r, c) = (pp - pm - mp + mm) / (4.0 * h * h);
    }
  }
  return out;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / (1.0 + std::abs(want));
}

inline double rel_err(const Vector& got, const Vector& want) {
  return (got - want).norm() / (1.0 + want.norm());
}

inline double rel_err(const Matrix& got, const Matrix& want) {
  return (got - want).norm() / (1.0 + want.norm());
}

// ---- independent brute-force LP oracle ------------------------------------

struct VertexEnumResult {
  double best = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd x;
  long vertices = 0;
};

/// Exhaustive enumeration of basic feasible points of {Ax = b, x >= 0}:
/// every column subset of size rank(A) is solved and filtered. Only for
/// tiny systems.
inline VertexEnumResult enumerate_vertex_max(const Eigen::VectorXd& c,
                                             const Eigen::MatrixXd& a,
                                             const Eigen::VectorXd& b,
                                             double feas_tol = 1e-9) {
  const int rows = static_cast<int>(a.rows());
  const int cols = static_cast<int>(a.cols());
  VertexEnumResult out;
  std::vector<int> pick(rows);
  std::iota(pick.begin(), pick.end(), 0);

  auto consider = [&](const std::vector<int>& cs) {
    Eigen::MatrixXd basis(rows, rows);
    for (int k = 0; k < rows; ++k) basis.col(k) = a.col(cs[k]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
    if (!lu.isInvertible()) return;
    const Eigen::VectorXd xb = lu.solve(b);
    if ((xb.array() < -feas_tol).any()) return;
    ++out.vertices;
    double val = 0.0;
    for (int k = 0; k < rows; ++k) val += c[cs[k]] * xb[k];
    if (val > out.best) {
      out.best = val;
      out.x = Eigen::VectorXd::Zero(cols);
      for (int k = 0; k < rows; ++k) out.x[cs[k]] = std::max(xb[k], 0.0);
    }
  };

  // iterate subsets via the revolving-door order of the last index
  while (true) {
    consider(pick);
    int i = rows - 1;
    while (i >= 0 && pick[i] == cols - rows + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int k = i + 1; k < rows; ++k) pick[k] = pick[k - 1] + 1;
  }
  return out;
}

/// Constraint system of the transport polytope over the given supports,
/// built straight from the definition (all rows of the first group, all
/// but one row of every other group). Independent of the solver path.
struct TransportSystem {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  std::vector<long> strides;  // linear index = sum idx[i] * strides[i]
};

inline TransportSystem transport_system(
    const std::vector<DiscreteMeasure>& marginals) {
  const int m = static_cast<int>(marginals.size());
  std::vector<int> sizes;
  long vars = 1;
  for (const auto& mu : marginals) {
    sizes.push_back(mu.size());
    vars *= mu.size();
  }
  std::vector<long> strides(m, 1);
  for (int i = m - 2; i >= 0; --i) strides[i] = strides[i + 1] * sizes[i + 1];

  int rows = 0;
  for (int i = 0; i < m; ++i) rows += sizes[i] - (i > 0 ? 1 : 0);
  TransportSystem sys;
  sys.a = Eigen::MatrixXd::Zero(rows, vars);
  sys.b = Eigen::VectorXd::Zero(rows);
  sys.strides = strides;

  int row0 = 0;
  for (int i = 0; i < m; ++i) {
    const int kept = sizes[i] - (i > 0 ? 1 : 0);
    for (int k = 0; k < kept; ++k) sys.b[row0 + k] = marginals[i].weight(k);
    row0 += kept;
  }
  for (long t = 0; t < vars; ++t) {
    long rest = t;
    int r0 = 0;
    for (int i = 0; i < m; ++i) {
      const int idx = static_cast<int>(rest / strides[i]);
      rest %= strides[i];
      const int kept = sizes[i] - (i > 0 ? 1 : 0);
      if (idx < kept) sys.a(r0 + idx, t) = 1.0;
      r0 += kept;
    }
  }
  return sys;
}

/// Surplus values on the tuple grid in the same linear order.
inline Eigen::VectorXd surplus_vector(
    const std::vector<DiscreteMeasure>& marginals, const Surplus& s) {
  const int m = static_cast<int>(marginals.size());
  long vars = 1;
  for (const auto& mu : marginals) vars *= mu.size();
  std::vector<long> strides(m, 1);
  for (int i = m - 2; i >= 0; --i)
    strides[i] = strides[i + 1] * marginals[i + 1].size();
  Eigen::VectorXd c(vars);
  std::vector<Vector> xs(m);
  for (long t = 0; t < vars; ++t) {
    long rest = t;
    for (int i = 0; i < m; ++i) {
      xs[i] = marginals[i].point(static_cast<int>(rest / strides[i]));
      rest %= strides[i];
    }
    c[t] = s.value(xs);
  }
  return c;
}

// ---- misc helpers ----------------------------------------------------------

inline DiscreteMeasure uniform_measure_1d(const std::vector<double>& coords) {
  std::vector<Vector> pts;
  for (double x : coords) pts.push_back(Vector::Constant(1, x));
  return DiscreteMeasure(
      pts, std::vector<double>(coords.size(), 1.0 / coords.size()));
}

inline std::vector<Vector> random_tuple(Rng& rng, int m, int n, double lo,
                                        double hi) {
  std::vector<Vector> xs;
  for (int i = 0; i < m; ++i) {
    Vector x(n);
    for (int d = 0; d < n; ++d) x[d] = rng.uniform(lo, hi);
    xs.push_back(std::move(x));
  }
  return xs;
}

}  // namespace mmot::test
